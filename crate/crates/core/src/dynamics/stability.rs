//! Stationary points of the limit dynamics.
//!
//! Every good arrives as a unit-rate stream. A constant profile of
//! multipliers, flow shares and posted prices is stable when the flows are a
//! valid clearing of each stream and no bidder's pacing controller would move:
//! a bidder spending above its budget rate pushes its multiplier down, and a
//! paced bidder spending below it pushes its multiplier up.

use serde::{Deserialize, Serialize};

use crate::market::{PacingInstance, PacingOutcome, Tolerance};

/// Direction in which a bidder's controller moves its multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Drift {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    /// Spend rate of each bidder.
    pub spend_rates: Vec<f64>,
    /// Controller drift of each bidder, `None` when at rest.
    pub drifts: Vec<Option<Drift>>,
    /// Streams whose flows or prices are not a valid clearing.
    pub unclear_goods: Vec<usize>,
    /// Profile entries outside their domains.
    pub malformed: bool,
}

/// Clearing data of one stream: the top bid, how many bidders reach it
/// exactly, and the best bid below it.
struct Stream {
    top: f64,
    at_top: usize,
    below: f64,
}

impl Stream {
    fn of(bids: impl Iterator<Item = f64>) -> Self {
        let mut s = Stream {
            top: 0.0,
            at_top: 0,
            below: 0.0,
        };
        for b in bids {
            if b > s.top {
                s.below = s.below.max(s.top);
                s.top = b;
                s.at_top = 1;
            } else if b == s.top {
                s.at_top += 1;
            } else {
                s.below = s.below.max(b);
            }
        }
        s
    }

    /// Price bidder with bid `b` faces: the best bid of everybody else.
    fn competing(&self, b: f64) -> f64 {
        if b == self.top && self.at_top == 1 {
            self.below
        } else {
            self.top
        }
    }
}

/// Checks whether a constant profile is a rest point of the limit dynamics.
/// Malformed shapes are reported as unstable.
pub fn stability_check(
    inst: &PacingInstance,
    out: &PacingOutcome,
    tol: &Tolerance,
) -> StabilityVerdict {
    let (n, m) = (inst.n(), inst.m());
    let eps = tol.eps_feas;
    let shaped = out.alphas.len() == n
        && out.prices.len() == m
        && out.fractions.len() == n
        && out.fractions.iter().all(|r| r.len() == m);
    if !shaped {
        return StabilityVerdict {
            stable: false,
            spend_rates: vec![],
            drifts: vec![],
            unclear_goods: vec![],
            malformed: true,
        };
    }
    let in_range = |x: f64, hi: f64| x >= -eps && x <= hi + eps;
    let mut malformed = out.alphas.iter().any(|&a| !in_range(a, 1.0))
        || out.prices.iter().any(|&p| p < -eps)
        || out.fractions.iter().flatten().any(|&x| !in_range(x, 1.0));

    let mut spend_rates = vec![0.0; n];
    let mut unclear_goods = Vec::new();
    for j in 0..m {
        let bid = |i: usize| out.alphas[i] * inst.value(i, j);
        let stream = Stream::of((0..n).map(bid));
        let mut flow = 0.0;
        let mut clear = true;
        for i in 0..n {
            let x = out.fractions[i][j];
            flow += x;
            spend_rates[i] += x * out.prices[j];
            if x > eps {
                let b = bid(i);
                clear &= b + tol.eps_tie >= stream.top;
                clear &= (out.prices[j] - stream.competing(b)).abs() <= eps;
            }
        }
        let wanted = (0..n).any(|i| inst.value(i, j) > 0.0);
        clear &= flow <= 1.0 + eps && (!wanted || flow >= 1.0 - eps);
        if !clear {
            unclear_goods.push(j);
        }
    }
    malformed |= spend_rates.iter().any(|r| !r.is_finite());

    let drifts: Vec<Option<Drift>> = (0..n)
        .map(|i| {
            let rate = inst.budget(i);
            if spend_rates[i] > rate + eps {
                Some(Drift::Down)
            } else if spend_rates[i] < rate - eps && out.alphas[i] < 1.0 - eps {
                Some(Drift::Up)
            } else {
                None
            }
        })
        .collect();
    let stable = !malformed && unclear_goods.is_empty() && drifts.iter().all(Option::is_none);
    StabilityVerdict {
        stable,
        spend_rates,
        drifts,
        unclear_goods,
        malformed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst() -> PacingInstance {
        PacingInstance::new(vec![vec![10.0, 2.0], vec![6.0, 4.0]], vec![3.0, 100.0]).unwrap()
    }

    #[test]
    fn paced_underspender_drifts_up() {
        // Bidder 0 paced to 0.5 wins nothing and spends nothing.
        let out = PacingOutcome::new(
            vec![0.5, 1.0],
            vec![vec![0.0, 0.0], vec![1.0, 1.0]],
            vec![5.0, 1.0],
        );
        let v = stability_check(&inst(), &out, &Tolerance::default());
        assert!(!v.stable);
        assert_eq!(v.drifts[0], Some(Drift::Up));
    }

    #[test]
    fn overspender_drifts_down() {
        let out = PacingOutcome::new(
            vec![1.0, 1.0],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![6.0, 2.0],
        );
        let v = stability_check(&inst(), &out, &Tolerance::default());
        assert_eq!(v.drifts[0], Some(Drift::Down));
        assert!(v.unclear_goods.is_empty());
    }

    #[test]
    fn split_stream_at_budget_rate_is_stable() {
        // α_0 = 0.6 ties bidder 1 on good 0; half of it costs bidder 0 exactly 3.
        let out = PacingOutcome::new(
            vec![0.6, 1.0],
            vec![vec![0.5, 0.0], vec![0.5, 1.0]],
            vec![6.0, 1.2],
        );
        let v = stability_check(&inst(), &out, &Tolerance::default());
        assert!(v.stable, "{v:?}");
    }

    #[test]
    fn wrong_shape_is_unstable() {
        let out = PacingOutcome::new(vec![1.0], vec![vec![1.0, 0.0]], vec![0.0, 0.0]);
        assert!(stability_check(&inst(), &out, &Tolerance::default()).malformed);
    }
}
