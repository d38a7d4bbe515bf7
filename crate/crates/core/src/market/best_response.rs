//! Single-bidder best response against fixed rival bids.
//!
//! With rival bids fixed, bidder `i` facing top rival bid `c_j` on good `j`
//! wins `j` outright when `α v_ij > c_j`, may take any fraction when
//! `α v_ij = c_j`, and loses it otherwise. The set of outright wins only
//! changes at the critical ratios `c_j / v_ij`, so utility is constant on the
//! open intervals between them. Evaluating every critical point and every
//! interval gives the exact optimum.

use serde::{Deserialize, Serialize};

use super::instance::PacingInstance;
use super::outcome::Tolerance;
use crate::error::{Error, Result};

/// Which end of the optimal set a best response picks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    High,
    Low,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    pub alpha: f64,
    /// Fraction of each good won at `alpha`, ties filled within budget.
    pub fractions: Vec<f64>,
    /// Value won minus amount paid.
    pub utility: f64,
    pub spend: f64,
    /// Spend reaches the budget.
    pub budget_binding: bool,
}

/// Utility of a given multiplier against fixed rival bids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseEval {
    pub utility: f64,
    pub spend: f64,
    pub fractions: Vec<f64>,
    pub over_budget: bool,
    /// Amount by which outright wins exceed the budget.
    pub overspend: f64,
    pub budget_binding: bool,
}

/// Highest bid on each good among bidders other than `bidder`.
pub fn rival_top_bids(bids: &[Vec<f64>], bidder: usize) -> Vec<f64> {
    let m = bids.first().map_or(0, Vec::len);
    (0..m)
        .map(|j| {
            bids.iter()
                .enumerate()
                .filter(|&(k, _)| k != bidder)
                .map(|(_, row)| row[j])
                .fold(0.0, f64::max)
        })
        .collect()
}

fn check_inputs(inst: &PacingInstance, bidder: usize, rival_bids: &[Vec<f64>]) -> Result<()> {
    let n = inst.n();
    if bidder >= n {
        return Err(Error::BidderIndex { index: bidder, n });
    }
    if rival_bids.len() != n || rival_bids.iter().any(|r| r.len() != inst.m()) {
        return Err(Error::Dimension("rival bids must be n x m".into()));
    }
    for (k, row) in rival_bids.iter().enumerate() {
        if k != bidder && row.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bids of bidder {k} must be finite and non-negative"
            )));
        }
    }
    Ok(())
}

/// Best response with high tie-breaking and default tolerances.
pub fn best_response(
    inst: &PacingInstance,
    bidder: usize,
    rival_bids: &[Vec<f64>],
) -> Result<BestResponse> {
    best_response_with(
        inst,
        bidder,
        rival_bids,
        TieBreak::High,
        &Tolerance::default(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Point,
    Interval,
}

#[derive(Debug, Clone)]
struct Candidate {
    kind: Kind,
    lo: f64,
    hi: f64,
    /// Number of ratio groups won outright.
    strict_groups: usize,
    /// Ratio group tied at this point, if any.
    tie_group: Option<usize>,
    utility: f64,
    feasible: bool,
    /// Budget forces a partial take of a profitable tied good.
    fragile: bool,
}

struct Item {
    good: usize,
    value: f64,
    price: f64,
}

/// Fills tied goods in index order while budget remains; free goods are taken whole.
fn fill_ties(items: &[&Item], mut left: f64) -> (Vec<(usize, f64)>, f64, f64, bool) {
    let (mut gain, mut paid, mut fragile) = (0.0, 0.0, false);
    let mut takes = Vec::with_capacity(items.len());
    for it in items {
        let f = if it.price <= 0.0 {
            1.0
        } else {
            (left / it.price).clamp(0.0, 1.0)
        };
        left -= f * it.price;
        paid += f * it.price;
        gain += f * (it.value - it.price);
        if f < 1.0 - 1e-12 && it.value - it.price > 1e-12 * it.value {
            fragile = true;
        }
        takes.push((it.good, f));
    }
    (takes, gain, paid, fragile)
}

/// Exact best response: the highest (or lowest) utility-maximizing multiplier.
///
/// An optimum reached only at a point where the budget forces a partial take
/// of a tied good is replaced by the adjacent open interval when that interval
/// is equally good, so the response does not hinge on winning a tie.
pub fn best_response_with(
    inst: &PacingInstance,
    bidder: usize,
    rival_bids: &[Vec<f64>],
    tie: TieBreak,
    tol: &Tolerance,
) -> Result<BestResponse> {
    check_inputs(inst, bidder, rival_bids)?;
    let budget = inst.budget(bidder);
    let tops = rival_top_bids(rival_bids, bidder);
    let m = inst.m();

    let mut ranked: Vec<(f64, Item)> = (0..m)
        .filter(|&j| inst.value(bidder, j) > 0.0)
        .map(|j| {
            let v = inst.value(bidder, j);
            (
                tops[j] / v,
                Item {
                    good: j,
                    value: v,
                    price: tops[j],
                },
            )
        })
        .filter(|(r, _)| *r <= 1.0 + 1e-12)
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.good.cmp(&b.1.good)));

    // Group goods whose critical ratios coincide.
    let mut groups: Vec<(f64, Vec<Item>)> = Vec::new();
    for (r, item) in ranked {
        let r = r.min(1.0);
        match groups.last_mut() {
            Some((g, members)) if r - *g <= 1e-12 * g.max(1.0) => members.push(item),
            _ => groups.push((r, vec![item])),
        }
    }
    let k = groups.len();
    let mut cost_before = vec![0.0; k + 1];
    let mut gain_before = vec![0.0; k + 1];
    for (g, (_, members)) in groups.iter().enumerate() {
        cost_before[g + 1] = cost_before[g] + members.iter().map(|it| it.price).sum::<f64>();
        gain_before[g + 1] =
            gain_before[g] + members.iter().map(|it| it.value - it.price).sum::<f64>();
    }

    let outright = |strict: usize| -> Candidate {
        let feasible = cost_before[strict] <= budget + tol.eps_feas;
        Candidate {
            kind: Kind::Interval,
            lo: 0.0,
            hi: 0.0,
            strict_groups: strict,
            tie_group: None,
            utility: gain_before[strict],
            feasible,
            fragile: false,
        }
    };

    let mut cands: Vec<Candidate> = Vec::new();
    if k == 0 || groups[0].0 > 0.0 {
        let first = if k == 0 { 1.0 } else { groups[0].0 };
        cands.push(Candidate {
            kind: Kind::Point,
            lo: 0.0,
            hi: 0.0,
            ..outright(0)
        });
        cands.push(Candidate {
            lo: 0.0,
            hi: first,
            ..outright(0)
        });
    }
    for (g, (ratio, members)) in groups.iter().enumerate() {
        let strict_cost = cost_before[g];
        let feasible = strict_cost <= budget + tol.eps_feas;
        let refs: Vec<&Item> = members.iter().collect();
        let (_, gain, _, fragile) = fill_ties(&refs, (budget - strict_cost).max(0.0));
        cands.push(Candidate {
            kind: Kind::Point,
            lo: *ratio,
            hi: *ratio,
            strict_groups: g,
            tie_group: Some(g),
            utility: gain_before[g] + gain,
            feasible,
            fragile,
        });
        let next = if g + 1 < k { groups[g + 1].0 } else { 1.0 };
        if *ratio < next {
            cands.push(Candidate {
                lo: *ratio,
                hi: next,
                ..outright(g + 1)
            });
        }
    }
    if k == 0 || groups[k - 1].0 < 1.0 {
        cands.push(Candidate {
            kind: Kind::Point,
            lo: 1.0,
            hi: 1.0,
            ..outright(k)
        });
    }

    let best = cands
        .iter()
        .filter(|c| c.feasible)
        .map(|c| c.utility)
        .fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-9 * best.abs().max(1.0);
    let optimal = |c: &Candidate| c.feasible && c.utility >= best - slack;

    let order: Vec<usize> = match tie {
        TieBreak::High => (0..cands.len()).rev().collect(),
        TieBreak::Low => (0..cands.len()).collect(),
    };
    let mut pick = *order
        .iter()
        .find(|&&c| optimal(&cands[c]))
        .expect("alpha = 0 is always feasible");
    if cands[pick].kind == Kind::Point && cands[pick].fragile {
        let neighbour = match tie {
            TieBreak::High => pick.checked_sub(1),
            TieBreak::Low => Some(pick + 1).filter(|&c| c < cands.len()),
        };
        if let Some(nb) = neighbour {
            if cands[nb].kind == Kind::Interval && optimal(&cands[nb]) {
                pick = nb;
            }
        }
    }
    let chosen = &cands[pick];
    let alpha = match (chosen.kind, tie) {
        (Kind::Point, _) => chosen.lo,
        (Kind::Interval, TieBreak::High) => {
            (chosen.hi - tol.eps_tie).max(0.5 * (chosen.lo + chosen.hi))
        }
        (Kind::Interval, TieBreak::Low) => {
            (chosen.lo + tol.eps_tie).min(0.5 * (chosen.lo + chosen.hi))
        }
    };

    let mut fractions = vec![0.0; m];
    let mut spend = 0.0;
    for (_, members) in &groups[..chosen.strict_groups] {
        for it in members {
            fractions[it.good] = 1.0;
            spend += it.price;
        }
    }
    if let Some(g) = chosen.tie_group {
        let refs: Vec<&Item> = groups[g].1.iter().collect();
        let (takes, _, paid, _) = fill_ties(&refs, (budget - spend).max(0.0));
        for (good, f) in takes {
            fractions[good] = f;
        }
        spend += paid;
    }
    Ok(BestResponse {
        alpha,
        fractions,
        utility: chosen.utility,
        spend,
        budget_binding: spend >= budget - tol.eps_feas,
    })
}

/// Utility of playing `alpha` against fixed rival bids.
///
/// Bids within `eps_tie` of the top rival bid count as ties and are filled
/// within the remaining budget. Outright wins that exceed the budget are
/// reported through `over_budget` and `overspend`.
pub fn evaluate_response(
    inst: &PacingInstance,
    bidder: usize,
    rival_bids: &[Vec<f64>],
    alpha: f64,
    tol: &Tolerance,
) -> Result<ResponseEval> {
    check_inputs(inst, bidder, rival_bids)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "alpha {alpha} outside [0, 1]"
        )));
    }
    let budget = inst.budget(bidder);
    let tops = rival_top_bids(rival_bids, bidder);
    let mut fractions = vec![0.0; inst.m()];
    let (mut spend, mut utility) = (0.0, 0.0);
    let mut tied = Vec::new();
    for (j, &c) in tops.iter().enumerate() {
        let v = inst.value(bidder, j);
        if v <= 0.0 {
            continue;
        }
        let bid = alpha * v;
        if bid > c + tol.eps_tie {
            fractions[j] = 1.0;
            spend += c;
            utility += v - c;
        } else if bid >= c - tol.eps_tie {
            tied.push(Item {
                good: j,
                value: v,
                price: c,
            });
        }
    }
    let overspend = (spend - budget).max(0.0);
    let refs: Vec<&Item> = tied.iter().collect();
    let (takes, gain, paid, _) = fill_ties(&refs, (budget - spend).max(0.0));
    for (good, f) in takes {
        fractions[good] = f;
    }
    spend += paid;
    utility += gain;
    Ok(ResponseEval {
        utility,
        spend,
        fractions,
        over_budget: overspend > tol.eps_feas,
        overspend,
        budget_binding: spend >= budget - tol.eps_feas,
    })
}
