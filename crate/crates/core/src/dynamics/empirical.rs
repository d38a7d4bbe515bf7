use super::DynamicsTrace;
use crate::error::{Error, Result};
use crate::gen::ScaledInstance;

/// Share of the copies of each original good won by each bidder.
///
/// Entry `[i][t]` is the number of type-`t` auctions bidder `i` won divided
/// by the number of type-`t` auctions sold; `None` when none were sold.
pub fn empirical_allocation(
    scaled: &ScaledInstance,
    trace: &DynamicsTrace,
) -> Result<Vec<Vec<Option<f64>>>> {
    let n = scaled.instance.n();
    let types = scaled.good_types.iter().max().map_or(0, |t| t + 1);
    let mut wins = vec![vec![0usize; types]; n];
    let mut sold = vec![0usize; types];
    for r in &trace.records {
        for (k, &j) in r.goods.iter().enumerate() {
            let t = *scaled.good_types.get(j).ok_or_else(|| {
                Error::Dimension(format!("auction {j} is not part of the scaled instance"))
            })?;
            if let Some(w) = r.winners[k] {
                wins[w][t] += 1;
                sold[t] += 1;
            }
        }
    }
    Ok(wins
        .iter()
        .map(|row| {
            row.iter()
                .zip(&sold)
                .map(|(&w, &s)| (s > 0).then(|| w as f64 / s as f64))
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{adaptive_pacing, AdaptiveConfig};
    use crate::gen::{scale_instance, ScaleConfig};
    use crate::market::PacingInstance;

    #[test]
    fn sole_bidder_takes_every_copy() {
        let base =
            PacingInstance::new(vec![vec![1.0, 0.0], vec![0.0, 0.0]], vec![10.0, 10.0]).unwrap();
        let s = scale_instance(
            &base,
            &ScaleConfig {
                factor: 4,
                noise_sigma: 0.0,
                seed: 0,
            },
        )
        .unwrap();
        let cfg = AdaptiveConfig {
            init_alphas: vec![1.0, 1.0],
            alpha_min: 0.1,
            step: 0.1,
            seed: 0,
        };
        let t = adaptive_pacing(&s, &cfg).unwrap();
        let f = empirical_allocation(&s, &t).unwrap();
        assert_eq!(f[0][0], Some(1.0));
        assert_eq!(f[1][0], Some(0.0));
        assert_eq!((f[0][1], f[1][1]), (None, None));
    }
}
