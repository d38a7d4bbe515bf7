//! Shrinks an instance by clustering its goods with k-means.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::PacingInstance;

const MAX_ITERS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// One good per cluster, valued at the sum of its members' values.
    pub instance: PacingInstance,
    /// Cluster of each original good. Clusters are numbered by first member.
    pub assignment: Vec<usize>,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Runs k-means on the goods, each described by its column of bidder values,
/// and merges every cluster into a single good. Budgets are copied unchanged.
pub fn compress_by_clustering(inst: &PacingInstance, k: usize, seed: u64) -> Result<Clustering> {
    let (n, m) = (inst.n(), inst.m());
    if k == 0 || k > m {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must be in 1..={m}"
        )));
    }
    let points: Vec<Vec<f64>> = (0..m)
        .map(|j| (0..n).map(|i| inst.value(i, j)).collect())
        .collect();
    let mut rng = super::rng(seed);

    // k-means++ seeding.
    let mut centers: Vec<Vec<f64>> = vec![points[rng.random_range(0..m)].clone()];
    let mut chosen = vec![false; m];
    while centers.len() < k {
        let d: Vec<f64> = points
            .iter()
            .map(|p| {
                centers
                    .iter()
                    .map(|c| dist2(p, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d.iter().sum();
        let pick = if total > 0.0 {
            let mut t = rng.random::<f64>() * total;
            let mut idx = m - 1;
            for (j, &dj) in d.iter().enumerate() {
                if dj > 0.0 && t < dj {
                    idx = j;
                    break;
                }
                t -= dj;
            }
            if d[idx] == 0.0 {
                idx = (0..m)
                    .rev()
                    .find(|&j| d[j] > 0.0)
                    .expect("total is positive");
            }
            idx
        } else {
            // All remaining points coincide with centers; take any unused one.
            let free: Vec<usize> = (0..m).filter(|&j| !chosen[j]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        centers.push(points[pick].clone());
    }

    let mut labels = vec![usize::MAX; m];
    for _ in 0..MAX_ITERS {
        let mut changed = false;
        for (j, p) in points.iter().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| dist2(p, &centers[a]).total_cmp(&dist2(p, &centers[b])))
                .expect("k >= 1");
            if labels[j] != best {
                labels[j] = best;
                changed = true;
            }
        }
        let mut sums = vec![vec![0.0; n]; k];
        let mut counts = vec![0usize; k];
        for (j, p) in points.iter().enumerate() {
            counts[labels[j]] += 1;
            for (s, x) in sums[labels[j]].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Reseed from the point farthest from its own center.
                let far = (0..m)
                    .max_by(|&a, &b| {
                        dist2(&points[a], &centers[labels[a]])
                            .total_cmp(&dist2(&points[b], &centers[labels[b]]))
                    })
                    .expect("m >= 1");
                centers[c] = points[far].clone();
                labels[far] = c;
                changed = true;
            } else {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        if !changed {
            break;
        }
    }

    // Renumber clusters by first member and drop any left empty.
    let mut renumber = vec![usize::MAX; k];
    let mut next = 0;
    for l in labels.iter_mut() {
        if renumber[*l] == usize::MAX {
            renumber[*l] = next;
            next += 1;
        }
        *l = renumber[*l];
    }
    let mut values = vec![vec![0.0; next]; n];
    for (j, &c) in labels.iter().enumerate() {
        for (i, row) in values.iter_mut().enumerate() {
            row[c] += inst.value(i, j);
        }
    }
    Ok(Clustering {
        instance: PacingInstance::new(values, inst.budgets().to_vec())?,
        assignment: labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PacingInstance {
        PacingInstance::new(
            vec![
                vec![0.1, 0.9, 0.12, 0.88, 0.5],
                vec![0.2, 0.1, 0.21, 0.12, 0.5],
            ],
            vec![1.0, 2.0],
        )
        .unwrap()
    }

    #[test]
    fn one_cluster_sums_rows() {
        let c = compress_by_clustering(&sample(), 1, 0).unwrap();
        assert_eq!(c.instance.m(), 1);
        assert!((c.instance.value(0, 0) - 2.5).abs() < 1e-12);
        assert!((c.instance.value(1, 0) - 1.13).abs() < 1e-12);
        assert_eq!(c.assignment, vec![0; 5]);
    }

    #[test]
    fn k_equals_m_keeps_goods() {
        let c = compress_by_clustering(&sample(), 5, 3).unwrap();
        let mut seen = c.assignment.clone();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2, 3, 4]);
        for j in 0..5 {
            for i in 0..2 {
                assert_eq!(c.instance.value(i, c.assignment[j]), sample().value(i, j));
            }
        }
    }

    #[test]
    fn rejects_bad_k() {
        assert!(compress_by_clustering(&sample(), 0, 0).is_err());
        assert!(compress_by_clustering(&sample(), 6, 0).is_err());
    }
}
