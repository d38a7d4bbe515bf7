//! Hand-built instances with known equilibria.
//!
//! Bidders and goods are 0-indexed here. Budgets of `f64::INFINITY` are
//! unlimited.

use crate::market::{CompetitiveOutcome, PacingInstance, PacingOutcome};

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: &'static str,
    pub instance: PacingInstance,
    /// Known pacing equilibria.
    pub equilibria: Vec<PacingOutcome>,
    /// A known competitive equilibrium, if the example has one.
    pub competitive: Option<CompetitiveOutcome>,
}

const INF: f64 = f64::INFINITY;

pub fn fixture_names() -> &'static [&'static str] {
    &[
        "revenue_gap",
        "welfare_gap",
        "paced_welfare_gap",
        "misreporting",
        "ce_lower_rev",
        "cycling",
        "single_bidder",
    ]
}

fn inst(values: Vec<Vec<f64>>, budgets: Vec<f64>) -> PacingInstance {
    PacingInstance::new(values, budgets).expect("fixture data is valid")
}

/// Looks up a fixture by name.
///
/// ```
/// let f = pacing_core::gen::fixture("revenue_gap").unwrap();
/// assert_eq!((f.instance.n(), f.instance.m()), (3, 4));
/// assert_eq!(f.equilibria.len(), 2);
/// ```
pub fn fixture(name: &str) -> Option<Fixture> {
    let (name, instance, equilibria, competitive) = match name {
        // Two equilibria with revenues 102 and 3.
        "revenue_gap" => (
            "revenue_gap",
            inst(
                vec![
                    vec![100.0, 1.0, 99.0, 100.0],
                    vec![1.0, 100.0, 99.0, 0.0],
                    vec![0.0, 0.0, 0.0, 100.0],
                ],
                vec![1.0, 1.0, 100.0],
            ),
            vec![
                PacingOutcome::new(
                    vec![1.0, 0.01, 1.0],
                    vec![
                        vec![1.0, 0.0, 1.0, 0.0],
                        vec![0.0, 1.0, 0.0, 0.0],
                        vec![0.0, 0.0, 0.0, 1.0],
                    ],
                    vec![0.01, 1.0, 0.99, 100.0],
                ),
                PacingOutcome::new(
                    vec![0.01, 1.0, 1.0],
                    vec![
                        vec![1.0, 0.0, 0.0, 0.0],
                        vec![0.0, 1.0, 1.0, 0.0],
                        vec![0.0, 0.0, 0.0, 1.0],
                    ],
                    vec![1.0, 0.01, 0.99, 1.0],
                ),
            ],
            None,
        ),
        // Two equilibria with social welfare 10399 and 499.99.
        "welfare_gap" => (
            "welfare_gap",
            inst(
                vec![
                    vec![100.0, 2.0, 99.0, 0.01],
                    vec![1.0, 200.0, 99.0, 1.0],
                    vec![0.0, 0.0, 0.0, 10000.0],
                ],
                vec![1.0, 2.0, 0.01],
            ),
            vec![
                PacingOutcome::new(
                    vec![1.0, 0.01, 1.0],
                    vec![
                        vec![1.0, 0.0, 1.0, 0.0],
                        vec![0.0, 1.0, 0.0, 0.0],
                        vec![0.0, 0.0, 0.0, 1.0],
                    ],
                    vec![0.01, 2.0, 0.99, 0.01],
                ),
                PacingOutcome::new(
                    vec![0.01, 1.0, 0.0001],
                    vec![
                        vec![1.0, 0.0, 0.0, 0.0],
                        vec![0.0, 1.0, 1.0, 0.99],
                        vec![0.0, 0.0, 0.0, 0.01],
                    ],
                    vec![1.0, 0.02, 0.99, 1.0],
                ),
            ],
            None,
        ),
        // Two equilibria with paced welfare 10200 and 300.
        "paced_welfare_gap" => (
            "paced_welfare_gap",
            inst(
                vec![vec![100.0, 1.0, 99.0, 10000.0], vec![1.0, 100.0, 99.0, 0.0]],
                vec![1.0, 1.0],
            ),
            vec![
                PacingOutcome::new(
                    vec![1.0, 0.01],
                    vec![vec![1.0, 0.0, 1.0, 1.0], vec![0.0, 1.0, 0.0, 0.0]],
                    vec![0.01, 1.0, 0.99, 0.0],
                ),
                PacingOutcome::new(
                    vec![0.01, 1.0],
                    vec![vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 1.0, 1.0, 0.0]],
                    vec![1.0, 0.01, 0.99, 0.0],
                ),
            ],
            None,
        ),
        // Bidder 1 gains by overstating its value for good 0.
        "misreporting" => (
            "misreporting",
            inst(vec![vec![100.0, 100.0], vec![0.98, 101.0]], vec![0.99, INF]),
            vec![PacingOutcome::new(
                vec![1.0, 1.0],
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                vec![0.98, 100.0],
            )],
            None,
        ),
        // A competitive equilibrium with revenue 11 + 10 + 1 = 22.
        "ce_lower_rev" => (
            "ce_lower_rev",
            inst(
                vec![
                    vec![101.0, 0.0, 0.0],
                    vec![100.0, 200.0, 10.0],
                    vec![0.0, 0.0, 1.0],
                ],
                vec![INF, 10.1, INF],
            ),
            vec![],
            Some(CompetitiveOutcome {
                prices: vec![11.0, 10.0, 1.0],
                fractions: vec![
                    vec![1.0, 0.0, 0.0],
                    vec![0.0, 1.0, 0.1],
                    vec![0.0, 0.0, 0.9],
                ],
            }),
        ),
        // Best responses from all-ones cycle back to all-ones.
        "cycling" => (
            "cycling",
            inst(
                vec![
                    vec![100.0, 1300.0, 123.0, 0.0, 11.0, 0.0],
                    vec![0.0, 6503.0, 300.6, 501.0, 0.0, 25.0],
                    vec![50.0, 0.0, 0.0, 500.0, 10.0, 5.0],
                ],
                vec![60.0, 1300.0, INF],
            ),
            vec![],
            None,
        ),
        "single_bidder" => (
            "single_bidder",
            inst(vec![vec![1.0]], vec![1.0]),
            vec![PacingOutcome::new(vec![1.0], vec![vec![1.0]], vec![0.0])],
            None,
        ),
        _ => return None,
    };
    Some(Fixture {
        name,
        instance,
        equilibria,
        competitive,
    })
}

/// All fixtures in [`fixture_names`] order.
pub fn all_fixtures() -> Vec<Fixture> {
    fixture_names()
        .iter()
        .map(|n| fixture(n).expect("listed fixture exists"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves() {
        assert_eq!(all_fixtures().len(), fixture_names().len());
        assert!(fixture("nope").is_none());
    }

    #[test]
    fn stated_outcomes_verify() {
        use crate::market::{verify_competitive, verify_equilibrium, Tolerance};
        let tol = Tolerance::default();
        for f in all_fixtures() {
            for (k, eq) in f.equilibria.iter().enumerate() {
                let v = verify_equilibrium(&f.instance, eq, &tol).unwrap();
                assert!(v.is_accepted(), "{} #{k}: {:?}", f.name, v.violations);
            }
            if let Some(ce) = &f.competitive {
                assert!(
                    verify_competitive(&f.instance, ce, &tol)
                        .unwrap()
                        .is_accepted(),
                    "{}",
                    f.name
                );
            }
        }
    }
}
