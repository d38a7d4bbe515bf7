#![allow(clippy::needless_range_loop)]

mod support;

use pacing_core::dynamics::{
    adaptive_pacing, br_dynamics, empirical_allocation, stability_check, update_multiplier,
    AdaptiveConfig, BrConfig, BrInit, DynamicsTrace,
};
use pacing_core::gen::{gen_stylized, scale_instance, GenConfig, InstanceKind, ScaleConfig};
use pacing_core::mip::{solve_instance, Objective, SolverConfig};
use pacing_core::{verify_equilibrium, PacingInstance, PacingOutcome, Tolerance};
use proptest::prelude::*;
use support::candidates::candidates;

fn instance() -> impl Strategy<Value = PacingInstance> {
    (1usize..=3, 1usize..=3).prop_flat_map(|(n, m)| {
        let value = prop_oneof![1 => Just(0.0), 3 => 0.1f64..5.0];
        let budget = prop_oneof![1 => Just(f64::INFINITY), 3 => 0.05f64..5.0];
        (
            proptest::collection::vec(proptest::collection::vec(value, m), n),
            proptest::collection::vec(budget, n),
        )
            .prop_map(|(v, b)| PacingInstance::new(v, b).unwrap())
    })
}

#[test]
fn stability_agrees_with_verifier_around_equilibria() {
    let tol = Tolerance::default();
    let cands = candidates(500, 77);
    let mut accepted = 0;
    for (k, (inst, out)) in cands.iter().enumerate() {
        let v = verify_equilibrium(inst, out, &tol).unwrap().is_accepted();
        let s = stability_check(inst, out, &tol);
        assert_eq!(v, s.stable, "candidate {k}: {s:?}");
        accepted += v as usize;
    }
    assert!(
        accepted > 100 && accepted < 400,
        "{accepted} of 500 accepted"
    );
}

#[test]
fn one_round_leaves_integral_equilibria_fixed() {
    let solver = SolverConfig::default();
    let mut checked = 0;
    for seed in 0..240u64 {
        let kind = InstanceKind::ALL[seed as usize % 3];
        let inst = gen_stylized(&GenConfig::new(
            kind,
            2 + seed as usize % 3,
            1 + seed as usize % 4,
            500 + seed,
        ))
        .unwrap();
        let res = solve_instance(&inst, Objective::ALL[seed as usize % 6], &solver).unwrap();
        let Some(out) = res.outcome.filter(|_| res.verified) else {
            continue;
        };
        if out
            .fractions
            .iter()
            .flatten()
            .any(|&x| x > 1e-9 && x < 1.0 - 1e-9)
        {
            continue;
        }
        let cfg = BrConfig {
            max_iters: 1,
            ..BrConfig::new(BrInit::Given(out.alphas.clone()))
        };
        let trace = br_dynamics(&inst, &cfg).unwrap();
        let after = &trace.records[1].alphas;
        let moved = after
            .iter()
            .zip(&out.alphas)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(
            moved <= Tolerance::default().eps_tie,
            "seed {seed}: {:?} -> {after:?}",
            out.alphas
        );
        checked += 1;
    }
    assert!(checked >= 10, "only {checked} integral equilibria");
}

fn check_conservation(
    scaled: &pacing_core::gen::ScaledInstance,
    cfg: &AdaptiveConfig,
    t: &DynamicsTrace,
) -> Result<(), TestCaseError> {
    let inst = &scaled.instance;
    let n = inst.n();
    let mut before = inst.budgets().to_vec();
    let mut paid = vec![0.0; n];
    for (j, r) in t.records.iter().enumerate() {
        prop_assert_eq!(r.goods.clone(), vec![j]);
        for i in 0..n {
            let expect = (inst.value(i, j) * r.alphas[i]).min(before[i]);
            prop_assert_eq!(r.bids[i][0], expect);
            prop_assert!(r.alphas[i] >= cfg.alpha_min && r.alphas[i] <= 1.0);
        }
        let top = r.bids.iter().map(|b| b[0]).fold(0.0, f64::max);
        match r.winners[0] {
            Some(w) => {
                prop_assert_eq!(r.bids[w][0], top);
                let other = (0..n)
                    .filter(|&k| k != w)
                    .map(|k| r.bids[k][0])
                    .fold(0.0, f64::max);
                prop_assert_eq!(r.prices[0], other);
                prop_assert_eq!(r.spends[w], r.prices[0]);
                prop_assert!((0..n).all(|k| k == w || r.spends[k] == 0.0));
            }
            None => {
                prop_assert_eq!(top, 0.0);
                prop_assert!(r.spends.iter().all(|&s| s == 0.0));
            }
        }
        for i in 0..n {
            paid[i] += r.spends[i];
            prop_assert!(r.remaining[i] <= before[i]);
            before[i] = r.remaining[i];
        }
    }
    let revenue: f64 = t.records.iter().map(|r| r.prices[0]).sum();
    prop_assert!((revenue - t.summary.revenue).abs() <= 1e-9 * (1.0 + revenue));
    for i in 0..n {
        prop_assert!(paid[i] <= inst.budget(i) * (1.0 + 1e-12));
        prop_assert!((paid[i] - t.summary.total_spend[i]).abs() <= 1e-9 * (1.0 + paid[i]));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn stability_agrees_with_verifier_on_arbitrary_profiles(
        inst in instance(),
        alphas in proptest::collection::vec(prop_oneof![Just(1.0), 0.0f64..=1.0], 3),
        shares in proptest::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.0f64..=1.0], 9),
        prices in proptest::collection::vec(0.0f64..3.0, 3),
    ) {
        let (n, m) = (inst.n(), inst.m());
        let fractions = (0..n).map(|i| shares[i * 3..i * 3 + m].to_vec()).collect();
        let out = PacingOutcome::new(alphas[..n].to_vec(), fractions, prices[..m].to_vec());
        let tol = Tolerance::default();
        prop_assert_eq!(verify_equilibrium(&inst, &out, &tol).unwrap().is_accepted(), stability_check(&inst, &out, &tol).stable);
    }

    #[test]
    fn adaptive_runs_conserve_money(
        inst in instance(),
        factor in 1usize..30,
        sigma in prop_oneof![Just(0.0), 0.0f64..0.3],
        step in prop_oneof![Just(0.0), 0.001f64..3.0],
        alpha_min in 0.01f64..0.5,
        init in proptest::collection::vec(0.0f64..=1.0, 3),
        seed in any::<u64>(),
    ) {
        let scaled = scale_instance(&inst, &ScaleConfig { factor, noise_sigma: sigma, seed }).unwrap();
        let init_alphas = init[..inst.n()].iter().map(|a| a.max(alpha_min)).collect();
        let cfg = AdaptiveConfig { init_alphas, alpha_min, step, seed };
        let t = adaptive_pacing(&scaled, &cfg).unwrap();
        check_conservation(&scaled, &cfg, &t)?;

        let shares = empirical_allocation(&scaled, &t).unwrap();
        for ty in 0..inst.m() {
            let sold = t.records.iter().any(|r| r.winners[0].is_some() && scaled.good_types[r.goods[0]] == ty);
            if sold {
                let total: f64 = shares.iter().map(|row| row[ty].unwrap()).sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
            } else {
                prop_assert!(shares.iter().all(|row| row[ty].is_none()));
            }
        }
        prop_assert_eq!(DynamicsTrace::from_json_lines(&t.to_json_lines()).unwrap(), t);
    }

    #[test]
    fn update_stays_within_bounds(
        alpha in 0.001f64..=1.0,
        step in 0.0f64..10.0,
        rate in 0.0f64..100.0,
        spend in 0.0f64..100.0,
        alpha_min in 0.001f64..=1.0,
    ) {
        let a = update_multiplier(alpha.max(alpha_min), step, rate, spend, alpha_min);
        prop_assert!(a >= alpha_min && a <= 1.0, "{a}");
        if spend > rate && step > 0.0 {
            prop_assert!(a <= alpha.max(alpha_min));
        }
    }

    #[test]
    fn best_response_traces_round_trip(inst in instance(), seed in any::<u64>()) {
        let cfg = BrConfig { max_iters: 6, seed, ..BrConfig::new(BrInit::Random { seed }) };
        let t = br_dynamics(&inst, &cfg).unwrap();
        prop_assert!(t.records.len() <= 7);
        prop_assert_eq!(t.records[0].step, 1);
        prop_assert_eq!(DynamicsTrace::from_json_lines(&t.to_json_lines()).unwrap(), t);
    }
}
