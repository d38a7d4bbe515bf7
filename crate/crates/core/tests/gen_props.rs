use pacing_core::gen::{
    calibrate_budgets, compress_by_clustering, gen_stylized, scale_instance, GenConfig,
    InstanceKind, ScaleConfig,
};
use pacing_core::mip::SolverConfig;
use pacing_core::PacingInstance;
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = InstanceKind> {
    prop::sample::select(InstanceKind::ALL.to_vec())
}

proptest! {
    #[test]
    fn generation_is_deterministic_and_in_range(kind in kind(), n in 1usize..6, m in 1usize..8, sigma in 0.0f64..0.5, seed in any::<u64>()) {
        let cfg = GenConfig::new(kind, n, m, seed).with_sigma(sigma);
        let a = gen_stylized(&cfg).unwrap();
        prop_assert_eq!(&a, &gen_stylized(&cfg).unwrap());
        prop_assert_eq!(&a, &PacingInstance::from_json(&a.to_json()).unwrap());
        for i in 0..n {
            let row = &a.values()[i];
            prop_assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert!(a.budget(i) >= 0.0 && a.budget(i) <= row.iter().sum::<f64>() / n as f64 + 1e-12);
            if kind == InstanceKind::Sampled {
                prop_assert!(row.iter().any(|&v| v > 0.0), "bidder {} wants nothing", i);
            }
        }
    }

    #[test]
    fn noiseless_correlated_columns_are_constant(n in 1usize..6, m in 1usize..8, seed in any::<u64>()) {
        let a = gen_stylized(&GenConfig::new(InstanceKind::Correlated, n, m, seed)).unwrap();
        for j in 0..m {
            prop_assert!((0..n).all(|i| a.value(i, j) == a.value(0, j)));
        }
    }

    #[test]
    fn noiseless_scaling_copies_every_good(n in 1usize..4, m in 1usize..5, factor in 1usize..20, seed in any::<u64>()) {
        let base = gen_stylized(&GenConfig::new(InstanceKind::Sampled, n, m, seed)).unwrap();
        let s = scale_instance(&base, &ScaleConfig { factor, noise_sigma: 0.0, seed }).unwrap();
        prop_assert_eq!(s.good_types.len(), factor * m);
        for (j, &t) in s.good_types.iter().enumerate() {
            prop_assert_eq!(t, j % m);
            prop_assert!((0..n).all(|i| s.instance.value(i, j) == base.value(i, t)));
        }
        for i in 0..n {
            prop_assert_eq!(s.instance.budget(i), base.budget(i) * factor as f64);
        }
        if factor == 1 {
            prop_assert_eq!(&s.instance, &base);
        }
    }

    #[test]
    fn clustering_preserves_each_bidders_total(n in 1usize..5, m in 1usize..10, k in 1usize..10, seed in any::<u64>()) {
        let k = k.min(m);
        let base = gen_stylized(&GenConfig::new(InstanceKind::Complete, n, m, seed)).unwrap();
        let c = compress_by_clustering(&base, k, seed).unwrap();
        prop_assert_eq!(c.instance.m(), k);
        prop_assert_eq!(c.instance.budgets(), base.budgets());
        for i in 0..n {
            let (a, b): (f64, f64) = (base.values()[i].iter().sum(), c.instance.values()[i].iter().sum());
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
        }
        for (j, &g) in c.assignment.iter().enumerate() {
            prop_assert!(g < k, "good {} in cluster {}", j, g);
        }
    }
}

#[test]
fn complete_values_average_one_half() {
    let inst = gen_stylized(&GenConfig::new(InstanceKind::Complete, 60, 60, 11)).unwrap();
    let vals: Vec<f64> = inst.values().iter().flatten().copied().collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    // Standard error is about 0.29 / 60.
    assert!((mean - 0.5).abs() < 0.03, "{mean}");
    // B_i ~ U[0, S_i / n] has mean S_i / (2n).
    let ratio: f64 = (0..60)
        .map(|i| inst.budget(i) / (inst.values()[i].iter().sum::<f64>() / 60.0))
        .sum::<f64>()
        / 60.0;
    assert!((ratio - 0.5).abs() < 0.12, "{ratio}");
}

#[test]
fn sampled_edges_are_fair_coins() {
    let inst = gen_stylized(&GenConfig::new(InstanceKind::Sampled, 40, 50, 5)).unwrap();
    let edges = inst.values().iter().flatten().filter(|&&v| v > 0.0).count();
    let share = edges as f64 / 2000.0;
    assert!((share - 0.5).abs() < 0.05, "{share}");
}

#[test]
fn clustering_recovers_planted_groups() {
    let mut values = vec![vec![0.0; 8]; 3];
    for j in 0..8 {
        let high = j % 2 == 0;
        for (i, row) in values.iter_mut().enumerate() {
            let centre = if high { 10.0 } else { 0.5 };
            row[j] = centre + 0.01 * (i + j) as f64;
        }
    }
    let inst = PacingInstance::new(values, vec![1.0; 3]).unwrap();
    let c = compress_by_clustering(&inst, 2, 4).unwrap();
    for j in 0..8 {
        assert_eq!(c.assignment[j], c.assignment[j % 2], "good {j}");
    }
    assert_ne!(c.assignment[0], c.assignment[1]);
}

#[test]
fn tiny_budgets_constrain_everyone() {
    let base = gen_stylized(&GenConfig::new(InstanceKind::Complete, 3, 4, 8)).unwrap();
    let tiny = base.scale_budgets(1e-3).unwrap();
    let c = calibrate_budgets(&tiny, 1.0, &SolverConfig::default()).unwrap();
    assert_eq!(c.constrained, 3);
    assert_eq!(c.scalar, 1.0);
}

#[test]
fn reference_constants() {
    use pacing_core::gen::{fixture, GadgetParams};
    assert_eq!(GadgetParams::new(4.0, 0.25, 0.0).unwrap().k2(), 6.0);
    assert_eq!(GadgetParams::new(1.0, 0.125, 0.125).unwrap().k2(), 3.0);
    let cycling = fixture("cycling").unwrap().instance;
    assert_eq!(cycling.values()[2], vec![50.0, 0.0, 0.0, 500.0, 10.0, 5.0]);
    assert_eq!(cycling.budgets(), &[60.0, 1300.0, f64::INFINITY]);
    let rg = fixture("revenue_gap").unwrap().instance;
    assert_eq!((rg.n(), rg.m()), (3, 4));
}
