//! Candidate outcomes around MIP equilibria: the equilibria themselves plus
//! perturbations of multipliers, prices, allocations and budgets.

use pacing_core::gen::{gen_stylized, rng, GenConfig, InstanceKind};
use pacing_core::mip::{solve_instance, Objective, SolverConfig};
use pacing_core::{PacingInstance, PacingOutcome};
use rand::Rng;

fn perturb<R: Rng>(
    inst: &PacingInstance,
    out: &PacingOutcome,
    r: &mut R,
) -> (PacingInstance, PacingOutcome) {
    let (n, m) = (inst.n(), inst.m());
    let mut inst = inst.clone();
    let mut out = out.clone();
    let delta = [1e-8, 1e-4, 0.05][r.random_range(0..3)];
    let sign = if r.random_bool(0.5) { 1.0 } else { -1.0 };
    let i = r.random_range(0..n);
    let j = r.random_range(0..m);
    match r.random_range(0..7) {
        0 => {}
        1 => out.alphas[i] = (out.alphas[i] * (1.0 + sign * delta)).clamp(0.0, 1.0),
        2 => out.prices[j] = (out.prices[j] + sign * delta).max(0.0),
        3 => {
            let k = (i + 1) % n;
            let moved = out.fractions[i][j].min(delta);
            out.fractions[i][j] -= moved;
            out.fractions[k][j] += moved;
        }
        4 => out.alphas[i] = 1.0,
        5 => out.fractions[i].iter_mut().for_each(|x| *x *= 1.0 - delta),
        _ => {
            let b = inst.budget(i);
            if b.is_finite() {
                inst = inst.with_budget(i, b * (1.0 + sign * delta)).unwrap();
            }
        }
    }
    (inst, out)
}

/// `count` seeded candidates. About a third are unmodified equilibria.
pub fn candidates(count: usize, seed: u64) -> Vec<(PacingInstance, PacingOutcome)> {
    let mut r = rng(seed);
    let solver = SolverConfig::default();
    let mut base = Vec::new();
    let mut k = 0u64;
    while base.len() < 40 {
        let kind = InstanceKind::ALL[k as usize % 3];
        let cfg = GenConfig::new(
            kind,
            2 + k as usize % 3,
            2 + (k as usize / 3) % 3,
            seed.wrapping_add(k),
        )
        .with_sigma(0.1);
        let inst = gen_stylized(&cfg).unwrap();
        let obj = Objective::ALL[k as usize % Objective::ALL.len()];
        let res = solve_instance(&inst, obj, &solver).unwrap();
        if let (true, Some(out)) = (res.verified, res.outcome) {
            base.push((inst, out));
        }
        k += 1;
    }
    (0..count)
        .map(|c| {
            let (inst, out) = &base[c % base.len()];
            if r.random_bool(1.0 / 3.0) {
                (inst.clone(), out.clone())
            } else {
                perturb(inst, out, &mut r)
            }
        })
        .collect()
}
