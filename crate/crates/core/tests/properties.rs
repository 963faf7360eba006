use ilw_limits::evolution::{step_ifrk4, Solver, SolverConfig};
use ilw_limits::resonance::{check_res1, omega, FrequencyTuple};
use ilw_limits::spectral::{dyadic_blocks, random_hs_field, regularize_envelope, FrequencyEnvelope, Grid, SpectralField};
use ilw_limits::symbols::{k_delta, q_delta, ComparisonConstants, DepthParam, EquationSpec, Regime, SymbolTable};
use proptest::prelude::*;

fn modes() -> impl Strategy<Value = usize> {
    (3u32..=8).prop_map(|j| 1usize << j)
}

fn samples() -> impl Strategy<Value = Vec<f64>> {
    modes().prop_flat_map(|m| prop::collection::vec(-1e3f64..1e3, m))
}

fn random_field(m: usize, s: f64, seed: u64) -> SpectralField {
    let grid = Grid::torus(m).unwrap();
    let mean = SpectralField::from_fn(grid, |_| 0.3);
    random_hs_field(&grid, s, 1.0, seed).add_scaled(1.0, &mean).unwrap()
}

fn family(index: usize, k: u32) -> EquationSpec {
    match index {
        0 => EquationSpec::gilw_deep(k, 4.0),
        1 => EquationSpec::gilw(k, 0.7),
        2 => EquationSpec::gbo(k),
        3 => EquationSpec::scaled_gilw(k, 0.3),
        _ => EquationSpec::gkdv(k),
    }
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_round_trip(x in samples()) {
        let grid = Grid::torus(x.len()).unwrap();
        let back = grid.to_physical(&grid.to_spectral(&x).unwrap()).unwrap();
        let scale = x.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn parseval(x in samples()) {
        let grid = Grid::torus(x.len()).unwrap();
        let u = grid.to_spectral(&x).unwrap();
        let physical: f64 = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        let spectral = u.l2_norm().powi(2);
        prop_assert!((physical - spectral).abs() <= 1e-12 * physical.max(1e-300));
    }

    #[test]
    fn dyadic_partition_of_unity(m in modes(), seed in any::<u64>()) {
        let u = random_field(m, 0.0, seed);
        let mut sum = SpectralField::zeros(*u.grid());
        for n in dyadic_blocks(u.grid()) {
            sum = sum.add_scaled(1.0, &u.project_dyadic(n)).unwrap();
        }
        let gap = sum.sub(&u).unwrap().l2_norm();
        prop_assert!(gap <= 1e-14 * u.l2_norm(), "gap {gap}");
    }

    #[test]
    fn sharp_projection_contracts(m in modes(), seed in any::<u64>(), k in 0.0f64..140.0, s in -2.0f64..3.0) {
        let u = random_field(m, 0.5, seed);
        prop_assert!(u.project_leq(k).sobolev_norm(s) <= u.sobolev_norm(s));
    }

    #[test]
    fn regularized_envelope_is_valid_minorant(
        steps in prop::collection::vec(1.0f64..3.0, 1..8),
        kappa_prime in 1.01f64..3.0,
    ) {
        let mut weights = vec![1.0];
        for r in &steps {
            let last = *weights.last().unwrap();
            weights.push(last * r);
        }
        let env = FrequencyEnvelope::new(weights, 3.0).unwrap();
        let reg = regularize_envelope(&env, kappa_prime).unwrap();
        prop_assert_eq!(reg.kappa(), kappa_prime);
        for (a, b) in reg.weights().iter().zip(env.weights()) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn k_sandwich_and_q_range(delta in 2.0f64..1e6, xi in -512i32..=512) {
        let xi = xi as f64;
        let k = k_delta(delta, xi).unwrap();
        // The inequality is exact; evaluation may land a few ulps outside it.
        let ulps = 4.0 * f64::EPSILON * xi.abs();
        prop_assert!((xi.abs() - 1.0 / delta).max(0.0) - ulps <= k && k <= xi.abs() + ulps);
        let q = q_delta(delta, xi).unwrap();
        prop_assert!((0.0..=2.0 / delta).contains(&q));
    }

    #[test]
    fn k_increases_with_depth(d1 in 1.0f64..1e3, factor in 1.01f64..10.0, xi in 1i32..=512) {
        let xi = xi as f64;
        prop_assert!(k_delta(d1, xi).unwrap() < k_delta(d1 * factor, xi).unwrap());
    }

    #[test]
    fn tabulated_symbols_are_odd(index in 0usize..5, m in modes()) {
        let grid = Grid::torus(m).unwrap();
        let table = SymbolTable::build(family(index, 2), grid).unwrap();
        for n in 0..=(m as i64 / 2 - 1) {
            prop_assert_eq!(table.p(-n), -table.p(n));
        }
    }

    #[test]
    fn omega_negation_and_permutation(
        a in -60i64..=60, b in -60i64..=60, c in -60i64..=60,
        delta in 2.0f64..100.0, rot in 0usize..4,
    ) {
        let mut entries = vec![a, b, c, -(a + b + c)];
        let depth = DepthParam::deep(delta).unwrap();
        let t = FrequencyTuple::new(entries.clone()).unwrap();
        let w = omega(Regime::Deep, depth, &t).unwrap();
        prop_assert_eq!(omega(Regime::Deep, depth, &t.negated()).unwrap(), -w);
        entries.rotate_left(rot);
        entries.swap(0, 1);
        let p = FrequencyTuple::new(entries).unwrap();
        let wp = omega(Regime::Deep, depth, &p).unwrap();
        prop_assert!((wp - w).abs() <= 1e-9 * w.abs().max(1.0));
    }

    #[test]
    fn deep_omega_approaches_bo(a in -60i64..=60, b in -60i64..=60, delta in 2.0f64..1e4) {
        let t = FrequencyTuple::new(vec![a, b, -(a + b)]).unwrap();
        let ilw = omega(Regime::Deep, DepthParam::deep(delta).unwrap(), &t).unwrap();
        let bo = omega(Regime::Deep, DepthParam::Infinite, &t).unwrap();
        let bound: f64 = t.entries().iter().map(|n| n.abs() as f64).sum::<f64>() * 2.0 / delta;
        prop_assert!((ilw - bo).abs() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn step_preserves_hermitian_structure(index in 0usize..5, k in 2u32..=3, seed in any::<u64>()) {
        let grid = Grid::torus(32).unwrap();
        let spec = family(index, k);
        let table = SymbolTable::build(spec, grid).unwrap();
        let u = random_field(32, 1.0, seed).scaled(0.3).without_nyquist();
        let next = step_ifrk4(&u, 1e-3, &table);
        prop_assert_eq!(next.coeffs()[0].im, 0.0);
        prop_assert_eq!(next.coeffs()[16].im, 0.0);
        // A real field must come back from the physical samples unchanged.
        let again = grid.to_spectral(&next.to_physical()).unwrap();
        prop_assert!(again.sub(&next).unwrap().l2_norm() <= 1e-13 * next.l2_norm().max(1e-300));
    }

    #[test]
    fn mean_is_conserved(index in 0usize..5, k in 2u32..=3, seed in any::<u64>()) {
        let grid = Grid::torus(32).unwrap();
        let u0 = random_field(32, 1.0, seed).scaled(0.3);
        let config = SolverConfig::new(family(index, k), grid, 0.05, &u0).unwrap();
        let traj = Solver::new(config).unwrap().evolve(&u0).unwrap();
        prop_assert!(traj.mean_drift() < 1e-14);
    }

    #[test]
    fn linear_flow_preserves_moduli(index in 0usize..5, seed in any::<u64>(), t in 0.01f64..1.0) {
        let grid = Grid::torus(64).unwrap();
        let u0 = random_field(64, 0.0, seed);
        let config = SolverConfig::new(family(index, 2), grid, t, &u0).unwrap().linear(true);
        let steps = config.steps() as f64;
        let traj = Solver::new(config).unwrap().evolve(&u0).unwrap();
        let start = traj.initial_state();
        let end = traj.final_state();
        let worst = start
            .coeffs()
            .iter()
            .zip(end.coeffs())
            .map(|(a, b)| (a.norm() - b.norm()).abs() / a.norm().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        prop_assert!(worst <= steps * 4.0 * f64::EPSILON, "worst {worst} over {steps} steps");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn min_ratio_non_increasing_in_cap(cap in 8u32..24, extra in 1u32..16, k in 1u32..=2) {
        let deltas = [DepthParam::deep(4.0).unwrap()];
        let c = ComparisonConstants::default();
        let small = check_res1(Regime::Deep, &deltas, k, cap, c).unwrap();
        let large = check_res1(Regime::Deep, &deltas, k, cap + extra, c).unwrap();
        if let (Some(a), Some(b)) = (small.min_ratio, large.min_ratio) {
            prop_assert!(b <= a);
        }
        prop_assert!(large.tuple_count >= small.tuple_count);
    }
}
