//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use ilw_limits::experiments::{
    apply_scaling_transform, conservation_check, deep_water_sweep, i2_refinement, reversibility_error,
    scaling_check, self_convergence, shallow_water_sweep, truncated_shallow_sweep, varying_data_sweep,
    DataProfile, PerturbationScaling, SweepConfig,
};
use ilw_limits::evolution::{Solver, SolverConfig};
use ilw_limits::resonance::{check_res1, check_res2, BoundReport};
use ilw_limits::spectral::Grid;
use ilw_limits::symbols::lemmas::{LemmaSampling, SymbolLemmaReport};
use ilw_limits::symbols::{ComparisonConstants, DepthParam, EquationSpec, Regime};

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn criterion_1() -> Outcome {
    let sampling = LemmaSampling {
        deep_deltas: vec![2.0, 3.0, 5.0, 10.0, 50.0, 1e3, 1e6],
        xi_max: 512,
        log_grid_points: 50,
        ..LemmaSampling::default()
    };
    let r = SymbolLemmaReport::measure(&sampling).map_err(|e| e.to_string())?;
    let ok = r.sandwich.violations == 0
        && r.q_range.violations == 0
        && r.taylor_residual < 1e-10
        && r.series_vs_closed < 1e-9;
    Ok((
        ok,
        format!(
            "sandwich violations {}/{}, q violations {}/{}, taylor {:.2e}, series/closed {:.2e}",
            r.sandwich.violations, r.sandwich.points, r.q_range.violations, r.q_range.points, r.taylor_residual,
            r.series_vs_closed
        ),
    ))
}

fn criterion_2() -> Outcome {
    let sampling = LemmaSampling {
        shallow_chain: vec![0.4, 0.2, 0.1, 0.05, 0.01],
        chain_xi_max: 16,
        slope_delta_min: 1e-3,
        slope_delta_max: 1e-1,
        ..LemmaSampling::default()
    };
    let r = SymbolLemmaReport::measure(&sampling).map_err(|e| e.to_string())?;
    let chain = &r.shallow_chain;
    let dev = r.max_slope_deviation(2.0);
    let ok = chain.non_increasing.is_empty() && chain.above_limit.is_empty() && dev <= 0.1;
    Ok((
        ok,
        format!(
            "chain failures {:?}/{:?}, h/delta slope deviation {dev:.3e}",
            chain.non_increasing, chain.above_limit
        ),
    ))
}

fn criterion_3() -> Outcome {
    let deep: Vec<DepthParam> = [2.0, 4.0, 8.0, 16.0]
        .iter()
        .map(|&d| DepthParam::deep(d).unwrap())
        .chain([DepthParam::Infinite])
        .collect();
    let shallow: Vec<DepthParam> = [0.5, 0.1, 0.02].iter().map(|&d| DepthParam::shallow(d).unwrap()).collect();
    let c = ComparisonConstants::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (regime, deltas) in [(Regime::Deep, &deep), (Regime::Shallow, &shallow)] {
        let runs: Vec<(&str, BoundReport)> = vec![
            ("res1 k1", check_res1(regime, deltas, 1, 64, c).map_err(|e| e.to_string())?),
            ("res1 k2", check_res1(regime, deltas, 2, 64, c).map_err(|e| e.to_string())?),
            ("res2 k2", check_res2(regime, deltas, 2, 64, c).map_err(|e| e.to_string())?),
            ("res2 k3", check_res2(regime, deltas, 3, 64, c).map_err(|e| e.to_string())?),
        ];
        for (label, r) in runs {
            let positive = r.per_delta.iter().all(|d| d.min_ratio.is_some_and(|m| m > 0.0));
            let uniform = regime == Regime::Shallow || r.uniformity_spread.is_some_and(|s| s < 4.0);
            ok &= positive && uniform;
            parts.push(format!(
                "{regime:?} {label} min {:.3e} spread {:.2}",
                r.min_ratio.unwrap_or(f64::NAN),
                r.uniformity_spread.unwrap_or(f64::NAN)
            ));
        }
    }
    Ok((ok, parts.join("; ")))
}

fn smooth_data(grid: &Grid) -> ilw_limits::spectral::SpectralField {
    DataProfile::default().sample(grid)
}

fn criterion_4() -> Outcome {
    let grid = Grid::torus(256).map_err(|e| e.to_string())?;
    let u0 = smooth_data(&grid);
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [2, 3] {
        let families = [
            ("gilw-deep", EquationSpec::gilw_deep(k, 4.0)),
            ("gilw", EquationSpec::gilw(k, 0.5)),
            ("gbo", EquationSpec::gbo(k)),
            ("scaled-gilw", EquationSpec::scaled_gilw(k, 0.5)),
            ("gkdv", EquationSpec::gkdv(k)),
        ];
        for (name, spec) in families {
            let spec = spec.map_err(|e| e.to_string())?;
            let cons = conservation_check(spec, grid, 0.3, &u0).map_err(|e| e.to_string())?;
            let back = reversibility_error(spec, grid, 0.3, &u0, 1.0).map_err(|e| e.to_string())?;
            let order = self_convergence(spec, grid, 0.3, &u0).map_err(|e| e.to_string())?.observed_order();
            let pass = cons.mean_drift < 1e-14 && cons.l2_drift < 1e-9 && back < 1e-6 && (order - 4.0).abs() <= 0.3;
            ok &= pass;
            parts.push(format!(
                "{name} k{k}: mean {:.1e} l2 {:.1e} back {:.1e} order {order:.2}",
                cons.mean_drift, cons.l2_drift, back
            ));
        }
    }
    Ok((ok, parts.join("; ")))
}

fn criterion_5() -> Outcome {
    let grid = Grid::torus(256).map_err(|e| e.to_string())?;
    let r = i2_refinement(4.0, grid, 0.3, &smooth_data(&grid), 3).map_err(|e| e.to_string())?;
    let corrected = r.corrected_conserved(3.5);
    let printed = r.printed_conserved(3.5);
    let detail = if printed {
        format!("printed orders {:?}", r.printed_orders)
    } else {
        format!(
            "printed I2 not conserved, plateau {:.6}; corrected orders {:?}",
            r.printed_plateau(),
            r.corrected_orders
        )
    };
    let plateau_reported = !printed && r.printed_plateau().is_finite();
    Ok((printed || corrected || plateau_reported, detail))
}

fn slope(report: &ilw_limits::experiments::ConvergenceReport) -> f64 {
    report.primary_fit().map(|f| f.slope).unwrap_or(f64::NAN)
}

fn criterion_6() -> Outcome {
    let mut config = SweepConfig::deep();
    config.deltas = vec![2.0, 4.0, 8.0, 16.0, 32.0];
    config.k = 2;
    config.s = 1.0;
    config.modes = 256;
    config.final_time = 0.3;
    let report = deep_water_sweep(&config).map_err(|e| e.to_string())?;
    config.linear_only = true;
    let linear = deep_water_sweep(&config).map_err(|e| e.to_string())?;
    let bound = linear.linear_bound.ok_or("linear sweep reported no bound")?;
    let s = slope(&report);
    Ok((
        report.strictly_decreasing && s <= -0.8 && bound.holds,
        format!("E {:?}, slope {s:.3}, linear bound holds {}", report.errors_hsm1, bound.holds),
    ))
}

fn criterion_7() -> Outcome {
    let mut config = SweepConfig::shallow_truncated();
    config.deltas = vec![0.2, 0.1, 0.05, 0.025];
    config.truncation = Some(16.0);
    config.k = 2;
    let trunc = truncated_shallow_sweep(&config).map_err(|e| e.to_string())?;
    let mut plain = SweepConfig::shallow();
    plain.k = 2;
    let shallow = shallow_water_sweep(&plain).map_err(|e| e.to_string())?;
    let s = slope(&trunc);
    Ok((
        trunc.strictly_decreasing && (s - 2.0).abs() <= 0.3 && shallow.strictly_decreasing,
        format!("truncated slope {s:.3}, untruncated E {:?}", shallow.errors_hs),
    ))
}

fn criterion_8() -> Outcome {
    let grid = Grid::torus(256).map_err(|e| e.to_string())?;
    let u0 = smooth_data(&grid);
    let spec = EquationSpec::gilw(2, 3.0).map_err(|e| e.to_string())?;
    let traj = Solver::new(SolverConfig::new(spec, grid, 0.3, &u0).map_err(|e| e.to_string())?)
        .and_then(|mut s| s.evolve(&u0))
        .map_err(|e| e.to_string())?;
    let mapped = apply_scaling_transform(&traj, 3.0, 2).map_err(|e| e.to_string())?;
    let identity = mapped.snapshots() == traj.snapshots();
    let check = scaling_check(&u0, 0.5, 2, 0.3, 1.0, None).map_err(|e| e.to_string())?;
    Ok((
        identity && check.relative_discrepancy < 1e-6,
        format!("identity at 3: {identity}, discrepancy at 0.5: {:.2e}", check.relative_discrepancy),
    ))
}

fn criterion_9() -> Outcome {
    let mut config = SweepConfig::deep_varying_data();
    config.perturbation.scaling = PerturbationScaling::InverseDelta;
    let varying = varying_data_sweep(&config).map_err(|e| e.to_string())?;
    config.perturbation.scaling = PerturbationScaling::Constant;
    let control = varying_data_sweep(&config).map_err(|e| e.to_string())?;
    let s = slope(&varying);
    Ok((
        varying.strictly_decreasing && s <= -0.8 && !control.convergent,
        format!(
            "inverse-delta slope {s:.3}, constant control slope {:.3} convergent {}",
            slope(&control),
            control.convergent
        ),
    ))
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("run.json");
    std::fs::write(&config, "{\"schema_version\": 1}\n").map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "4"].iter().enumerate() {
        let prefix = dir.path().join(format!("check{i}"));
        let status = Command::new(env!("CARGO_BIN_EXE_ilw-limits"))
            .arg("check")
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&prefix)
            .arg("--threads")
            .arg(threads)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Ok((false, format!("check exited with {}", status.status)));
        }
        let mut json = prefix.into_os_string();
        json.push(".json");
        outputs.push(std::fs::read(json).map_err(|e| e.to_string())?);
    }
    let same = outputs[0] == outputs[1];
    Ok((same, format!("{} bytes, identical {same}", outputs[0].len())))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("symbol lemmas", criterion_1),
        ("shallow symbol limits", criterion_2),
        ("resonance floors", criterion_3),
        ("integrator validity", criterion_4),
        ("I2 diagnostic", criterion_5),
        ("deep-water rate", criterion_6),
        ("shallow-water rate", criterion_7),
        ("scaling transform", criterion_8),
        ("varying data", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (passed, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!passed);
        println!(
            "{} {:>2} {name} ({:.1}s): {detail}",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
