use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::experiments::{
    apply_scaling_transform, conservation_check, i2_refinement, reversibility_error, run_sweep, scaling_check,
    self_convergence, PerturbationScaling, SweepKind,
};
use crate::evolution::{Solver, SolverConfig};
use crate::resonance::{check_bound, Verdict};
use crate::symbols::lemmas::SymbolLemmaReport;
use crate::symbols::{EquationSpec, Regime};

use super::config::RunConfig;
use super::run::Failure;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckItem {
    pub name: String,
    /// A failed hard item makes `check` exit nonzero.
    pub hard: bool,
    pub passed: bool,
    pub measured: Value,
    pub threshold: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub status: &'static str,
    pub hard_failed: usize,
    pub soft_failed: usize,
    pub items: Vec<CheckItem>,
}

impl CheckSummary {
    fn new(items: Vec<CheckItem>) -> Self {
        let hard_failed = items.iter().filter(|i| i.hard && !i.passed).count();
        let soft_failed = items.iter().filter(|i| !i.hard && !i.passed).count();
        Self {
            status: if hard_failed == 0 { "pass" } else { "fail" },
            hard_failed,
            soft_failed,
            items,
        }
    }

    pub fn item(&self, name: &str) -> Option<&CheckItem> {
        self.items.iter().find(|i| i.name == name)
    }

    pub fn hard_failures(&self) -> Vec<Failure> {
        self.items
            .iter()
            .filter(|i| i.hard && !i.passed)
            .map(|i| Failure {
                path: i.name.clone(),
                message: format!("measured {} against {}", i.measured, i.threshold),
            })
            .collect()
    }
}

struct Items(Vec<CheckItem>);

impl Items {
    fn hard(&mut self, name: impl Into<String>, passed: bool, measured: Value, threshold: impl Into<String>) {
        self.0.push(CheckItem {
            name: name.into(),
            hard: true,
            passed,
            measured,
            threshold: threshold.into(),
            note: None,
        });
    }

    fn soft(&mut self, name: impl Into<String>, passed: bool, measured: Value, threshold: impl Into<String>, note: Option<String>) {
        self.0.push(CheckItem {
            name: name.into(),
            hard: false,
            passed,
            measured,
            threshold: threshold.into(),
            note,
        });
    }
}

fn symbol_items(items: &mut Items, config: &RunConfig) -> Result<()> {
    let tol = &config.check.tolerances;
    let r = SymbolLemmaReport::measure(&config.symbols.sampling)?;
    items.hard(
        "symbols.sandwich",
        r.sandwich.violations == 0,
        json!({ "points": r.sandwich.points, "violations": r.sandwich.violations }),
        "0 violations",
    );
    items.hard(
        "symbols.q_range",
        r.q_range.violations == 0,
        json!({ "points": r.q_range.points, "violations": r.q_range.violations, "min": r.q_range.min, "max_scaled": r.q_range.max_scaled }),
        "0 violations",
    );
    items.hard(
        "symbols.taylor_residual",
        r.taylor_residual < tol.taylor_residual,
        json!(r.taylor_residual),
        format!("< {:e}", tol.taylor_residual),
    );
    items.hard(
        "symbols.series_vs_closed",
        r.series_vs_closed < tol.series_vs_closed,
        json!(r.series_vs_closed),
        format!("< {:e}", tol.series_vs_closed),
    );
    items.hard(
        "symbols.shallow_chain",
        r.shallow_chain.non_increasing.is_empty() && r.shallow_chain.above_limit.is_empty(),
        json!(r.shallow_chain),
        "L strictly increasing and below xi^2 at every frequency",
    );
    let dev = r.max_slope_deviation(tol.h_slope_target);
    items.hard(
        "symbols.h_over_delta_slope",
        dev <= tol.h_slope_band,
        json!({ "max_deviation": dev, "slopes": r.h_over_delta_slopes }),
        format!("{} +- {}", tol.h_slope_target, tol.h_slope_band),
    );
    Ok(())
}

fn resonance_items(items: &mut Items, config: &RunConfig) -> Result<()> {
    let tol = &config.check.tolerances;
    for q in &config.resonance.queries {
        let r = check_bound(q)?;
        let name = format!(
            "resonance.{}.{}.k{}",
            serde_json::to_value(q.lemma)?.as_str().unwrap_or("?"),
            serde_json::to_value(q.regime)?.as_str().unwrap_or("?"),
            q.k
        );
        let positive = r.per_delta.iter().all(|d| d.min_ratio.is_some_and(|m| m > 0.0));
        items.hard(
            format!("{name}.floor"),
            positive && r.verdict == Verdict::Pass,
            json!({ "min_ratio": r.min_ratio, "verdict": r.verdict, "tuples": r.tuple_count }),
            format!("min ratio > 0 at every delta and >= floor {}", q.constants.floor),
        );
        if q.regime == Regime::Deep {
            items.hard(
                format!("{name}.uniformity"),
                r.uniformity_spread.is_some_and(|s| s < tol.deep_uniformity),
                json!(r.uniformity_spread),
                format!("< {}", tol.deep_uniformity),
            );
        }
    }
    Ok(())
}

fn integrator_items(items: &mut Items, config: &RunConfig) -> Result<()> {
    let c = &config.check;
    let tol = &c.tolerances;
    let grid = c.grid.to_grid()?;
    let mut profile = c.data.clone();
    profile.seed = config.seed;
    let u0 = profile.sample(&grid);
    for input in &c.equations {
        let spec = input.to_spec()?;
        let name = match input.depth {
            Some(d) => format!("integrator.{}.k{}.delta{}", input.family, input.k, d.delta),
            None => format!("integrator.{}.k{}", input.family, input.k),
        };
        let cons = conservation_check(spec, grid, c.final_time, &u0)?;
        items.hard(
            format!("{name}.mean_drift"),
            cons.mean_drift < tol.mean_drift,
            json!(cons.mean_drift),
            format!("< {:e}", tol.mean_drift),
        );
        items.hard(
            format!("{name}.l2_drift"),
            cons.l2_drift < tol.l2_drift,
            json!(cons.l2_drift),
            format!("< {:e}", tol.l2_drift),
        );
        let back = reversibility_error(spec, grid, c.final_time, &u0, c.s)?;
        items.hard(
            format!("{name}.reversibility"),
            back < tol.reversibility,
            json!(back),
            format!("< {:e}", tol.reversibility),
        );
        let sc = self_convergence(spec, grid, c.final_time, &u0)?;
        let order = sc.observed_order();
        items.hard(
            format!("{name}.order"),
            (order - tol.order_target).abs() <= tol.order_band,
            json!({ "observed": order, "steps": sc.steps, "errors": sc.errors, "orders": sc.orders }),
            format!("{} +- {}", tol.order_target, tol.order_band),
        );
    }

    let i2 = i2_refinement(c.i2_delta, grid, c.final_time, &u0, c.i2_refinements)?;
    let printed_ok = i2.printed_conserved(tol.i2_order);
    items.soft(
        "integrator.i2.printed",
        printed_ok,
        json!({ "steps": i2.steps, "drift": i2.printed_drift, "orders": i2.printed_orders }),
        format!("order >= {}", tol.i2_order),
        (!printed_ok).then(|| {
            format!(
                "not conserved: drift plateaus at {:?} under step refinement",
                i2.printed_plateau()
            )
        }),
    );
    let corrected_ok = i2.corrected_conserved(tol.i2_order);
    items.soft(
        "integrator.i2.corrected",
        corrected_ok,
        json!({ "steps": i2.steps, "drift": i2.corrected_drift, "orders": i2.corrected_orders }),
        format!("order >= {}", tol.i2_order),
        None,
    );
    Ok(())
}

fn scaling_items(items: &mut Items, config: &RunConfig) -> Result<()> {
    let c = &config.check;
    let grid = c.grid.to_grid()?;
    let mut profile = c.data.clone();
    profile.seed = config.seed;
    let u0 = profile.sample(&grid);
    let spec = EquationSpec::gilw(2, 3.0)?;
    let traj = Solver::new(SolverConfig::new(spec, grid, c.final_time, &u0)?)?
        .evolve(&u0)?
        .healthy()?;
    let mapped = apply_scaling_transform(&traj, 3.0, 2)?;
    let identical = mapped.snapshots() == traj.snapshots();
    items.hard("scaling.identity_at_3", identical, json!(identical), "exact identity");
    let check = scaling_check(&u0, c.scaling_delta, 2, c.final_time, 1.0, None)?;
    items.hard(
        "scaling.direct_vs_transformed",
        check.relative_discrepancy < c.tolerances.scaling,
        json!(check),
        format!("< {:e} relative H^1", c.tolerances.scaling),
    );
    Ok(())
}

fn sweep_items(items: &mut Items, config: &RunConfig) -> Result<()> {
    let tol = &config.check.tolerances;
    let conv = &config.converge;
    let slope = |r: &crate::experiments::ConvergenceReport| r.primary_fit().map(|f| f.slope);

    let deep = run_sweep(&conv.seeded(SweepKind::Deep, config.seed))?;
    let s = slope(&deep);
    items.hard(
        "sweep.deep.rate",
        deep.strictly_decreasing && s.is_some_and(|s| s <= tol.deep_slope_max),
        json!({ "errors": deep.errors_hsm1, "slope": s, "constant": deep.fitted_constant }),
        format!("strictly decreasing, slope <= {}", tol.deep_slope_max),
    );
    let mut linear = conv.seeded(SweepKind::Deep, config.seed);
    linear.linear_only = true;
    let lin = run_sweep(&linear)?;
    let bound = lin.linear_bound.expect("linear deep sweep reports its bound");
    items.hard("sweep.deep.linear_bound", bound.holds, json!(bound), "E_L2 <= T xi_max (2/delta) |u0|");

    let trunc = run_sweep(&conv.seeded(SweepKind::ShallowTruncated, config.seed))?;
    let s = slope(&trunc);
    items.hard(
        "sweep.shallow_truncated.rate",
        trunc.strictly_decreasing
            && s.is_some_and(|s| (s - tol.truncated_slope_target).abs() <= tol.truncated_slope_band),
        json!({ "errors": trunc.errors_hs, "slope": s, "truncation_gap": trunc.truncation_gap }),
        format!("strictly decreasing, slope {} +- {}", tol.truncated_slope_target, tol.truncated_slope_band),
    );
    let shallow = run_sweep(&conv.seeded(SweepKind::Shallow, config.seed))?;
    items.hard(
        "sweep.shallow.monotone",
        shallow.strictly_decreasing,
        json!({ "errors": shallow.errors_hs, "slope": slope(&shallow) }),
        "strictly decreasing",
    );

    let varying_config = conv.seeded(SweepKind::DeepVaryingData, config.seed);
    let varying = run_sweep(&varying_config)?;
    let s = slope(&varying);
    let expect_convergent = varying_config.perturbation.scaling == PerturbationScaling::InverseDelta;
    items.hard(
        "sweep.varying_data.rate",
        if expect_convergent {
            varying.strictly_decreasing && s.is_some_and(|s| s <= tol.deep_slope_max)
        } else {
            !varying.convergent
        },
        json!({ "errors": varying.errors_hsm1, "slope": s, "convergent": varying.convergent }),
        if expect_convergent {
            format!("strictly decreasing, slope <= {}", tol.deep_slope_max)
        } else {
            "flagged non-convergent".to_string()
        },
    );
    let mut control = varying_config.clone();
    control.perturbation.scaling = PerturbationScaling::Constant;
    let ctrl = run_sweep(&control)?;
    items.hard(
        "sweep.varying_data.constant_control",
        !ctrl.convergent,
        json!({ "errors": ctrl.errors_hsm1, "slope": slope(&ctrl), "convergent": ctrl.convergent }),
        "flagged non-convergent",
    );
    Ok(())
}

/// The full invariant suite on the sections of `config`.
pub fn run_check(config: &RunConfig) -> Result<CheckSummary> {
    let mut items = Items(Vec::new());
    symbol_items(&mut items, config)?;
    resonance_items(&mut items, config)?;
    integrator_items(&mut items, config)?;
    scaling_items(&mut items, config)?;
    if config.check.include_sweeps {
        sweep_items(&mut items, config)?;
    }
    Ok(CheckSummary::new(items.0))
}
