use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{advisory_dt, aligned_steps, Solver, SolverConfig};
use crate::spectral::{Grid, SpectralField};
use crate::symbols::EquationSpec;

/// Drift of the conserved quantities over one run at the default step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationCheck {
    pub steps: usize,
    pub dt: f64,
    /// max_t |mean(t) − mean(0)|.
    pub mean_drift: f64,
    /// max_t |‖u(t)‖ − ‖u₀‖| / ‖u₀‖.
    pub l2_drift: f64,
}

pub fn conservation_check(spec: EquationSpec, grid: Grid, final_time: f64, u0: &SpectralField) -> Result<ConservationCheck> {
    let config = SolverConfig::new(spec, grid, final_time, u0)?;
    let (steps, dt) = (config.steps(), config.dt);
    let traj = Solver::new(config)?.evolve(u0)?.healthy()?;
    Ok(ConservationCheck {
        steps,
        dt,
        mean_drift: traj.mean_drift(),
        l2_drift: traj.l2_drift(),
    })
}

/// ‖u₀ − S(−T)S(T)u₀‖_{H^s} at the default step.
pub fn reversibility_error(spec: EquationSpec, grid: Grid, final_time: f64, u0: &SpectralField, s: f64) -> Result<f64> {
    let config = SolverConfig::new(spec, grid, final_time, u0)?;
    let (steps, dt) = (config.steps(), config.dt);
    let mut solver = Solver::new(config)?;
    let start = solver.prepare(u0)?;
    let forward = solver.march(&start, dt, steps)?;
    let back = solver.march(&forward, -dt, steps)?;
    Ok(back.sub(&start)?.sobolev_norm(s))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfConvergence {
    /// Step counts of the compared runs; the reference uses twice the last.
    pub steps: Vec<usize>,
    pub reference_steps: usize,
    /// ‖u_n(T) − u_ref(T)‖_{L²}.
    pub errors: Vec<f64>,
    /// log₂ of consecutive error ratios.
    pub orders: Vec<f64>,
}

impl SelfConvergence {
    /// Order between the two finest runs, the asymptotic estimate.
    pub fn observed_order(&self) -> f64 {
        *self.orders.last().expect("three runs give two orders")
    }

    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Runs at n₀, 2n₀, 4n₀ steps (n₀ the default count) against 8n₀.
pub fn self_convergence(spec: EquationSpec, grid: Grid, final_time: f64, u0: &SpectralField) -> Result<SelfConvergence> {
    if !(final_time > 0.0) {
        return Err(Error::param("final_time", "self-convergence needs T > 0"));
    }
    let n0 = aligned_steps(final_time, advisory_dt(&grid, u0.max_abs_physical()));
    let run = |n: usize| -> Result<SpectralField> {
        let dt = final_time / n as f64;
        let config = SolverConfig::with_dt_bound(spec, grid, final_time, dt)?.with_dt(dt);
        let mut solver = Solver::new(config)?;
        let start = solver.prepare(u0)?;
        solver.march(&start, dt, n)
    };
    let reference = run(8 * n0)?;
    let steps = vec![n0, 2 * n0, 4 * n0];
    let errors = steps
        .iter()
        .map(|&n| Ok(run(n)?.sub(&reference)?.l2_norm()))
        .collect::<Result<Vec<_>>>()?;
    Ok(SelfConvergence {
        orders: observed_orders(&errors),
        steps,
        reference_steps: 8 * n0,
        errors,
    })
}

/// |I₂(T) − I₂(0)| under repeated step halving, for both signs of the last term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct I2Refinement {
    pub delta: f64,
    pub steps: Vec<usize>,
    pub printed_drift: Vec<f64>,
    pub corrected_drift: Vec<f64>,
    pub printed_orders: Vec<f64>,
    pub corrected_orders: Vec<f64>,
}

impl I2Refinement {
    /// Whether the drift of the printed quantity falls at `order` or faster at every halving.
    pub fn printed_conserved(&self, order: f64) -> bool {
        self.printed_orders.iter().all(|&o| o >= order)
    }

    pub fn corrected_conserved(&self, order: f64) -> bool {
        self.corrected_orders.iter().all(|&o| o >= order)
    }

    /// Drift of the printed quantity on the finest run.
    pub fn printed_plateau(&self) -> f64 {
        *self.printed_drift.last().expect("at least one run")
    }
}

/// Quadratic ILW at depth δ, starting from the default step count and halving
/// `refinements` times.
pub fn i2_refinement(delta: f64, grid: Grid, final_time: f64, u0: &SpectralField, refinements: usize) -> Result<I2Refinement> {
    let spec = EquationSpec::gilw(2, delta)?;
    let base = SolverConfig::new(spec, grid, final_time, u0)?;
    if base.steps() == 0 {
        return Err(Error::param("final_time", "I2 refinement needs T > 0"));
    }
    let mut steps = Vec::new();
    let mut printed = Vec::new();
    let mut corrected = Vec::new();
    for r in 0..=refinements {
        let n = base.steps() << r;
        let dt = final_time / n as f64;
        let config = base.clone().with_dt(dt).with_stride(n);
        let traj = Solver::new(config)?.evolve(u0)?.healthy()?;
        let (p, c) = traj
            .i2_drift()
            .ok_or_else(|| Error::param("delta", "I2 is not defined for this equation"))?;
        steps.push(n);
        printed.push(p);
        corrected.push(c);
    }
    Ok(I2Refinement {
        delta,
        steps,
        printed_orders: observed_orders(&printed),
        corrected_orders: observed_orders(&corrected),
        printed_drift: printed,
        corrected_drift: corrected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(grid: Grid) -> SpectralField {
        SpectralField::from_fn(grid, |x| x.cos() + 0.5 * (2.0 * x + 1.0).cos())
    }

    #[test]
    fn orders_from_errors() {
        assert_eq!(observed_orders(&[16.0, 1.0, 0.0625]), vec![4.0, 4.0]);
    }

    #[test]
    fn kdv_small_grid() {
        let grid = Grid::torus(64).unwrap();
        let spec = EquationSpec::gkdv(2).unwrap();
        let u0 = data(grid);
        let c = conservation_check(spec, grid, 0.1, &u0).unwrap();
        assert!(c.mean_drift < 1e-14 && c.l2_drift < 1e-5, "{c:?}");
        let r = reversibility_error(spec, grid, 0.1, &u0, 1.0).unwrap();
        assert!(r < 1e-3, "{r}");
        let sc = self_convergence(spec, grid, 0.1, &u0).unwrap();
        assert_eq!(sc.steps.len(), 3);
        assert!((sc.observed_order() - 4.0).abs() < 0.5, "{sc:?}");
    }
}
