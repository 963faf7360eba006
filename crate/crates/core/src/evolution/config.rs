use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField};
use crate::symbols::EquationSpec;

/// Safety factor of the advisory step dt <= CFL_SAFETY / (ξ_max (1 + max|u₀|)).
pub const CFL_SAFETY: f64 = 0.5;
/// Default number of snapshot intervals on [0, T].
pub const TARGET_SNAPSHOTS: usize = 64;

/// Zero-padding factor ⌈(k+1)/2⌉ that makes the k-th power alias-free.
pub fn default_padding(k: u32) -> usize {
    (k as usize + 2) / 2
}

/// The CFL bound itself.
pub fn advisory_dt(grid: &Grid, max_abs_u0: f64) -> f64 {
    CFL_SAFETY / (grid.xi_max() * (1.0 + max_abs_u0))
}

/// Smallest power-of-two step count whose step does not exceed `dt_bound`.
pub fn aligned_steps(final_time: f64, dt_bound: f64) -> usize {
    if final_time == 0.0 {
        return 0;
    }
    ((final_time / dt_bound).ceil().max(1.0) as usize).next_power_of_two()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub spec: EquationSpec,
    pub grid: Grid,
    pub dt: f64,
    pub final_time: f64,
    /// Physical products are formed on `padding · M` points.
    pub padding: usize,
    pub snapshot_stride: usize,
    pub linear_only: bool,
    /// Sharp cutoff |m| <= K applied to the data and to every nonlinear evaluation.
    pub truncation: Option<f64>,
    /// Order s of the H^s diagnostic.
    pub hs_order: f64,
}

impl SolverConfig {
    /// Defaults: dt = T / 2^j just below the CFL bound for `u0`, padding
    /// ⌈(k+1)/2⌉, about 64 snapshot intervals, s = 1.
    pub fn new(spec: EquationSpec, grid: Grid, final_time: f64, u0: &SpectralField) -> Result<Self> {
        let bound = advisory_dt(&grid, u0.max_abs_physical());
        Self::with_dt_bound(spec, grid, final_time, bound)
    }

    /// As [`SolverConfig::new`] with an explicit bound on the step.
    pub fn with_dt_bound(spec: EquationSpec, grid: Grid, final_time: f64, dt_bound: f64) -> Result<Self> {
        if !(final_time >= 0.0 && final_time.is_finite()) {
            return Err(Error::param("final_time", format!("must be finite and >= 0, got {final_time}")));
        }
        if !(dt_bound > 0.0 && dt_bound.is_finite()) {
            return Err(Error::param("dt", format!("bound must be positive, got {dt_bound}")));
        }
        let steps = aligned_steps(final_time, dt_bound);
        let dt = if steps == 0 { dt_bound } else { final_time / steps as f64 };
        let config = Self {
            spec,
            grid,
            dt,
            final_time,
            padding: default_padding(spec.k()),
            snapshot_stride: (steps / TARGET_SNAPSHOTS).max(1),
            linear_only: false,
            truncation: None,
            hs_order: 1.0,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.final_time >= 0.0 && self.final_time.is_finite()) {
            return Err(Error::param("final_time", format!("must be finite and >= 0, got {}", self.final_time)));
        }
        if self.padding == 0 {
            return Err(Error::param("padding", "must be >= 1"));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::param("snapshot_stride", "must be >= 1"));
        }
        if let Some(k) = self.truncation {
            if !(k >= 0.0) {
                return Err(Error::param("truncation", format!("must be >= 0, got {k}")));
            }
        }
        if !self.hs_order.is_finite() {
            return Err(Error::param("hs_order", "must be finite"));
        }
        Ok(())
    }

    /// Number of full steps and the length of a final partial step (0 if none).
    pub fn step_plan(&self) -> (usize, f64) {
        if self.final_time == 0.0 {
            return (0, 0.0);
        }
        let ratio = self.final_time / self.dt;
        let nearest = ratio.round();
        if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            (nearest as usize, 0.0)
        } else {
            let full = ratio.floor() as usize;
            (full, self.final_time - full as f64 * self.dt)
        }
    }

    /// Total number of steps including a partial one.
    pub fn steps(&self) -> usize {
        let (full, partial) = self.step_plan();
        full + usize::from(partial > 0.0)
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn linear(mut self, on: bool) -> Self {
        self.linear_only = on;
        self
    }

    pub fn truncated(mut self, cutoff: Option<f64>) -> Self {
        self.truncation = cutoff;
        self
    }
}
