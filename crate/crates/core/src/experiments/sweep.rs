use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{advisory_dt, aligned_steps, Solver, SolverConfig, Trajectory, TARGET_SNAPSHOTS};
use crate::fit::{fit_power_law, PowerFit, MIN_FIT_POINTS};
use crate::spectral::{random_hs_field, Grid, SpectralField};
use crate::symbols::{EquationSpec, Regime};

use super::scaling::{scaling_check, ScalingCheck};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    Deep,
    Shallow,
    ShallowTruncated,
    DeepVaryingData,
}

impl SweepKind {
    pub fn regime(&self) -> Regime {
        match self {
            SweepKind::Deep | SweepKind::DeepVaryingData => Regime::Deep,
            SweepKind::Shallow | SweepKind::ShallowTruncated => Regime::Shallow,
        }
    }

    /// Whether the rate is read off the H^s error (otherwise H^{s−1}).
    fn primary_is_hs(&self) -> bool {
        self.regime() == Regime::Shallow
    }
}

/// Initial data u₀ = cos x + ½cos(2x + 1) + tail, optionally band-limited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataProfile {
    /// Amplitude of the deterministic two-mode part (1 gives the standard profile).
    pub base_amplitude: f64,
    /// Amplitude of a random H^s tail; 0 disables it.
    pub tail_amplitude: f64,
    pub tail_order: f64,
    /// Set from the run-level seed rather than read per profile.
    #[serde(skip)]
    pub seed: u64,
    /// Sharp cutoff |m| <= band_limit applied to the data.
    pub band_limit: Option<f64>,
}

impl Default for DataProfile {
    fn default() -> Self {
        Self {
            base_amplitude: 1.0,
            tail_amplitude: 0.0,
            tail_order: 1.0,
            seed: 1,
            band_limit: None,
        }
    }
}

impl DataProfile {
    pub fn sample(&self, grid: &Grid) -> SpectralField {
        let a = self.base_amplitude;
        let mut u = SpectralField::from_fn(*grid, |x| a * (x.cos() + 0.5 * (2.0 * x + 1.0).cos()));
        if self.tail_amplitude != 0.0 {
            let tail = random_hs_field(grid, self.tail_order, self.tail_amplitude, self.seed);
            u = u.add_scaled(1.0, &tail).expect("same grid");
        }
        let u = u.without_nyquist();
        match self.band_limit {
            Some(k) => u.project_leq(k),
            None => u,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationScaling {
    /// u_{δ,0} = u_{∞,0} + δ⁻¹·amplitude·sin 3x.
    InverseDelta,
    /// u_{δ,0} = u_{∞,0} + amplitude·sin 3x for every δ.
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Perturbation {
    pub scaling: PerturbationScaling,
    pub amplitude: f64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self {
            scaling: PerturbationScaling::InverseDelta,
            amplitude: 0.5,
        }
    }
}

impl Perturbation {
    pub fn coefficient(&self, delta: f64) -> f64 {
        match self.scaling {
            PerturbationScaling::InverseDelta => self.amplitude / delta,
            PerturbationScaling::Constant => self.amplitude,
        }
    }

    pub fn shape(grid: &Grid) -> SpectralField {
        SpectralField::from_fn(*grid, |x| (3.0 * x).sin())
    }
}

/// One δ-sweep against the limiting equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub deltas: Vec<f64>,
    pub k: u32,
    pub modes: usize,
    pub period: f64,
    pub final_time: f64,
    /// Comparison order s; errors are reported in H^{s−1} and H^s.
    pub s: f64,
    /// Truncation K (shallow-truncated only).
    pub truncation: Option<f64>,
    pub data: DataProfile,
    /// δ-dependent data (deep-varying-data only).
    pub perturbation: Perturbation,
    pub linear_only: bool,
    /// Overrides the shared advisory step.
    pub dt: Option<f64>,
    pub snapshot_stride: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self::deep()
    }
}

impl SweepConfig {
    fn base(kind: SweepKind, deltas: Vec<f64>) -> Self {
        Self {
            kind,
            deltas,
            k: 2,
            modes: 256,
            period: 2.0 * std::f64::consts::PI,
            final_time: 0.3,
            s: 1.0,
            truncation: None,
            data: DataProfile::default(),
            perturbation: Perturbation::default(),
            linear_only: false,
            dt: None,
            snapshot_stride: None,
        }
    }

    pub fn deep() -> Self {
        Self::base(SweepKind::Deep, vec![2.0, 4.0, 8.0, 16.0, 32.0])
    }

    pub fn shallow() -> Self {
        let mut c = Self::base(SweepKind::Shallow, vec![0.4, 0.2, 0.1, 0.05]);
        c.data.band_limit = Some(16.0);
        c
    }

    pub fn shallow_truncated() -> Self {
        let mut c = Self::base(SweepKind::ShallowTruncated, vec![0.2, 0.1, 0.05, 0.025]);
        c.truncation = Some(16.0);
        c
    }

    pub fn deep_varying_data() -> Self {
        Self::base(SweepKind::DeepVaryingData, vec![2.0, 4.0, 8.0, 16.0, 32.0])
    }

    pub fn for_kind(kind: SweepKind) -> Self {
        match kind {
            SweepKind::Deep => Self::deep(),
            SweepKind::Shallow => Self::shallow(),
            SweepKind::ShallowTruncated => Self::shallow_truncated(),
            SweepKind::DeepVaryingData => Self::deep_varying_data(),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.modes, self.period)
    }

    /// Checks every precondition; error names are paths inside the config.
    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if self.k < 2 {
            return Err(Error::param("k", format!("must be >= 2, got {}", self.k)));
        }
        if self.deltas.len() < MIN_FIT_POINTS {
            return Err(Error::param(
                "deltas",
                format!("rate fitting needs at least {MIN_FIT_POINTS} depths, got {}", self.deltas.len()),
            ));
        }
        for (i, &d) in self.deltas.iter().enumerate() {
            let ok = match self.kind.regime() {
                Regime::Deep => d >= 2.0 && d.is_finite(),
                Regime::Shallow => d > 0.0 && d < 1.0,
            };
            if !ok {
                let range = match self.kind.regime() {
                    Regime::Deep => "2 <= delta < inf",
                    Regime::Shallow => "0 < delta < 1",
                };
                return Err(Error::param(format!("deltas[{i}]"), format!("needs {range}, got {d}")));
            }
        }
        let mut sorted = self.deltas.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::param("deltas", "contains duplicates"));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(Error::param("final_time", format!("must be positive, got {}", self.final_time)));
        }
        if !self.s.is_finite() {
            return Err(Error::param("s", "must be finite"));
        }
        match (self.kind, self.truncation) {
            (SweepKind::ShallowTruncated, None) => {
                return Err(Error::param("truncation", "required for shallow-truncated sweeps"))
            }
            (SweepKind::ShallowTruncated, Some(k)) => {
                let limit = self.modes as f64 / 3.0;
                if !(k >= 1.0 && k <= limit) {
                    return Err(Error::param(
                        "truncation",
                        format!("alias-free truncation needs 1 <= K <= M/3 = {limit}, got {k}"),
                    ));
                }
            }
            (_, Some(_)) => {
                return Err(Error::param("truncation", "only used by shallow-truncated sweeps"))
            }
            _ => {}
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::param("dt", format!("must be positive, got {dt}")));
            }
        }
        if self.snapshot_stride == Some(0) {
            return Err(Error::param("snapshot_stride", "must be >= 1"));
        }
        if let Some(b) = self.data.band_limit {
            if !(b >= 0.0) {
                return Err(Error::param("data.band_limit", format!("must be >= 0, got {b}")));
            }
        }
        if !self.perturbation.amplitude.is_finite() {
            return Err(Error::param("perturbation.amplitude", "must be finite"));
        }
        Ok(())
    }

    /// Depths ordered toward the limit (increasing for deep, decreasing for shallow).
    pub fn ordered_deltas(&self) -> Vec<f64> {
        let mut d = self.deltas.clone();
        match self.kind.regime() {
            Regime::Deep => d.sort_by(f64::total_cmp),
            Regime::Shallow => d.sort_by(|a, b| b.total_cmp(a)),
        }
        d
    }

    fn member_spec(&self, delta: f64) -> Result<EquationSpec> {
        match self.kind.regime() {
            Regime::Deep => EquationSpec::gilw_deep(self.k, delta),
            Regime::Shallow => EquationSpec::scaled_gilw(self.k, delta),
        }
    }

    fn limit_spec(&self) -> Result<EquationSpec> {
        match self.kind.regime() {
            Regime::Deep => EquationSpec::gbo(self.k),
            Regime::Shallow => EquationSpec::gkdv(self.k),
        }
    }

    fn member_data(&self, base: &SpectralField, delta: f64) -> SpectralField {
        if self.kind != SweepKind::DeepVaryingData {
            return base.clone();
        }
        let grid = base.grid();
        base.add_scaled(self.perturbation.coefficient(delta), &Perturbation::shape(grid))
            .expect("same grid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub limit: String,
    pub modes: usize,
    pub period: f64,
    pub dt: f64,
    pub steps: usize,
    pub snapshot_stride: usize,
    pub snapshots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearBound {
    pub errors_l2: Vec<f64>,
    /// T · ξ_max · (2/δ) · ‖u₀‖_{L²}.
    pub bounds: Vec<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationGap {
    pub delta: f64,
    pub cutoff: f64,
    /// max_t ‖v_δ − v_{δ,K}‖_{H^s}.
    pub gap_hs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub kind: SweepKind,
    pub deltas: Vec<f64>,
    pub errors_hsm1: Vec<f64>,
    pub errors_hs: Vec<f64>,
    /// "hs" or "hsm1": the norm the verdict and the rate refer to.
    pub primary_norm: &'static str,
    pub fit_hsm1: Option<PowerFit>,
    pub fit_hs: Option<PowerFit>,
    pub fit_note: Option<String>,
    pub strictly_decreasing: bool,
    /// Strictly decreasing with a fitted slope of at least one half in magnitude.
    pub convergent: bool,
    /// max E·δ (deep) or max E/δ² (shallow) in the primary norm.
    pub fitted_constant: f64,
    pub linear_bound: Option<LinearBound>,
    pub truncation_gap: Option<TruncationGap>,
    pub scaling_check: Option<ScalingCheck>,
    pub run: RunMetadata,
    pub config: SweepConfig,
}

impl ConvergenceReport {
    pub fn primary_errors(&self) -> &[f64] {
        if self.primary_norm == "hs" {
            &self.errors_hs
        } else {
            &self.errors_hsm1
        }
    }

    pub fn primary_fit(&self) -> Option<&PowerFit> {
        if self.primary_norm == "hs" {
            self.fit_hs.as_ref()
        } else {
            self.fit_hsm1.as_ref()
        }
    }

    /// CSV `delta,error_hsm1,error_hs`, one row per δ.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        use crate::io::fmt_float;
        writeln!(out, "delta,error_hsm1,error_hs")?;
        for ((d, a), b) in self.deltas.iter().zip(&self.errors_hsm1).zip(&self.errors_hs) {
            writeln!(out, "{},{},{}", fmt_float(*d), fmt_float(*a), fmt_float(*b))?;
        }
        Ok(())
    }
}

/// Least-squares rate of the primary error of a report.
pub fn fit_rate(report: &ConvergenceReport) -> Result<PowerFit> {
    fit_power_law(&report.deltas, report.primary_errors())
}

/// Strictly decreasing along the given order.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

struct Shared {
    grid: Grid,
    dt: f64,
    stride: usize,
    steps: usize,
}

fn shared_discretization(config: &SweepConfig, data: &[SpectralField]) -> Result<Shared> {
    let grid = config.grid()?;
    let max_abs = data.iter().map(|u| u.max_abs_physical()).fold(0.0, f64::max);
    let (dt, steps) = match config.dt {
        Some(dt) => (dt, (config.final_time / dt * (1.0 - 1e-12)).ceil() as usize),
        None => {
            let steps = aligned_steps(config.final_time, advisory_dt(&grid, max_abs));
            (config.final_time / steps as f64, steps)
        }
    };
    let stride = config
        .snapshot_stride
        .unwrap_or((steps / TARGET_SNAPSHOTS).max(1));
    Ok(Shared { grid, dt, stride, steps })
}

fn run_member(
    spec: EquationSpec,
    shared: &Shared,
    config: &SweepConfig,
    truncation: Option<f64>,
    u0: &SpectralField,
) -> Result<Trajectory> {
    let mut sc = SolverConfig::with_dt_bound(spec, shared.grid, config.final_time, shared.dt)?
        .with_dt(shared.dt)
        .with_stride(shared.stride)
        .linear(config.linear_only)
        .truncated(truncation);
    sc.hs_order = config.s;
    Solver::new(sc)?.evolve(u0)?.healthy()
}

fn wrap(delta: f64) -> impl Fn(Error) -> Error {
    move |e| Error::SweepRun {
        delta,
        source: Box::new(e),
    }
}

/// Runs any sweep kind.
pub fn run_sweep(config: &SweepConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let grid = config.grid()?;
    let deltas = config.ordered_deltas();
    let base = config.data.sample(&grid);
    let data: Vec<SpectralField> = deltas.iter().map(|&d| config.member_data(&base, d)).collect();
    let mut all_data = data.clone();
    all_data.push(base.clone());
    let shared = shared_discretization(config, &all_data)?;

    let limit_spec = config.limit_spec()?;
    let limit_delta = match config.kind.regime() {
        Regime::Deep => f64::INFINITY,
        Regime::Shallow => 0.0,
    };
    let limit = run_member(limit_spec, &shared, config, config.truncation, &base).map_err(wrap(limit_delta))?;

    let s = config.s;
    let errors: Vec<(f64, f64, f64)> = deltas
        .par_iter()
        .zip(data.par_iter())
        .map(|(&d, u0)| {
            let spec = config.member_spec(d).map_err(wrap(d))?;
            let traj = run_member(spec, &shared, config, config.truncation, u0).map_err(wrap(d))?;
            Ok((
                traj.max_difference(&limit, s - 1.0)?,
                traj.max_difference(&limit, s)?,
                traj.max_difference(&limit, 0.0)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let errors_hsm1: Vec<f64> = errors.iter().map(|e| e.0).collect();
    let errors_hs: Vec<f64> = errors.iter().map(|e| e.1).collect();
    let errors_l2: Vec<f64> = errors.iter().map(|e| e.2).collect();

    let primary_is_hs = config.kind.primary_is_hs();
    let primary = if primary_is_hs { &errors_hs } else { &errors_hsm1 };
    let fit_hsm1 = fit_power_law(&deltas, &errors_hsm1);
    let fit_hs = fit_power_law(&deltas, &errors_hs);
    let fit_note = match (&fit_hsm1, &fit_hs) {
        (Err(e), _) | (_, Err(e)) => Some(e.to_string()),
        _ => None,
    };
    let fit_hsm1 = fit_hsm1.ok();
    let fit_hs = fit_hs.ok();
    let primary_fit = if primary_is_hs { fit_hs } else { fit_hsm1 };
    let decreasing = strictly_decreasing(primary);
    let convergent = decreasing && primary_fit.is_some_and(|f| f.slope.abs() >= 0.5 && (f.slope < 0.0) == (config.kind.regime() == Regime::Deep));

    let fitted_constant = deltas
        .iter()
        .zip(primary)
        .map(|(&d, &e)| match config.kind.regime() {
            Regime::Deep => e * d,
            Regime::Shallow => e / (d * d),
        })
        .fold(0.0, f64::max);

    let linear_bound = (config.linear_only && config.kind.regime() == Regime::Deep).then(|| {
        let bounds: Vec<f64> = deltas
            .iter()
            .map(|&d| config.final_time * grid.xi_max() * (2.0 / d) * base.l2_norm())
            .collect();
        let holds = errors_l2.iter().zip(&bounds).all(|(e, b)| e <= b);
        LinearBound {
            errors_l2: errors_l2.clone(),
            bounds,
            holds,
        }
    });

    let largest = deltas[0];
    let truncation_gap = match (config.kind, config.truncation) {
        (SweepKind::ShallowTruncated, Some(cutoff)) => Some(TruncationGap {
            delta: largest,
            cutoff,
            gap_hs: truncation_gap(config, &shared, &base, largest, cutoff)?,
        }),
        _ => None,
    };
    let scaling_check = if config.kind.regime() == Regime::Shallow {
        Some(scaling_check(&base, largest, config.k, config.final_time, s, config.truncation)?)
    } else {
        None
    };

    Ok(ConvergenceReport {
        kind: config.kind,
        deltas,
        errors_hsm1,
        errors_hs,
        primary_norm: if primary_is_hs { "hs" } else { "hsm1" },
        fit_hsm1,
        fit_hs,
        fit_note,
        strictly_decreasing: decreasing,
        convergent,
        fitted_constant,
        linear_bound,
        truncation_gap,
        scaling_check,
        run: RunMetadata {
            limit: limit_spec.to_string(),
            modes: grid.modes(),
            period: grid.period(),
            dt: shared.dt,
            steps: shared.steps,
            snapshot_stride: shared.stride,
            snapshots: limit.snapshots().len(),
        },
        config: config.clone(),
    })
}

fn truncation_gap(config: &SweepConfig, shared: &Shared, base: &SpectralField, delta: f64, cutoff: f64) -> Result<f64> {
    let spec = config.member_spec(delta)?;
    let full = run_member(spec, shared, config, None, base).map_err(wrap(delta))?;
    let cut = run_member(spec, shared, config, Some(cutoff), base).map_err(wrap(delta))?;
    full.max_difference(&cut, config.s)
}

/// max_t ‖v_δ − v_{δ,K}‖_{H^s} for the sweep's data at one depth and cutoff.
pub fn truncation_gap_at(config: &SweepConfig, delta: f64, cutoff: f64) -> Result<f64> {
    let grid = config.grid()?;
    let base = config.data.sample(&grid);
    let shared = shared_discretization(config, std::slice::from_ref(&base))?;
    truncation_gap(config, &shared, &base, delta, cutoff)
}

fn run_kind(config: &SweepConfig, kind: SweepKind) -> Result<ConvergenceReport> {
    if config.kind != kind {
        return Err(Error::param("kind", format!("expected {kind:?}, got {:?}", config.kind)));
    }
    run_sweep(config)
}

/// Deep-water sweep: gILW at each δ against gBO, same data, grid and step.
pub fn deep_water_sweep(config: &SweepConfig) -> Result<ConvergenceReport> {
    run_kind(config, SweepKind::Deep)
}

/// Shallow-water sweep: scaled gILW at each δ against gKdV.
pub fn shallow_water_sweep(config: &SweepConfig) -> Result<ConvergenceReport> {
    run_kind(config, SweepKind::Shallow)
}

/// As the shallow sweep with the sharp truncation applied to data and nonlinearity.
pub fn truncated_shallow_sweep(config: &SweepConfig) -> Result<ConvergenceReport> {
    run_kind(config, SweepKind::ShallowTruncated)
}

/// Deep sweep where the data also depend on δ.
pub fn varying_data_sweep(config: &SweepConfig) -> Result<ConvergenceReport> {
    run_kind(config, SweepKind::DeepVaryingData)
}
