use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::evolution::SolverConfig;
use crate::experiments::{DataProfile, SweepConfig, SweepKind};
use crate::resonance::{Lemma, ResonanceQuery, MAX_CAP};
use crate::spectral::{Grid, SpectralField};
use crate::symbols::lemmas::LemmaSampling;
use crate::symbols::{ComparisonConstants, DepthParam, EquationSpec, Family, Regime};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepthInput {
    pub delta: f64,
}

/// Equation as written in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationInput {
    pub family: Family,
    pub k: u32,
    /// Required for gilw-deep, gilw and scaled-gilw; absent for gbo and gkdv.
    pub depth: Option<DepthInput>,
}

impl EquationInput {
    pub fn new(family: Family, k: u32, delta: Option<f64>) -> Self {
        Self {
            family,
            k,
            depth: delta.map(|delta| DepthInput { delta }),
        }
    }

    pub fn to_spec(&self) -> Result<EquationSpec> {
        let delta = || {
            self.depth
                .map(|d| d.delta)
                .ok_or_else(|| Error::param("depth", format!("{} needs a depth", self.family)))
        };
        let no_depth = || match self.depth {
            Some(_) => Err(Error::param("depth", format!("{} takes no depth", self.family))),
            None => Ok(()),
        };
        let depth = match self.family {
            Family::GilwDeep => DepthParam::deep(delta()?)?,
            Family::Gilw => DepthParam::finite(delta()?)?,
            Family::ScaledGilw => DepthParam::shallow(delta()?)?,
            Family::Gbo => {
                no_depth()?;
                DepthParam::Infinite
            }
            Family::Gkdv => {
                no_depth()?;
                DepthParam::KdvLimit
            }
        };
        EquationSpec::new(self.family, self.k, depth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridInput {
    pub modes: usize,
    pub period: f64,
}

impl Default for GridInput {
    fn default() -> Self {
        Self {
            modes: 256,
            period: 2.0 * std::f64::consts::PI,
        }
    }
}

impl GridInput {
    pub fn to_grid(&self) -> Result<Grid> {
        Grid::new(self.modes, self.period).map_err(|e| match e {
            Error::InvalidGrid(msg) if msg.starts_with("period") => Error::param("period", msg),
            Error::InvalidGrid(msg) => Error::param("modes", msg),
            other => other,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolsSection {
    pub equation: EquationInput,
    pub grid: GridInput,
    pub sampling: LemmaSampling,
}

impl Default for SymbolsSection {
    fn default() -> Self {
        Self {
            equation: EquationInput::new(Family::GilwDeep, 2, Some(4.0)),
            grid: GridInput::default(),
            sampling: LemmaSampling::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityInput {
    pub n0s: Vec<u32>,
    pub muchs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceSection {
    pub queries: Vec<ResonanceQuery>,
    /// Re-runs every query over these (n₀, ≫-factor) pairs; empty lists skip it.
    pub sensitivity: SensitivityInput,
}

/// δ-grids {2, 4, 8, 16, ∞} and {0.5, 0.1, 0.02}, both lemmas, cap 64.
pub fn default_resonance_queries() -> Vec<ResonanceQuery> {
    let deep = vec![
        DepthParam::Deep { delta: 2.0 },
        DepthParam::Deep { delta: 4.0 },
        DepthParam::Deep { delta: 8.0 },
        DepthParam::Deep { delta: 16.0 },
        DepthParam::Infinite,
    ];
    let shallow = vec![
        DepthParam::Shallow { delta: 0.5 },
        DepthParam::Shallow { delta: 0.1 },
        DepthParam::Shallow { delta: 0.02 },
    ];
    let mut out = Vec::new();
    for (regime, deltas) in [(Regime::Deep, deep), (Regime::Shallow, shallow)] {
        for (lemma, k) in [(Lemma::Res1, 1), (Lemma::Res1, 2), (Lemma::Res2, 2), (Lemma::Res2, 3)] {
            out.push(ResonanceQuery {
                regime,
                lemma,
                k,
                cap: 64,
                deltas: deltas.clone(),
                constants: ComparisonConstants::default(),
            });
        }
    }
    out
}

impl Default for ResonanceSection {
    fn default() -> Self {
        Self {
            queries: default_resonance_queries(),
            sensitivity: SensitivityInput {
                n0s: vec![1, 2],
                muchs: vec![4.0, 8.0, 16.0],
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    pub equation: EquationInput,
    pub grid: GridInput,
    pub final_time: f64,
    /// Defaults to T/2^j below the CFL bound of the data.
    pub dt: Option<f64>,
    pub snapshot_stride: Option<usize>,
    pub padding: Option<usize>,
    pub linear_only: bool,
    pub truncation: Option<f64>,
    pub s: f64,
    pub data: DataProfile,
    /// Also write every snapshot as `<prefix>.snap.NNNN.bin`.
    pub write_snapshots: bool,
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self {
            equation: EquationInput::new(Family::GilwDeep, 2, Some(4.0)),
            grid: GridInput::default(),
            final_time: 0.3,
            dt: None,
            snapshot_stride: None,
            padding: None,
            linear_only: false,
            truncation: None,
            s: 1.0,
            data: DataProfile::default(),
            write_snapshots: false,
        }
    }
}

impl EvolveSection {
    pub fn initial_data(&self, seed: u64) -> Result<SpectralField> {
        let mut profile = self.data.clone();
        profile.seed = seed;
        Ok(profile.sample(&self.grid.to_grid()?))
    }

    pub fn solver_config(&self, seed: u64) -> Result<SolverConfig> {
        let spec = self.equation.to_spec().map_err(prefixed("equation"))?;
        let grid = self.grid.to_grid().map_err(prefixed("grid"))?;
        let u0 = self.initial_data(seed)?;
        let mut config = SolverConfig::new(spec, grid, self.final_time, &u0)?;
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::param("dt", format!("must be positive, got {dt}")));
            }
            config = SolverConfig::with_dt_bound(spec, grid, self.final_time, dt)?.with_dt(dt);
        }
        if let Some(stride) = self.snapshot_stride {
            config.snapshot_stride = stride;
        }
        if let Some(p) = self.padding {
            config.padding = p;
        }
        if let Some(k) = self.truncation {
            if k > grid.modes() as f64 / 3.0 {
                return Err(Error::param(
                    "truncation",
                    format!("alias-free truncation needs K <= M/3 = {}, got {k}", grid.modes() as f64 / 3.0),
                ));
            }
        }
        config = config.linear(self.linear_only).truncated(self.truncation);
        config.hs_order = self.s;
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeSection {
    pub deep: SweepConfig,
    pub shallow: SweepConfig,
    pub shallow_truncated: SweepConfig,
    pub varying_data: SweepConfig,
}

impl Default for ConvergeSection {
    fn default() -> Self {
        Self {
            deep: SweepConfig::deep(),
            shallow: SweepConfig::shallow(),
            shallow_truncated: SweepConfig::shallow_truncated(),
            varying_data: SweepConfig::deep_varying_data(),
        }
    }
}

impl ConvergeSection {
    pub fn get(&self, kind: SweepKind) -> &SweepConfig {
        match kind {
            SweepKind::Deep => &self.deep,
            SweepKind::Shallow => &self.shallow,
            SweepKind::ShallowTruncated => &self.shallow_truncated,
            SweepKind::DeepVaryingData => &self.varying_data,
        }
    }

    fn entries(&self) -> [(&'static str, SweepKind, &SweepConfig); 4] {
        [
            ("deep", SweepKind::Deep, &self.deep),
            ("shallow", SweepKind::Shallow, &self.shallow),
            ("shallow_truncated", SweepKind::ShallowTruncated, &self.shallow_truncated),
            ("varying_data", SweepKind::DeepVaryingData, &self.varying_data),
        ]
    }

    /// Sweep config with the run-level seed applied.
    pub fn seeded(&self, kind: SweepKind, seed: u64) -> SweepConfig {
        let mut c = self.get(kind).clone();
        c.data.seed = seed;
        c
    }
}

/// Pass thresholds of the invariant suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub taylor_residual: f64,
    pub series_vs_closed: f64,
    pub h_slope_target: f64,
    pub h_slope_band: f64,
    /// Largest allowed max/min ratio of the per-δ minima over the deep grid.
    pub deep_uniformity: f64,
    pub mean_drift: f64,
    pub l2_drift: f64,
    pub reversibility: f64,
    pub order_target: f64,
    pub order_band: f64,
    pub i2_order: f64,
    pub scaling: f64,
    pub deep_slope_max: f64,
    pub truncated_slope_target: f64,
    pub truncated_slope_band: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            taylor_residual: 1e-10,
            series_vs_closed: 1e-9,
            h_slope_target: 2.0,
            h_slope_band: 0.1,
            deep_uniformity: 4.0,
            mean_drift: 1e-14,
            l2_drift: 1e-9,
            reversibility: 1e-6,
            order_target: 4.0,
            order_band: 0.3,
            i2_order: 3.5,
            scaling: 1e-6,
            deep_slope_max: -0.8,
            truncated_slope_target: 2.0,
            truncated_slope_band: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    /// Equations whose integrator invariants are checked.
    pub equations: Vec<EquationInput>,
    pub grid: GridInput,
    pub final_time: f64,
    pub data: DataProfile,
    /// Sobolev order of the forward-backward return error.
    pub s: f64,
    pub i2_delta: f64,
    pub i2_refinements: usize,
    pub scaling_delta: f64,
    /// Run the four δ-sweeps of the converge section as part of the suite.
    pub include_sweeps: bool,
    pub tolerances: Tolerances,
}

impl Default for CheckSection {
    fn default() -> Self {
        Self {
            equations: vec![
                EquationInput::new(Family::GilwDeep, 2, Some(4.0)),
                EquationInput::new(Family::Gilw, 2, Some(0.5)),
                EquationInput::new(Family::Gbo, 2, None),
                EquationInput::new(Family::ScaledGilw, 2, Some(0.5)),
                EquationInput::new(Family::Gkdv, 2, None),
                EquationInput::new(Family::GilwDeep, 3, Some(4.0)),
                EquationInput::new(Family::Gkdv, 3, None),
            ],
            grid: GridInput::default(),
            final_time: 0.3,
            data: DataProfile::default(),
            s: 1.0,
            i2_delta: 4.0,
            i2_refinements: 3,
            scaling_delta: 0.5,
            include_sweeps: true,
            tolerances: Tolerances::default(),
        }
    }
}

/// Complete, validated input of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    /// Output path prefix; `--out` takes precedence.
    pub output: Option<String>,
    pub symbols: SymbolsSection,
    pub resonance: ResonanceSection,
    pub evolve: EvolveSection,
    pub converge: ConvergeSection,
    pub check: CheckSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 1,
            output: None,
            symbols: SymbolsSection::default(),
            resonance: ResonanceSection::default(),
            evolve: EvolveSection::default(),
            converge: ConvergeSection::default(),
            check: CheckSection::default(),
        }
    }
}

/// Re-roots parameter errors under `path`.
fn prefixed(path: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::InvalidParameter { name, reason } => Error::param(format!("{path}.{name}"), reason),
        Error::Config { path: inner, message } => Error::config(format!("{path}.{inner}"), message),
        other => Error::config(path, other.to_string()),
    }
}

fn into_config_error(e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => Error::config(name, reason),
        other @ Error::Config { .. } => other,
        other => Error::config("", other.to_string()),
    }
}

fn check_depth(depth: &DepthParam) -> Result<()> {
    match *depth {
        DepthParam::Deep { delta } => DepthParam::deep(delta).map(|_| ()),
        DepthParam::Finite { delta } => DepthParam::finite(delta).map(|_| ()),
        DepthParam::Shallow { delta } => DepthParam::shallow(delta).map(|_| ()),
        DepthParam::Infinite | DepthParam::KdvLimit => Ok(()),
    }
}

impl RunConfig {
    /// Every module-level precondition, checked up front.
    pub fn validate(&self) -> Result<()> {
        self.validate_inner().map_err(into_config_error)
    }

    fn validate_inner(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::param(
                "schema_version",
                format!("this binary reads version {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        let sym = &self.symbols;
        sym.equation.to_spec().map_err(prefixed("symbols.equation"))?;
        sym.grid.to_grid().map_err(prefixed("symbols.grid"))?;
        let s = &sym.sampling;
        if s.deep_deltas.iter().any(|&d| !(d >= 2.0 && d.is_finite())) {
            return Err(Error::param("symbols.sampling.deep_deltas", "every entry needs 2 <= delta < inf"));
        }
        if s.shallow_chain.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
            return Err(Error::param("symbols.sampling.shallow_chain", "every entry needs 0 < delta < 1"));
        }
        if !(s.slope_delta_min > 0.0 && s.slope_delta_min < s.slope_delta_max && s.slope_delta_max <= 1.0) {
            return Err(Error::param("symbols.sampling", "needs 0 < slope_delta_min < slope_delta_max <= 1"));
        }
        if s.slope_points < 4 || s.log_grid_points < 2 || s.chain_xi_max == 0 {
            return Err(Error::param(
                "symbols.sampling",
                "needs slope_points >= 4, log_grid_points >= 2 and chain_xi_max >= 1",
            ));
        }

        for (i, q) in self.resonance.queries.iter().enumerate() {
            let path = format!("resonance.queries[{i}]");
            q.validate().map_err(prefixed(&path))?;
            for (j, d) in q.deltas.iter().enumerate() {
                check_depth(d).map_err(|e| match e {
                    Error::InvalidParameter { reason, .. } => Error::param(format!("{path}.deltas[{j}].delta"), reason),
                    other => other,
                })?;
            }
        }
        let sens = &self.resonance.sensitivity;
        if sens.muchs.iter().any(|&m| !(m >= 1.0)) {
            return Err(Error::param("resonance.sensitivity.muchs", "every factor must be >= 1"));
        }
        if sens.n0s.iter().any(|&n| n > MAX_CAP) {
            return Err(Error::param("resonance.sensitivity.n0s", format!("every n0 must be <= {MAX_CAP}")));
        }

        self.evolve.solver_config(self.seed).map_err(prefixed("evolve"))?;

        for (name, kind, sweep) in self.converge.entries() {
            let path = format!("converge.{name}");
            if sweep.kind != kind {
                return Err(Error::param(format!("{path}.kind"), format!("must be {}", kind_name(kind))));
            }
            sweep.validate().map_err(prefixed(&path))?;
        }

        let c = &self.check;
        if c.equations.is_empty() {
            return Err(Error::param("check.equations", "empty"));
        }
        for (i, e) in c.equations.iter().enumerate() {
            e.to_spec().map_err(prefixed(&format!("check.equations[{i}]")))?;
        }
        c.grid.to_grid().map_err(prefixed("check.grid"))?;
        if !(c.final_time > 0.0 && c.final_time.is_finite()) {
            return Err(Error::param("check.final_time", "must be positive"));
        }
        DepthParam::finite(c.i2_delta).map_err(|e| match e {
            Error::InvalidParameter { reason, .. } => Error::param("check.i2_delta", reason),
            other => other,
        })?;
        if c.i2_refinements < 1 {
            return Err(Error::param("check.i2_refinements", "must be >= 1"));
        }
        DepthParam::shallow(c.scaling_delta).map_err(|e| match e {
            Error::InvalidParameter { reason, .. } => Error::param("check.scaling_delta", reason),
            other => other,
        })?;
        Ok(())
    }

    /// Pretty JSON of the full config, defaults included.
    pub fn echo(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

pub fn kind_name(kind: SweepKind) -> &'static str {
    match kind {
        SweepKind::Deep => "deep",
        SweepKind::Shallow => "shallow",
        SweepKind::ShallowTruncated => "shallow-truncated",
        SweepKind::DeepVaryingData => "deep-varying-data",
    }
}

/// Objects merge key by key; anything else in `over` replaces `base`.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if v.is_object() && slot.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Parses a config document: missing keys take their defaults, unknown keys
/// and out-of-range values are rejected with a path-qualified message.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let user: Value = serde_json::from_str(text).map_err(|e| Error::config("", format!("malformed JSON: {e}")))?;
    let Value::Object(ref map) = user else {
        return Err(Error::config("", "top level must be an object"));
    };
    match map.get("schema_version") {
        None => return Err(Error::config("schema_version", "missing")),
        Some(v) if v.as_u64() != Some(SCHEMA_VERSION as u64) => {
            return Err(Error::config(
                "schema_version",
                format!("this binary reads version {SCHEMA_VERSION}, got {v}"),
            ))
        }
        Some(_) => {}
    }
    let mut merged = serde_json::to_value(RunConfig::default())?;
    merge(&mut merged, user);
    let config: RunConfig = serde_path_to_error::deserialize(merged).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path == "." { String::new() } else { path }, e.into_inner().to_string())
    })?;
    config.validate()?;
    Ok(config)
}
