//! Measured versions of the symbol inequalities.
//!
//! Each function samples a grid of (δ, ξ) and returns what it saw: counts of
//! violations and the extreme values of the relevant ratios. Verdicts are
//! left to the caller.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fit::fit_power_law;

use super::equation::DepthParam;
use super::functions::{
    coth_unchecked, h_closed_unchecked, h_series, h_series_rel, k_unchecked, q_unchecked,
};

/// Sampling used by [`SymbolLemmaReport::measure`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaSampling {
    pub deep_deltas: Vec<f64>,
    /// Integer frequencies |ξ| <= xi_max are sampled.
    pub xi_max: u32,
    /// Points per axis of the log grid for the two h evaluations.
    pub log_grid_points: usize,
    pub shallow_chain: Vec<f64>,
    /// Frequencies 1..=chain_xi_max for the shallow monotonicity and slope checks.
    pub chain_xi_max: u32,
    pub slope_delta_min: f64,
    pub slope_delta_max: f64,
    pub slope_points: usize,
}

impl Default for LemmaSampling {
    fn default() -> Self {
        Self {
            deep_deltas: vec![2.0, 3.0, 5.0, 10.0, 50.0, 1e3, 1e6],
            xi_max: 512,
            log_grid_points: 50,
            shallow_chain: vec![0.4, 0.2, 0.1, 0.05, 0.01],
            chain_xi_max: 16,
            slope_delta_min: 1e-3,
            slope_delta_max: 1e-1,
            slope_points: 21,
        }
    }
}

/// `n` points geometrically spaced on [lo, hi].
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn integer_frequencies(xi_max: u32) -> impl Iterator<Item = f64> + Clone {
    (-(xi_max as i64)..=xi_max as i64).map(|n| n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichMeasure {
    pub points: usize,
    /// Points violating max(0, |ξ| − 1/δ) <= K <= |ξ|.
    pub violations: usize,
    /// Nonzero-frequency points where equality holds in floating point.
    pub equalities: usize,
}

/// max(0, |ξ| − 1/δ) <= K_δ(ξ) <= |ξ| on the sampled grid.
pub fn sandwich(deltas: &[f64], xi_max: u32) -> SandwichMeasure {
    let mut m = SandwichMeasure {
        points: 0,
        violations: 0,
        equalities: 0,
    };
    for &d in deltas {
        for xi in integer_frequencies(xi_max) {
            let k = k_unchecked(d, xi);
            let (lo, hi) = ((xi.abs() - 1.0 / d).max(0.0), xi.abs());
            m.points += 1;
            if !(lo <= k && k <= hi) {
                m.violations += 1;
            } else if xi != 0.0 && (k == lo || k == hi) {
                m.equalities += 1;
            }
        }
    }
    m
}

/// Count of δ-chains along which K_δ(ξ) fails to increase strictly, ξ ≠ 0.
pub fn k_monotone_violations(ascending_deltas: &[f64], xi_max: u32) -> usize {
    integer_frequencies(xi_max)
        .filter(|&xi| xi != 0.0)
        .filter(|&xi| {
            ascending_deltas
                .windows(2)
                .any(|w| k_unchecked(w[0], xi) >= k_unchecked(w[1], xi))
        })
        .count()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeMeasure {
    pub points: usize,
    pub violations: usize,
    pub min: f64,
    /// max of q_δ(ξ) · δ / 2, which must not exceed 1.
    pub max_scaled: f64,
}

/// q_δ(ξ) ∈ [0, 2/δ] on the sampled grid.
pub fn q_range(deltas: &[f64], xi_max: u32) -> RangeMeasure {
    let mut m = RangeMeasure {
        points: 0,
        violations: 0,
        min: f64::INFINITY,
        max_scaled: 0.0,
    };
    for &d in deltas {
        for xi in integer_frequencies(xi_max) {
            let q = q_unchecked(d, xi);
            m.points += 1;
            m.min = m.min.min(q);
            m.max_scaled = m.max_scaled.max(q * d / 2.0);
            if !(0.0..=2.0 / d).contains(&q) {
                m.violations += 1;
            }
        }
    }
    m
}

/// max |ξ coth(δξ) − 1/δ − δξ²/3 + ξ² h/3| / (1/δ + δξ²), with h from the series.
pub fn taylor_residual(deltas: &[f64], xi_max: u32) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &d in deltas {
        for xi in integer_frequencies(xi_max).filter(|&x| x != 0.0) {
            let scale = 1.0 / d + d * xi * xi;
            // Ask the series for an absolute accuracy well below the target.
            let h = h_series(d, xi, 1e-13 * scale * 3.0 / (xi * xi))?;
            let lhs = xi * coth_unchecked(d * xi);
            let residual = lhs - 1.0 / d - d * xi * xi / 3.0 + xi * xi * h / 3.0;
            worst = worst.max(residual.abs() / scale);
        }
    }
    Ok(worst)
}

/// Max relative gap between the two h evaluations on an n×n log grid with
/// δ ∈ [1e−3, 1] and ξ ∈ [1, 100], so δξ spans [1e−3, 100].
pub fn series_vs_closed(n: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &d in &log_space(1e-3, 1.0, n) {
        for &xi in &log_space(1.0, 100.0, n) {
            let closed = h_closed_unchecked(d, xi);
            let series = h_series_rel(d, xi, 1e-14)?;
            worst = worst.max((series - closed).abs() / closed.abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShallowChainMeasure {
    /// Frequencies at which L_δ(ξ) does not increase strictly along the chain.
    pub non_increasing: Vec<u32>,
    /// Frequencies at which some L_δ(ξ) >= ξ².
    pub above_limit: Vec<u32>,
    /// max over ξ of (ξ² − L_δ(ξ))/ξ² at the last δ of the chain.
    pub final_relative_gap: f64,
}

/// L_δ(ξ) along a decreasing δ-chain for ξ = 1..=xi_max.
pub fn shallow_chain(deltas: &[f64], xi_max: u32) -> ShallowChainMeasure {
    let mut m = ShallowChainMeasure {
        non_increasing: Vec::new(),
        above_limit: Vec::new(),
        final_relative_gap: 0.0,
    };
    for n in 1..=xi_max {
        let xi = n as f64;
        let values: Vec<f64> = deltas.iter().map(|&d| 3.0 / d * k_unchecked(d, xi)).collect();
        if values.windows(2).any(|w| w[0] >= w[1]) {
            m.non_increasing.push(n);
        }
        if values.iter().any(|&v| v >= xi * xi) {
            m.above_limit.push(n);
        }
        if let Some(&last) = values.last() {
            m.final_relative_gap = m.final_relative_gap.max((xi * xi - last) / (xi * xi));
        }
    }
    m
}

/// Per-frequency log-log slope of h(ξ,δ)/δ in δ.
pub fn h_over_delta_slopes(xi_max: u32, delta_min: f64, delta_max: f64, points: usize) -> Result<Vec<f64>> {
    let deltas = log_space(delta_min, delta_max, points);
    (1..=xi_max)
        .map(|n| {
            let ys: Vec<f64> = deltas
                .iter()
                .map(|&d| h_closed_unchecked(d, n as f64) / d)
                .collect();
            fit_power_law(&deltas, &ys).map(|f| f.slope)
        })
        .collect()
}

/// Measured C₀ = sup h(ξ,δ)/δ over δ ∈ (0, 1], |ξ| <= xi_max.
pub fn h_uniform_constant(xi_max: u32) -> f64 {
    let mut best: f64 = 0.0;
    for &d in &log_space(1e-4, 1.0, 60) {
        for n in 1..=xi_max {
            best = best.max(h_closed_unchecked(d, n as f64) / d);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantWithWitness {
    pub value: f64,
    pub delta: f64,
    pub xi: f64,
}

/// Measured c = inf L_δ(ξ)/|ξ| over δ ∈ (0,1) and integer 1 <= |ξ| <= xi_max.
pub fn shallow_lower_constant(xi_max: u32) -> ConstantWithWitness {
    let mut deltas = log_space(1e-4, 0.999, 80);
    deltas.push(1.0 - 1e-9);
    let mut best = ConstantWithWitness {
        value: f64::INFINITY,
        delta: f64::NAN,
        xi: f64::NAN,
    };
    for &d in &deltas {
        for n in 1..=xi_max {
            let xi = n as f64;
            let ratio = 3.0 / d * k_unchecked(d, xi) / xi;
            if ratio < best.value {
                best = ConstantWithWitness {
                    value: ratio,
                    delta: d,
                    xi,
                };
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    pub min: f64,
    pub max: f64,
}

impl Bracket {
    fn empty() -> Self {
        Self {
            min: f64::INFINITY,
            max: 0.0,
        }
    }

    fn push(&mut self, v: f64) {
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeepAsymptotics {
    /// |p(ξ)|/ξ² for |ξ| >= 2/δ.
    pub high: Bracket,
    /// |p(ξ)|/(δ|ξ|³) for |ξ| <= 1/(2δ).
    pub low: Bracket,
}

/// Two-sided constants for the deep dispersion in its two frequency ranges.
pub fn deep_asymptotics(deltas: &[f64], xi_max: u32) -> DeepAsymptotics {
    let mut high = Bracket::empty();
    let mut low = Bracket::empty();
    for &d in deltas {
        let depth = DepthParam::Deep { delta: d };
        let top = (xi_max as f64).max(4.0 / d);
        for &xi in &log_space(2.0 / d, top, 200) {
            high.push(depth.dispersion(xi).abs() / (xi * xi));
        }
        for &xi in &log_space(1e-6 / d, 0.5 / d, 200) {
            low.push(depth.dispersion(xi).abs() / (d * xi.powi(3)));
        }
    }
    DeepAsymptotics { high, low }
}

/// Every symbol-level measurement in one place.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolLemmaReport {
    pub sandwich: SandwichMeasure,
    pub k_monotone_violations: usize,
    pub q_range: RangeMeasure,
    pub taylor_residual: f64,
    pub series_vs_closed: f64,
    pub shallow_chain: ShallowChainMeasure,
    pub h_over_delta_slopes: Vec<f64>,
    pub h_uniform_constant: f64,
    pub shallow_lower_constant: ConstantWithWitness,
    pub deep_asymptotics: DeepAsymptotics,
}

impl SymbolLemmaReport {
    pub fn measure(s: &LemmaSampling) -> Result<Self> {
        let mut ascending = s.deep_deltas.clone();
        ascending.sort_by(f64::total_cmp);
        Ok(Self {
            sandwich: sandwich(&s.deep_deltas, s.xi_max),
            k_monotone_violations: k_monotone_violations(&ascending, s.xi_max),
            q_range: q_range(&s.deep_deltas, s.xi_max),
            taylor_residual: taylor_residual(&s.deep_deltas, s.xi_max)?,
            series_vs_closed: series_vs_closed(s.log_grid_points)?,
            shallow_chain: shallow_chain(&s.shallow_chain, s.chain_xi_max),
            h_over_delta_slopes: h_over_delta_slopes(
                s.chain_xi_max,
                s.slope_delta_min,
                s.slope_delta_max,
                s.slope_points,
            )?,
            h_uniform_constant: h_uniform_constant(1000),
            shallow_lower_constant: shallow_lower_constant(s.xi_max),
            deep_asymptotics: deep_asymptotics(&s.deep_deltas, s.xi_max),
        })
    }

    pub fn max_slope_deviation(&self, target: f64) -> f64 {
        self.h_over_delta_slopes
            .iter()
            .map(|s| (s - target).abs())
            .fold(0.0, f64::max)
    }
}
