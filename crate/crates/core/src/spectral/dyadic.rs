//! Littlewood–Paley blocks, frequency envelopes and the envelope-weighted
//! Sobolev norm.
//!
//! Frequencies are measured by mode index `|m|`, which coincides with the
//! wavenumber on the 2π torus. Dyadic blocks are `N = 1, 2, 4, …, M/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Grid, SpectralField};

/// Shape of the dyadic multipliers φ_N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockProfile {
    /// φ_N(n) = η(n/N) − η(2n/N), φ_1 = η, with η a C² bump.
    #[default]
    Smooth,
    /// Indicator of `N/2 < |n| <= N` (and `|n| <= 1` for N = 1).
    Sharp,
}

/// Quintic smootherstep cutoff: 1 on [-1, 1], 0 outside (-2, 2), C² overall.
pub fn eta(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let s = a - 1.0;
        1.0 - s * s * s * (s * (6.0 * s - 15.0) + 10.0)
    }
}

/// Multiplier of block `block` evaluated at frequency `n`.
pub fn block_multiplier(n: f64, block: u64, profile: BlockProfile) -> f64 {
    let n = n.abs();
    let b = block as f64;
    match profile {
        BlockProfile::Smooth => {
            if block == 1 {
                eta(n)
            } else {
                eta(n / b) - eta(2.0 * n / b)
            }
        }
        BlockProfile::Sharp => {
            let inside = if block == 1 {
                n <= 1.0
            } else {
                n > b / 2.0 && n <= b
            };
            if inside {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Dyadic blocks represented on the grid: 1, 2, …, M/2.
pub fn dyadic_blocks(grid: &Grid) -> Vec<u64> {
    let top = grid.nyquist() as u64;
    std::iter::successors(Some(1u64), |n| Some(n * 2))
        .take_while(|&n| n <= top)
        .collect()
}

fn is_block(grid: &Grid, block: u64) -> bool {
    block.is_power_of_two() && block <= grid.nyquist() as u64
}

impl SpectralField {
    /// P_N u with the smooth profile. Blocks not represented on the grid give zero.
    pub fn project_dyadic(&self, block: u64) -> SpectralField {
        self.project_dyadic_with(block, BlockProfile::Smooth)
    }

    pub fn project_dyadic_with(&self, block: u64, profile: BlockProfile) -> SpectralField {
        if !is_block(self.grid(), block) {
            return SpectralField::zeros(*self.grid());
        }
        self.map_modes(|m, c| c * block_multiplier(m as f64, block, profile))
    }

    /// Sharp low-pass P_{<=K}: keeps modes with `|m| <= cutoff`.
    pub fn project_leq(&self, cutoff: f64) -> SpectralField {
        self.map_modes(|m, c| {
            if (m as f64) <= cutoff {
                c
            } else {
                c * 0.0
            }
        })
    }
}

/// Monotone, κ-tempered dyadic weights ω_N for N = 1, 2, 4, ….
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEnvelope {
    weights: Vec<f64>,
    kappa: f64,
}

// Relative slack when checking ω_{2N} <= κω_N, to absorb rounding in
// weights computed as powers.
const TEMPER_SLACK: f64 = 1e-12;

impl FrequencyEnvelope {
    /// `weights[j]` is ω at block N = 2^j.
    pub fn new(weights: Vec<f64>, kappa: f64) -> Result<Self> {
        if !(kappa >= 1.0 && kappa.is_finite()) {
            return Err(Error::param("kappa", format!("must be >= 1, got {kappa}")));
        }
        if weights.is_empty() {
            return Err(Error::param("weights", "at least one block is required"));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::param("weights", format!("must be positive, got {w}")));
        }
        for (j, pair) in weights.windows(2).enumerate() {
            let (lo, hi) = (pair[0], pair[1]);
            if hi < lo || hi > kappa * lo * (1.0 + TEMPER_SLACK) {
                return Err(Error::param(
                    "weights",
                    format!(
                        "blocks {} and {} violate w_N <= w_2N <= kappa w_N ({lo}, {hi}, kappa = {kappa})",
                        1u64 << j,
                        1u64 << (j + 1)
                    ),
                ));
            }
        }
        Ok(Self { weights, kappa })
    }

    /// Envelope over every block of `grid` with ω_N = f(N).
    pub fn from_fn(grid: &Grid, kappa: f64, f: impl Fn(u64) -> f64) -> Result<Self> {
        Self::new(dyadic_blocks(grid).into_iter().map(f).collect(), kappa)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn weight(&self, block: u64) -> Option<f64> {
        if !block.is_power_of_two() {
            return None;
        }
        self.weights.get(block.trailing_zeros() as usize).copied()
    }

    /// ω̃_N = min_{N'} ω_{N'} (κ')^{|log₂(N/N')|}: a κ'-tempered minorant of ω.
    ///
    /// `kappa_prime` must lie in (1, κ]; at κ' = κ the envelope is returned
    /// unchanged up to rounding.
    pub fn regularize(&self, kappa_prime: f64) -> Result<Self> {
        if !(kappa_prime > 1.0 && kappa_prime <= self.kappa) {
            return Err(Error::param(
                "kappa_prime",
                format!("must lie in (1, {}], got {kappa_prime}", self.kappa),
            ));
        }
        let n = self.weights.len();
        let weights = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| self.weights[i] * kappa_prime.powi((j as i32 - i as i32).abs()))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        Self::new(weights, kappa_prime)
    }
}

pub fn regularize_envelope(env: &FrequencyEnvelope, kappa_prime: f64) -> Result<FrequencyEnvelope> {
    env.regularize(kappa_prime)
}

/// (Σ_N ω_N² (1∨N)^{2s} ‖P_N u‖²)^{1/2}.
pub fn envelope_norm(
    field: &SpectralField,
    s: f64,
    env: &FrequencyEnvelope,
    profile: BlockProfile,
) -> Result<f64> {
    let blocks = dyadic_blocks(field.grid());
    if env.weights().len() < blocks.len() {
        return Err(Error::param(
            "envelope",
            format!(
                "has {} blocks but the grid needs {}",
                env.weights().len(),
                blocks.len()
            ),
        ));
    }
    let total: f64 = blocks
        .iter()
        .zip(env.weights())
        .map(|(&n, &w)| {
            let piece = field.project_dyadic_with(n, profile);
            w * w * (n as f64).max(1.0).powf(2.0 * s) * piece.l2_norm().powi(2)
        })
        .sum();
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random_hs_field;

    fn sample_field() -> SpectralField {
        let g = Grid::torus(64).unwrap();
        random_hs_field(&g, 0.5, 1.0, 7)
    }

    #[test]
    fn eta_shape() {
        assert_eq!(eta(0.0), 1.0);
        assert_eq!(eta(1.0), 1.0);
        assert_eq!(eta(-1.0), 1.0);
        assert_eq!(eta(2.0), 0.0);
        assert!((eta(1.5) - 0.5).abs() < 1e-15);
        for i in 0..100 {
            let x = 1.0 + i as f64 / 100.0;
            assert!(eta(x) >= eta(x + 0.01));
        }
    }

    #[test]
    fn smooth_blocks_are_a_partition_of_unity() {
        let u = sample_field();
        let mut sum = SpectralField::zeros(*u.grid());
        for n in dyadic_blocks(u.grid()) {
            sum = sum.add_scaled(1.0, &u.project_dyadic(n)).unwrap();
        }
        let err = u
            .coeffs()
            .iter()
            .zip(sum.coeffs())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-14, "err = {err}");
    }

    #[test]
    fn block_supports() {
        for n in [2u64, 4, 8, 16] {
            for m in 0..64 {
                let w = block_multiplier(m as f64, n, BlockProfile::Smooth);
                let inside = (m as f64) > n as f64 / 2.0 && (m as f64) < 2.0 * n as f64;
                if !inside {
                    assert_eq!(w, 0.0, "N={n} m={m}");
                }
            }
        }
        assert_eq!(block_multiplier(2.0, 1, BlockProfile::Smooth), 0.0);
        assert_eq!(block_multiplier(1.0, 1, BlockProfile::Smooth), 1.0);
    }

    #[test]
    fn off_grid_block_is_zero() {
        let u = sample_field();
        assert_eq!(u.project_dyadic(64), SpectralField::zeros(*u.grid()));
        assert_eq!(u.project_dyadic(3), SpectralField::zeros(*u.grid()));
    }

    #[test]
    fn project_leq_edges() {
        let u = sample_field();
        let low = u.project_leq(0.0);
        assert_eq!(low.coeff(0), u.coeff(0));
        assert!(low.coeffs()[1..].iter().all(|c| c.norm() == 0.0));
        assert_eq!(u.project_leq(32.0), u);
        assert_eq!(u.project_leq(1e9), u);
    }

    #[test]
    fn envelope_validation() {
        assert!(FrequencyEnvelope::new(vec![1.0, 2.0, 4.0], 2.0).is_ok());
        assert!(FrequencyEnvelope::new(vec![1.0, 2.5], 2.0).is_err());
        assert!(FrequencyEnvelope::new(vec![2.0, 1.0], 2.0).is_err());
        assert!(FrequencyEnvelope::new(vec![1.0, 0.0], 2.0).is_err());
        assert!(FrequencyEnvelope::new(vec![1.0], 0.5).is_err());
    }

    #[test]
    fn regularize_examples() {
        let blocks: Vec<f64> = (0..=10).map(|j| (1u64 << j) as f64).collect();
        let env = FrequencyEnvelope::new(blocks.clone(), 2.0).unwrap();
        let same = env.regularize(2.0).unwrap();
        assert_eq!(same.weights(), env.weights());

        let reg = env.regularize(2f64.sqrt()).unwrap();
        for (j, (&w, &orig)) in reg.weights().iter().zip(&blocks).enumerate() {
            let expected = 2f64.powf(j as f64 / 2.0);
            assert!((w - expected).abs() < 1e-12 * expected, "j={j}: {w} vs {expected}");
            assert!(w <= orig);
        }

        let flat = FrequencyEnvelope::new(vec![1.0; 6], 3.0).unwrap();
        assert!(flat.regularize(1.5).unwrap().weights().iter().all(|&w| w == 1.0));

        assert!(env.regularize(1.0).is_err());
        assert!(env.regularize(2.5).is_err());
    }

    #[test]
    fn envelope_norm_rejects_short_envelope() {
        let u = sample_field();
        let env = FrequencyEnvelope::new(vec![1.0; 3], 2.0).unwrap();
        assert!(envelope_norm(&u, 1.0, &env, BlockProfile::Smooth).is_err());
    }
}
