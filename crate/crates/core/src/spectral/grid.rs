use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::SpectralField;

/// Uniform periodic grid of `modes` points on `[0, period)`.
///
/// Spectral data is stored for the non-negative mode indices `0..=modes/2`;
/// the negative half follows from Hermitian symmetry. Represented mode
/// indices are `-modes/2 + 1 ..= modes/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    modes: usize,
    period: f64,
}

impl Grid {
    pub const MIN_MODES: usize = 8;

    pub fn new(modes: usize, period: f64) -> Result<Self> {
        if modes < Self::MIN_MODES || !modes.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "modes must be a power of two >= {}, got {modes}",
                Self::MIN_MODES
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        Ok(Self { modes, period })
    }

    /// Grid on the standard circle of length 2π.
    pub fn torus(modes: usize) -> Result<Self> {
        Self::new(modes, 2.0 * PI)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn nyquist(&self) -> usize {
        self.modes / 2
    }

    /// Length of the stored half spectrum.
    pub fn spectral_len(&self) -> usize {
        self.modes / 2 + 1
    }

    pub fn mode_indices(&self) -> std::ops::RangeInclusive<i64> {
        -(self.nyquist() as i64) + 1..=self.nyquist() as i64
    }

    /// Physical wavenumber ξ_m = 2πm/L.
    pub fn wavenumber(&self, m: i64) -> f64 {
        2.0 * PI * m as f64 / self.period
    }

    pub fn xi_max(&self) -> f64 {
        self.wavenumber(self.nyquist() as i64)
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.period / self.modes as f64;
        (0..self.modes).map(|j| j as f64 * h).collect()
    }

    /// Discrete Fourier coefficients û(m) = (1/M) Σ_j u(x_j) e^{-iξ_m x_j}.
    pub fn to_spectral(&self, samples: &[f64]) -> Result<SpectralField> {
        if samples.len() != self.modes {
            return Err(Error::SizeMismatch {
                expected: self.modes,
                got: samples.len(),
            });
        }
        let transform = RealTransform::new(self.modes);
        let mut input = samples.to_vec();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.spectral_len()];
        transform.forward(&mut input, &mut coeffs);
        let scale = 1.0 / self.modes as f64;
        for c in coeffs.iter_mut() {
            *c *= scale;
        }
        Ok(SpectralField::from_half_spectrum(*self, coeffs))
    }

    pub fn to_physical(&self, field: &SpectralField) -> Result<Vec<f64>> {
        if field.grid() != self {
            return Err(Error::SizeMismatch {
                expected: self.modes,
                got: field.grid().modes(),
            });
        }
        Ok(field.to_physical())
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid(M={}, L={})", self.modes, self.period)
    }
}

/// Cached real-to-complex transform pair of a fixed length (unnormalized).
#[derive(Clone)]
pub struct RealTransform {
    len: usize,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

impl fmt::Debug for RealTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealTransform").field("len", &self.len).finish()
    }
}

impl RealTransform {
    pub fn new(len: usize) -> Self {
        let mut planner = RealFftPlanner::<f64>::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spectrum_len(&self) -> usize {
        self.len / 2 + 1
    }

    /// `samples` is used as scratch.
    pub fn forward(&self, samples: &mut [f64], spectrum: &mut [Complex64]) {
        self.forward
            .process(samples, spectrum)
            .expect("forward transform buffers sized by construction");
    }

    /// Inverse without normalization. The imaginary parts of the mean and
    /// (for even lengths) the Nyquist entry are discarded.
    pub fn inverse(&self, spectrum: &mut [Complex64], samples: &mut [f64]) {
        spectrum[0].im = 0.0;
        if self.len.is_multiple_of(2) {
            spectrum[self.len / 2].im = 0.0;
        }
        self.inverse
            .process(spectrum, samples)
            .expect("inverse transform buffers sized by construction");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_frequencies() {
        let g = Grid::torus(8).unwrap();
        assert_eq!(g.mode_indices().collect::<Vec<_>>(), vec![-3, -2, -1, 0, 1, 2, 3, 4]);
        for m in g.mode_indices() {
            assert!((g.wavenumber(m) - m as f64).abs() < 1e-15);
        }
        let g = Grid::new(8, 4.0 * PI).unwrap();
        assert!((g.wavenumber(1) - 0.5).abs() < 1e-15);
        assert_eq!(g.wavenumber(0), 0.0);
        assert_eq!(g.wavenumber(-3), -g.wavenumber(3));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::torus(7).is_err());
        assert!(Grid::torus(4).is_err());
        assert!(Grid::torus(100).is_err());
        assert!(Grid::new(16, 0.0).is_err());
        assert!(Grid::new(16, -1.0).is_err());
        assert!(Grid::new(16, f64::NAN).is_err());
    }

    #[test]
    fn size_mismatch() {
        let g = Grid::torus(16).unwrap();
        assert!(matches!(
            g.to_spectral(&[0.0; 8]),
            Err(Error::SizeMismatch { expected: 16, got: 8 })
        ));
    }
}
