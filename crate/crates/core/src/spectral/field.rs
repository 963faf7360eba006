use num_complex::Complex64;

use crate::error::{Error, Result};

use super::grid::RealTransform;
use super::Grid;

/// Fourier coefficients of a real periodic function on a [`Grid`].
///
/// Only modes `0..=M/2` are stored, so Hermitian symmetry
/// `coeff(-m) = conj(coeff(m))` holds exactly by construction. The mean and
/// Nyquist coefficients are kept real.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.spectral_len()],
        }
    }

    /// Builds a field from the non-negative half spectrum. The imaginary
    /// parts of the mean and Nyquist entries are dropped.
    pub(crate) fn from_half_spectrum(grid: Grid, mut coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.spectral_len());
        coeffs[0].im = 0.0;
        let last = coeffs.len() - 1;
        coeffs[last].im = 0.0;
        Self { grid, coeffs }
    }

    pub fn from_coefficients(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.spectral_len() {
            return Err(Error::SizeMismatch {
                expected: grid.spectral_len(),
                got: coeffs.len(),
            });
        }
        Ok(Self::from_half_spectrum(grid, coeffs))
    }

    /// Samples `f` on the grid points and transforms.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let samples: Vec<f64> = grid.points().into_iter().map(f).collect();
        grid.to_spectral(&samples).expect("sample count matches grid")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Half spectrum, index `m` holds mode `m` for `0 <= m <= M/2`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of mode `m`; zero outside the represented range.
    pub fn coeff(&self, m: i64) -> Complex64 {
        let n = self.grid.nyquist() as i64;
        if m >= 0 && m <= n {
            self.coeffs[m as usize]
        } else if m < 0 && -m < n {
            self.coeffs[(-m) as usize].conj()
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn set_coeff(&mut self, m: i64, value: Complex64) {
        let n = self.grid.nyquist() as i64;
        if m == 0 || m == n {
            self.coeffs[m as usize] = Complex64::new(value.re, 0.0);
        } else if m > 0 && m < n {
            self.coeffs[m as usize] = value;
        } else if m < 0 && -m < n {
            self.coeffs[(-m) as usize] = value.conj();
        }
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn nyquist_coeff(&self) -> f64 {
        self.coeffs[self.grid.nyquist()].re
    }

    pub fn without_nyquist(mut self) -> Self {
        let n = self.grid.nyquist();
        self.coeffs[n] = Complex64::new(0.0, 0.0);
        self
    }

    pub fn to_physical(&self) -> Vec<f64> {
        let transform = RealTransform::new(self.grid.modes());
        let mut spectrum = self.coeffs.clone();
        let mut out = vec![0.0; self.grid.modes()];
        transform.inverse(&mut spectrum, &mut out);
        out
    }

    pub fn max_abs_physical(&self) -> f64 {
        self.to_physical().iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Σ_m w(m)|û(m)|² over all represented modes, given a weight on m >= 0.
    pub(crate) fn weighted_energy(&self, weight: impl Fn(usize) -> f64) -> f64 {
        let n = self.grid.nyquist();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| {
                let multiplicity = if m == 0 || m == n { 1.0 } else { 2.0 };
                multiplicity * weight(m) * c.norm_sqr()
            })
            .sum()
    }

    /// (Σ_m |û(m)|²)^{1/2}, the mean-square norm (1/L)∫|u|² under our normalization.
    pub fn l2_norm(&self) -> f64 {
        self.weighted_energy(|_| 1.0).sqrt()
    }

    /// (Σ_m ⟨ξ_m⟩^{2s} |û(m)|²)^{1/2} with ⟨ξ⟩ = (1 + ξ²)^{1/2}.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let grid = self.grid;
        self.weighted_energy(|m| {
            let xi = grid.wavenumber(m as i64);
            (1.0 + xi * xi).powf(s)
        })
        .sqrt()
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::SizeMismatch {
                expected: self.grid.modes(),
                got: other.grid.modes(),
            });
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            grid: self.grid,
            coeffs,
        })
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: f64, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b * factor)
            .collect();
        Ok(Self {
            grid: self.grid,
            coeffs,
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Applies a real even multiplier given on mode indices `m >= 0`.
    pub fn map_modes(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, &c)| f(m, c))
            .collect();
        Self::from_half_spectrum(self.grid, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_samples_give_zero_field() {
        let g = Grid::torus(16).unwrap();
        let f = g.to_spectral(&[0.0; 16]).unwrap();
        assert!(f.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn cosine_has_half_coefficients() {
        let g = Grid::torus(16).unwrap();
        let f = SpectralField::from_fn(g, f64::cos);
        for m in g.mode_indices() {
            let expected = if m.abs() == 1 { 0.5 } else { 0.0 };
            assert!((f.coeff(m) - Complex64::new(expected, 0.0)).norm() < 1e-15, "m={m}");
        }
    }

    #[test]
    fn hermitian_accessors() {
        let g = Grid::torus(8).unwrap();
        let mut f = SpectralField::zeros(g);
        f.set_coeff(-2, Complex64::new(1.0, 2.0));
        assert_eq!(f.coeff(2), Complex64::new(1.0, -2.0));
        assert_eq!(f.coeff(-2), Complex64::new(1.0, 2.0));
        f.set_coeff(4, Complex64::new(3.0, 5.0));
        assert_eq!(f.coeff(4), Complex64::new(3.0, 0.0));
        assert_eq!(f.coeff(-4), Complex64::new(0.0, 0.0));
        assert_eq!(f.coeff(9), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn sobolev_of_cosine() {
        let g = Grid::torus(16).unwrap();
        let f = SpectralField::from_fn(g, f64::cos);
        // ⟨1⟩² = 2, two modes of weight 1/4.
        assert!((f.sobolev_norm(1.0) - 1.0).abs() < 1e-14);
        assert_eq!(SpectralField::zeros(g).sobolev_norm(3.5), 0.0);
        let h = Grid::new(16, 4.0 * PI).unwrap();
        let f = SpectralField::from_fn(h, |x| (x / 2.0).cos());
        assert!((f.sobolev_norm(1.0) - (2.0 * 0.25 * 1.25f64).sqrt()).abs() < 1e-14);
    }
}
