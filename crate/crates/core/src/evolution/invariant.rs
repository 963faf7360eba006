use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{Grid, RealTransform, SpectralField};
use crate::symbols::k_delta;

/// Which sign the last term of I₂ carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum I2Sign {
    /// +(3/(8δ)) u G_δ∂x u, as printed.
    Printed,
    /// −(3/(8δ)) u G_δ∂x u, the variant conserved by ∂t u − G_δ∂x²u = ∂x(u²).
    Corrected,
}

/// Pseudospectral evaluator of
/// I₂(u) = ∫ ¼u⁴ + ¾u²Gu + ⅛(∂x u)² + ⅜(Gu)² ± (3/(8δ)) u Gu dx, with Gu = G_δ∂x u.
///
/// G_δ∂x has the real even symbol K_δ(ξ). All products are formed on a grid
/// of 2M points, where the quartic term is still integrated exactly.
#[derive(Debug, Clone)]
pub struct I2Evaluator {
    grid: Grid,
    delta: f64,
    transform: RealTransform,
    k_symbol: Vec<f64>,
    xi: Vec<f64>,
}

impl I2Evaluator {
    pub fn new(grid: Grid, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::param(
                "delta",
                format!("I2 needs a finite depth delta > 0, got {delta}"),
            ));
        }
        let xi: Vec<f64> = (0..grid.spectral_len())
            .map(|m| grid.wavenumber(m as i64))
            .collect();
        let k_symbol = xi
            .iter()
            .map(|&x| k_delta(delta, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid,
            delta,
            transform: RealTransform::new(2 * grid.modes()),
            k_symbol,
            xi,
        })
    }

    fn padded_samples(&self, coeffs: impl Iterator<Item = Complex64>) -> Vec<f64> {
        let mut spectrum = vec![Complex64::new(0.0, 0.0); self.transform.spectrum_len()];
        for (slot, c) in spectrum.iter_mut().zip(coeffs) {
            *slot = c;
        }
        let mut out = vec![0.0; self.transform.len()];
        self.transform.inverse(&mut spectrum, &mut out);
        out
    }

    pub fn evaluate(&self, field: &SpectralField, sign: I2Sign) -> Result<f64> {
        if field.grid() != &self.grid {
            return Err(Error::SizeMismatch {
                expected: self.grid.modes(),
                got: field.grid().modes(),
            });
        }
        let n = self.grid.nyquist();
        let c = &field.coeffs()[..n];
        let u = self.padded_samples(c.iter().copied());
        let gu = self.padded_samples(c.iter().zip(&self.k_symbol).map(|(c, k)| c * k));
        let ux = self.padded_samples(c.iter().zip(&self.xi).map(|(c, x)| c * Complex64::new(0.0, *x)));
        let last = match sign {
            I2Sign::Printed => 3.0 / (8.0 * self.delta),
            I2Sign::Corrected => -3.0 / (8.0 * self.delta),
        };
        let sum: f64 = u
            .iter()
            .zip(&gu)
            .zip(&ux)
            .map(|((&u, &g), &d)| {
                let u2 = u * u;
                0.25 * u2 * u2 + 0.75 * u2 * g + 0.125 * d * d + 0.375 * g * g + last * u * g
            })
            .sum();
        Ok(self.grid.period() * sum / u.len() as f64)
    }
}

/// I₂ with the last term as printed.
pub fn invariant_i2(field: &SpectralField, delta: f64) -> Result<f64> {
    I2Evaluator::new(*field.grid(), delta)?.evaluate(field, I2Sign::Printed)
}

/// I₂ with the sign of the last term flipped.
pub fn invariant_i2_corrected(field: &SpectralField, delta: f64) -> Result<f64> {
    I2Evaluator::new(*field.grid(), delta)?.evaluate(field, I2Sign::Corrected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_field() {
        let g = Grid::torus(32).unwrap();
        assert_eq!(invariant_i2(&SpectralField::zeros(g), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn cosine_closed_form() {
        let g = Grid::torus(32).unwrap();
        let u = SpectralField::from_fn(g, f64::cos);
        let k = 0.3130352854993312;
        let base = 3.0 * PI / 16.0 + PI / 8.0 + 3.0 * k * k * PI / 8.0;
        let printed = base + 3.0 * k * PI / 8.0;
        let corrected = base - 3.0 * k * PI / 8.0;
        assert!((invariant_i2(&u, 1.0).unwrap() - printed).abs() < 1e-13);
        assert!((invariant_i2_corrected(&u, 1.0).unwrap() - corrected).abs() < 1e-13);
    }

    #[test]
    fn rejects_infinite_depth() {
        let g = Grid::torus(16).unwrap();
        assert!(invariant_i2(&SpectralField::zeros(g), f64::INFINITY).is_err());
        assert!(invariant_i2(&SpectralField::zeros(g), 0.0).is_err());
    }
}
