use serde::Serialize;

use crate::error::{Error, Result};

/// Least-squares line through (log x, log y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute misfit in log space.
    pub residual: f64,
}

impl PowerFit {
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

pub const MIN_FIT_POINTS: usize = 4;

/// Fit y ≈ e^intercept · x^slope by ordinary least squares in log-log space.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerFit> {
    if xs.len() != ys.len() {
        return Err(Error::SizeMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "need at least {MIN_FIT_POINTS} points, got {}",
            xs.len()
        )));
    }
    if let Some((x, y)) = xs
        .iter()
        .zip(ys)
        .find(|(x, y)| !(**x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::Fit(format!(
            "log-log fit needs finite positive data, got ({x}, {y}); a zero error means the comparison is degenerate"
        )));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(PowerFit {
        slope,
        intercept,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_inverse_law() {
        let xs = [2.0, 4.0, 8.0, 16.0];
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 / x).collect();
        let f = fit_power_law(&xs, &ys).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
        assert!(f.intercept.abs() < 1e-12);
    }

    #[test]
    fn exact_square_law() {
        let xs = [0.4, 0.2, 0.1, 0.05];
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let f = fit_power_law(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.predict(0.3) - 0.09).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(fit_power_law(&[1.0, 2.0, 3.0, 4.0], &[1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(fit_power_law(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_power_law(&[2.0; 4], &[1.0, 2.0, 3.0, 4.0]).is_err());
        assert!(fit_power_law(&[1.0, 2.0], &[1.0]).is_err());
    }
}
