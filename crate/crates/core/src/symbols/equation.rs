use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::functions::{k_unchecked, xcoth_minus_one};

/// Depth parameter δ together with the regime it is used in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DepthParam {
    /// Deep regime, δ >= 2.
    Deep { delta: f64 },
    /// Unscaled finite depth without a regime restriction, δ > 0.
    Finite { delta: f64 },
    /// δ = ∞, the Benjamin–Ono limit.
    Infinite,
    /// Shallow regime for the scaled equation, 0 < δ < 1.
    Shallow { delta: f64 },
    /// δ → 0 limit of the scaled equation (KdV).
    KdvLimit,
}

impl DepthParam {
    pub fn deep(delta: f64) -> Result<Self> {
        if !(delta >= 2.0 && delta.is_finite()) {
            return Err(Error::param(
                "depth.delta",
                format!("deep regime needs 2 <= delta < inf, got {delta}"),
            ));
        }
        Ok(DepthParam::Deep { delta })
    }

    pub fn finite(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::param(
                "depth.delta",
                format!("needs 0 < delta < inf, got {delta}"),
            ));
        }
        Ok(DepthParam::Finite { delta })
    }

    pub fn shallow(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param(
                "depth.delta",
                format!("shallow regime needs 0 < delta < 1, got {delta}"),
            ));
        }
        Ok(DepthParam::Shallow { delta })
    }

    /// δ as a number (`inf` for the deep limit, `0` for the KdV limit).
    pub fn delta(&self) -> f64 {
        match *self {
            DepthParam::Deep { delta }
            | DepthParam::Finite { delta }
            | DepthParam::Shallow { delta } => delta,
            DepthParam::Infinite => f64::INFINITY,
            DepthParam::KdvLimit => 0.0,
        }
    }

    pub fn regime(&self) -> Regime {
        match self {
            DepthParam::Shallow { .. } | DepthParam::KdvLimit => Regime::Shallow,
            _ => Regime::Deep,
        }
    }

    /// Dispersion relation p(ξ): ξK_δ(ξ), ξ|ξ|, ξL_δ(ξ) or ξ³.
    pub fn dispersion(&self, xi: f64) -> f64 {
        match *self {
            DepthParam::Deep { delta } | DepthParam::Finite { delta } => xi * k_unchecked(delta, xi),
            DepthParam::Infinite => xi * xi.abs(),
            DepthParam::Shallow { delta } => 3.0 / delta * xi * k_unchecked(delta, xi),
            DepthParam::KdvLimit => xi * xi * xi,
        }
    }

    /// ∂_ξ p(ξ), an even function.
    pub fn dispersion_slope(&self, xi: f64) -> f64 {
        // For p = ξ g(δξ)/δ: p' = (x − g(x))(x + g(x))/δ with x = δ|ξ|.
        let deep_slope = |delta: f64| {
            let x = delta * xi.abs();
            let g = xcoth_minus_one(x);
            (x - g) * (x + g) / delta
        };
        match *self {
            DepthParam::Deep { delta } | DepthParam::Finite { delta } => deep_slope(delta),
            DepthParam::Infinite => 2.0 * xi.abs(),
            DepthParam::Shallow { delta } => 3.0 / delta * deep_slope(delta),
            DepthParam::KdvLimit => 3.0 * xi * xi,
        }
    }
}

impl fmt::Display for DepthParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DepthParam::Deep { delta } => write!(f, "deep(delta={delta})"),
            DepthParam::Finite { delta } => write!(f, "finite(delta={delta})"),
            DepthParam::Infinite => write!(f, "infinite"),
            DepthParam::Shallow { delta } => write!(f, "shallow(delta={delta})"),
            DepthParam::KdvLimit => write!(f, "kdv-limit"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Deep,
    Shallow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// ∂t u − G_δ ∂x² u = ∂x(u^k) with δ >= 2.
    GilwDeep,
    /// Same equation at any finite depth (source of the scaling transform).
    Gilw,
    /// ∂t u − H ∂x² u = ∂x(u^k).
    Gbo,
    /// ∂t v − (3/δ) G_δ ∂x² v = ∂x(v^k) with 0 < δ < 1.
    ScaledGilw,
    /// ∂t v + ∂x³ v = ∂x(v^k).
    Gkdv,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::GilwDeep => "gilw-deep",
            Family::Gilw => "gilw",
            Family::Gbo => "gbo",
            Family::ScaledGilw => "scaled-gilw",
            Family::Gkdv => "gkdv",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One member of the equation family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquationSpec {
    family: Family,
    k: u32,
    depth: DepthParam,
}

impl EquationSpec {
    pub fn new(family: Family, k: u32, depth: DepthParam) -> Result<Self> {
        if k < 2 {
            return Err(Error::param("k", format!("nonlinearity power must be >= 2, got {k}")));
        }
        let consistent = matches!(
            (family, depth),
            (Family::GilwDeep, DepthParam::Deep { .. })
                | (Family::Gilw, DepthParam::Finite { .. })
                | (Family::Gbo, DepthParam::Infinite)
                | (Family::ScaledGilw, DepthParam::Shallow { .. })
                | (Family::Gkdv, DepthParam::KdvLimit)
        );
        if !consistent {
            return Err(Error::FamilyDepthMismatch {
                family: family.to_string(),
                depth: depth.to_string(),
            });
        }
        Ok(Self { family, k, depth })
    }

    pub fn gilw_deep(k: u32, delta: f64) -> Result<Self> {
        Self::new(Family::GilwDeep, k, DepthParam::deep(delta)?)
    }

    pub fn gilw(k: u32, delta: f64) -> Result<Self> {
        Self::new(Family::Gilw, k, DepthParam::finite(delta)?)
    }

    pub fn gbo(k: u32) -> Result<Self> {
        Self::new(Family::Gbo, k, DepthParam::Infinite)
    }

    pub fn scaled_gilw(k: u32, delta: f64) -> Result<Self> {
        Self::new(Family::ScaledGilw, k, DepthParam::shallow(delta)?)
    }

    pub fn gkdv(k: u32) -> Result<Self> {
        Self::new(Family::Gkdv, k, DepthParam::KdvLimit)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn depth(&self) -> DepthParam {
        self.depth
    }

    /// Finite depth of the unscaled ILW operator, if any (deep or finite).
    pub fn ilw_depth(&self) -> Option<f64> {
        match self.depth {
            DepthParam::Deep { delta } | DepthParam::Finite { delta } => Some(delta),
            _ => None,
        }
    }
}

impl fmt::Display for EquationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(k={}, {})", self.family, self.k, self.depth)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_ranges() {
        assert!(DepthParam::deep(2.0).is_ok());
        assert!(DepthParam::deep(1.5).is_err());
        assert!(DepthParam::deep(f64::INFINITY).is_err());
        assert!(DepthParam::shallow(0.5).is_ok());
        assert!(DepthParam::shallow(1.0).is_err());
        assert!(DepthParam::shallow(0.0).is_err());
        assert!(DepthParam::finite(0.5).is_ok());
        assert!(DepthParam::finite(-0.5).is_err());
    }

    #[test]
    fn family_depth_consistency() {
        assert!(EquationSpec::new(Family::GilwDeep, 2, DepthParam::Infinite).is_err());
        assert!(EquationSpec::new(Family::Gkdv, 2, DepthParam::KdvLimit).is_ok());
        assert!(EquationSpec::new(Family::Gbo, 2, DepthParam::shallow(0.5).unwrap()).is_err());
        assert!(EquationSpec::gbo(1).is_err());
    }

    #[test]
    fn slope_matches_finite_difference() {
        let depths = [
            DepthParam::deep(2.0).unwrap(),
            DepthParam::deep(40.0).unwrap(),
            DepthParam::Infinite,
            DepthParam::shallow(0.5).unwrap(),
            DepthParam::shallow(0.02).unwrap(),
            DepthParam::KdvLimit,
        ];
        for d in depths {
            for &xi in &[0.05, 0.7, 1.0, 3.0, 17.0] {
                let h = 1e-5 * xi;
                let fd = (d.dispersion(xi + h) - d.dispersion(xi - h)) / (2.0 * h);
                let an = d.dispersion_slope(xi);
                assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0), "{d} xi={xi}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn dispersion_is_odd() {
        let d = DepthParam::shallow(0.3).unwrap();
        for n in 0..50 {
            let xi = n as f64 * 0.37;
            assert_eq!(d.dispersion(-xi), -d.dispersion(xi));
        }
    }

    #[test]
    fn serde_depth_shape() {
        let json = serde_json::to_string(&DepthParam::Deep { delta: 4.0 }).unwrap();
        assert_eq!(json, r#"{"kind":"deep","delta":4.0}"#);
        let back: DepthParam = serde_json::from_str(r#"{"kind":"infinite"}"#).unwrap();
        assert_eq!(back, DepthParam::Infinite);
    }
}
