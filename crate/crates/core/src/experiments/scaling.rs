use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{Diagnostics, Solver, SolverConfig, Trajectory};
use crate::spectral::{Grid, SpectralField};
use crate::symbols::EquationSpec;

/// Amplitude a in v(t) = a·u(3t/δ) so that v solves the scaled equation: a = (δ/3)^{1/(1−k)}.
pub fn scaling_amplitude(delta: f64, k: u32) -> f64 {
    (delta / 3.0).powf(1.0 / (1.0 - k as f64))
}

fn check_transform_args(delta: f64, k: u32) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", format!("must be finite and positive, got {delta}")));
    }
    if k < 2 {
        return Err(Error::param("k", format!("must be >= 2, got {k}")));
    }
    Ok(())
}

/// Maps a trajectory u of the unscaled equation at depth δ to
/// v(t) = a·u(3t/δ): each u-snapshot at time τ becomes a v-snapshot at δτ/3.
pub fn apply_scaling_transform(traj: &Trajectory, delta: f64, k: u32) -> Result<Trajectory> {
    check_transform_args(delta, k)?;
    let a = scaling_amplitude(delta, k);
    let s = traj.hs_order();
    // With δ = 3 both factors are exactly one and the map is the identity.
    let time = move |tau: f64| if delta == 3.0 { tau } else { tau * delta / 3.0 };
    Ok(traj.map_snapshots(
        time,
        |f| if a == 1.0 { f.clone() } else { f.scaled(a) },
        |_, t, f| Diagnostics {
            t,
            mean: f.mean(),
            l2: f.l2_norm(),
            hs: f.sobolev_norm(s),
            i2: None,
            i2_corrected: None,
        },
    ))
}

/// v at time `t`, read from the u-trajectory at 3t/δ.
pub fn sample_scaled(traj: &Trajectory, delta: f64, k: u32, t: f64) -> Result<SpectralField> {
    check_transform_args(delta, k)?;
    let tau = 3.0 * t / delta;
    traj.at_time(tau, 1e-12)
        .map(|u| u.scaled(scaling_amplitude(delta, k)))
        .ok_or(Error::MissingSnapshot(tau))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingCheck {
    pub delta: f64,
    pub k: u32,
    pub amplitude: f64,
    /// max_t ‖v_direct − v_transformed‖_{H^s} / max_t ‖v_direct‖_{H^s}.
    pub relative_discrepancy: f64,
    pub snapshots: usize,
}

/// Solves the scaled equation for `v0` directly and through the unscaled
/// equation with u₀ = v₀/a on the dilated time axis, then compares.
pub fn scaling_check(
    v0: &SpectralField,
    delta: f64,
    k: u32,
    final_time: f64,
    s: f64,
    truncation: Option<f64>,
) -> Result<ScalingCheck> {
    check_transform_args(delta, k)?;
    let grid: Grid = *v0.grid();
    let direct_config = SolverConfig::new(EquationSpec::scaled_gilw(k, delta)?, grid, final_time, v0)?
        .truncated(truncation);
    let direct = Solver::new(direct_config.clone())?.evolve(v0)?.healthy()?;

    let a = scaling_amplitude(delta, k);
    let dilation = 3.0 / delta;
    let u0 = v0.scaled(1.0 / a);
    let mut source_config = direct_config.clone();
    source_config.spec = EquationSpec::gilw(k, delta)?;
    source_config.final_time = final_time * dilation;
    source_config.dt = direct_config.dt * dilation;
    let source = Solver::new(source_config)?.evolve(&u0)?.healthy()?;
    let transformed = apply_scaling_transform(&source, delta, k)?;

    let gap = direct.max_difference(&transformed, s)?;
    let scale = direct
        .snapshots()
        .iter()
        .map(|sn| sn.field.sobolev_norm(s))
        .fold(0.0, f64::max);
    Ok(ScalingCheck {
        delta,
        k,
        amplitude: a,
        relative_discrepancy: if scale > 0.0 { gap / scale } else { gap },
        snapshots: direct.snapshots().len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amplitude_examples() {
        assert_eq!(scaling_amplitude(3.0, 2), 1.0);
        assert!((scaling_amplitude(6.0, 2) - 0.5).abs() < 1e-15);
        assert!((scaling_amplitude(0.5, 2) - 6.0).abs() < 1e-14);
        // k = 3: a² = 3/δ.
        assert!((scaling_amplitude(0.75, 3) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn delta_three_is_identity() {
        let grid = Grid::torus(32).unwrap();
        let u0 = SpectralField::from_fn(grid, |x| x.cos() + 0.3 * (2.0 * x).sin());
        let config = SolverConfig::new(EquationSpec::gilw(2, 3.0).unwrap(), grid, 0.05, &u0).unwrap();
        let traj = Solver::new(config).unwrap().evolve(&u0).unwrap();
        let v = apply_scaling_transform(&traj, 3.0, 2).unwrap();
        assert_eq!(v.snapshots(), traj.snapshots());
    }

    #[test]
    fn missing_time_is_reported() {
        let grid = Grid::torus(32).unwrap();
        let u0 = SpectralField::from_fn(grid, f64::cos);
        let config = SolverConfig::new(EquationSpec::gilw(2, 6.0).unwrap(), grid, 0.1, &u0).unwrap();
        let traj = Solver::new(config).unwrap().evolve(&u0).unwrap();
        // v at t = 0.05 needs u at 0.025, which is a snapshot only if the stride lands on it.
        assert!(sample_scaled(&traj, 6.0, 2, 0.05).is_ok());
        assert!(matches!(
            sample_scaled(&traj, 6.0, 2, 0.0123),
            Err(Error::MissingSnapshot(_))
        ));
    }
}
