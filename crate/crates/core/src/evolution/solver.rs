use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{Grid, RealTransform, SpectralField};
use crate::symbols::{EquationSpec, SymbolTable};

use super::config::{default_padding, SolverConfig};
use super::invariant::{I2Evaluator, I2Sign};
use super::trajectory::{BlowUp, Diagnostics, Snapshot, Trajectory};

/// L² growth factor treated as blow-up.
pub const BLOW_UP_GROWTH: f64 = 1e6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// e^{i t p(m)} for m = 0..=M/2; the negative modes are the conjugates.
pub fn linear_propagator(table: &SymbolTable, t: f64) -> Vec<Complex64> {
    table
        .dispersion_half()
        .iter()
        .map(|&p| Complex64::from_polar(1.0, t * p))
        .collect()
}

/// ∂x(u^k) on the base grid, with u^k formed on `padding · M` points.
pub fn nonlinear_term(field: &SpectralField, k: u32, padding: usize) -> SpectralField {
    let mut op = NonlinearOperator::new(*field.grid(), k, padding, None);
    let mut out = vec![ZERO; field.coeffs().len()];
    op.apply(field.coeffs(), &mut out);
    SpectralField::from_half_spectrum(*field.grid(), out)
}

/// One IF-RK4 step of `state` by `dt` for `spec` with default padding.
pub fn step_ifrk4(state: &SpectralField, dt: f64, table: &SymbolTable) -> SpectralField {
    let mut op = NonlinearOperator::new(*state.grid(), table.spec().k(), default_padding(table.spec().k()), None);
    let mut stepper = Stepper::new(table.dispersion_half().to_vec());
    let mut next = vec![ZERO; state.coeffs().len()];
    stepper.step(&mut op, state.coeffs(), dt, false, &mut next);
    SpectralField::from_half_spectrum(*state.grid(), next)
}

#[derive(Debug, Clone)]
struct NonlinearOperator {
    k: i32,
    transform: RealTransform,
    spectrum: Vec<Complex64>,
    samples: Vec<f64>,
    /// iξ_m, or zero for the mean, the Nyquist mode and truncated modes.
    derivative: Vec<Complex64>,
}

impl NonlinearOperator {
    fn new(grid: Grid, k: u32, padding: usize, truncation: Option<f64>) -> Self {
        let len = padding * grid.modes();
        let transform = RealTransform::new(len);
        let scale = 1.0 / len as f64;
        let n = grid.nyquist();
        let derivative = (0..=n)
            .map(|m| {
                let kept = truncation.is_none_or(|c| m as f64 <= c);
                if m == 0 || m == n || !kept {
                    ZERO
                } else {
                    Complex64::new(0.0, grid.wavenumber(m as i64) * scale)
                }
            })
            .collect();
        Self {
            k: k as i32,
            spectrum: vec![ZERO; transform.spectrum_len()],
            samples: vec![0.0; len],
            transform,
            derivative,
        }
    }

    fn apply(&mut self, u: &[Complex64], out: &mut [Complex64]) {
        let n = u.len() - 1;
        self.spectrum.fill(ZERO);
        self.spectrum[..n].copy_from_slice(&u[..n]);
        self.transform.inverse(&mut self.spectrum, &mut self.samples);
        for v in self.samples.iter_mut() {
            *v = v.powi(self.k);
        }
        self.transform.forward(&mut self.samples, &mut self.spectrum);
        for ((o, s), d) in out.iter_mut().zip(&self.spectrum).zip(&self.derivative) {
            *o = s * d;
        }
    }
}

/// Integrating-factor RK4 on a fixed dispersion, caching the phases of the last dt.
#[derive(Debug, Clone)]
struct Stepper {
    dispersion: Vec<f64>,
    cached_dt: f64,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    stages: [Vec<Complex64>; 5],
}

impl Stepper {
    fn new(dispersion: Vec<f64>) -> Self {
        let len = dispersion.len();
        Self {
            dispersion,
            cached_dt: f64::NAN,
            half: vec![ZERO; len],
            full: vec![ZERO; len],
            stages: std::array::from_fn(|_| vec![ZERO; len]),
        }
    }

    fn phases(&mut self, dt: f64) {
        if self.cached_dt == dt {
            return;
        }
        for ((h, f), &p) in self.half.iter_mut().zip(self.full.iter_mut()).zip(&self.dispersion) {
            *h = Complex64::from_polar(1.0, 0.5 * dt * p);
            *f = Complex64::from_polar(1.0, dt * p);
        }
        self.cached_dt = dt;
    }

    /// With E = e^{i dt p/2}:
    /// k₁ = N(u), k₂ = N(E(u + dt/2 k₁)), k₃ = N(Eu + dt/2 k₂), k₄ = N(E²u + dt E k₃),
    /// u⁺ = E²u + dt/6 (E²k₁ + 2E(k₂ + k₃) + k₄).
    fn step(&mut self, op: &mut NonlinearOperator, u: &[Complex64], dt: f64, linear_only: bool, out: &mut [Complex64]) {
        self.phases(dt);
        let (e, e2) = (&self.half, &self.full);
        if linear_only {
            for ((o, &c), &f) in out.iter_mut().zip(u).zip(e2) {
                *o = f * c;
            }
            out[u.len() - 1] = ZERO;
            return;
        }
        let [k1, k2, k3, k4, tmp] = &mut self.stages;
        let h = 0.5 * dt;
        op.apply(u, k1);
        for i in 0..u.len() {
            tmp[i] = e[i] * (u[i] + h * k1[i]);
        }
        op.apply(tmp, k2);
        for i in 0..u.len() {
            tmp[i] = e[i] * u[i] + h * k2[i];
        }
        op.apply(tmp, k3);
        for i in 0..u.len() {
            tmp[i] = e2[i] * u[i] + dt * e[i] * k3[i];
        }
        op.apply(tmp, k4);
        let sixth = dt / 6.0;
        for i in 0..u.len() {
            out[i] = e2[i] * u[i] + sixth * (e2[i] * k1[i] + 2.0 * e[i] * (k2[i] + k3[i]) + k4[i]);
        }
        out[u.len() - 1] = ZERO;
    }
}

/// Fixed-step IF-RK4 integrator for one configuration.
#[derive(Debug, Clone)]
pub struct Solver {
    config: SolverConfig,
    table: SymbolTable,
    op: NonlinearOperator,
    stepper: Stepper,
    i2: Option<I2Evaluator>,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let table = SymbolTable::build(config.spec, config.grid)?;
        let op = NonlinearOperator::new(config.grid, config.spec.k(), config.padding, config.truncation);
        let stepper = Stepper::new(table.dispersion_half().to_vec());
        let i2 = match (config.spec.k(), config.spec.ilw_depth()) {
            (2, Some(delta)) => Some(I2Evaluator::new(config.grid, delta)?),
            _ => None,
        };
        Ok(Self {
            config,
            table,
            op,
            stepper,
            i2,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn table(&self) -> &SymbolTable {
        &self.table
    }

    pub fn spec(&self) -> &EquationSpec {
        self.table.spec()
    }

    fn check_grid(&self, field: &SpectralField) -> Result<()> {
        if field.grid() != &self.config.grid {
            return Err(Error::SizeMismatch {
                expected: self.config.grid.modes(),
                got: field.grid().modes(),
            });
        }
        Ok(())
    }

    /// Initial data as the solver sees it: Nyquist mode removed, then truncated.
    pub fn prepare(&self, u0: &SpectralField) -> Result<SpectralField> {
        self.check_grid(u0)?;
        let u = u0.clone().without_nyquist();
        Ok(match self.config.truncation {
            Some(k) => u.project_leq(k),
            None => u,
        })
    }

    /// The configured nonlinearity (padding and truncation included).
    pub fn nonlinear_term(&mut self, field: &SpectralField) -> Result<SpectralField> {
        self.check_grid(field)?;
        let mut out = vec![ZERO; field.coeffs().len()];
        self.op.apply(field.coeffs(), &mut out);
        Ok(SpectralField::from_half_spectrum(self.config.grid, out))
    }

    /// One step of length `dt` (any sign).
    pub fn step(&mut self, state: &SpectralField, dt: f64) -> Result<SpectralField> {
        self.check_grid(state)?;
        let mut next = vec![ZERO; state.coeffs().len()];
        self.stepper
            .step(&mut self.op, state.coeffs(), dt, self.config.linear_only, &mut next);
        Ok(SpectralField::from_half_spectrum(self.config.grid, next))
    }

    /// `steps` steps of length `dt` (negative dt marches backward). Fails on blow-up.
    pub fn march(&mut self, state: &SpectralField, dt: f64, steps: usize) -> Result<SpectralField> {
        let mut u = self.prepare(state)?;
        let l2_0 = u.l2_norm();
        for i in 0..steps {
            let next = self.step(&u, dt)?;
            if !healthy(&next, l2_0) {
                return Err(Error::BlowUp {
                    time: (i + 1) as f64 * dt,
                    last_healthy: i as f64 * dt,
                });
            }
            u = next;
        }
        Ok(u)
    }

    pub fn diagnostics(&self, t: f64, u: &SpectralField) -> Diagnostics {
        let i2 = |sign| self.i2.as_ref().and_then(|e| e.evaluate(u, sign).ok());
        Diagnostics {
            t,
            mean: u.mean(),
            l2: u.l2_norm(),
            hs: u.sobolev_norm(self.config.hs_order),
            i2: i2(I2Sign::Printed),
            i2_corrected: i2(I2Sign::Corrected),
        }
    }

    /// March to the final time recording snapshots every `snapshot_stride`
    /// steps and at the final time.
    pub fn evolve(&mut self, u0: &SpectralField) -> Result<Trajectory> {
        let mut u = self.prepare(u0)?;
        let l2_0 = u.l2_norm();
        let (full, partial) = self.config.step_plan();
        let dt = self.config.dt;
        let stride = self.config.snapshot_stride;
        let mut traj = Trajectory::new(self.config.hs_order);
        traj.push(Snapshot { time: 0.0, field: u.clone() }, self.diagnostics(0.0, &u));
        let mut t = 0.0;
        let total = full + usize::from(partial > 0.0);
        for i in 0..total {
            let (h, t_next) = if i < full {
                (dt, if i + 1 == full && partial == 0.0 { self.config.final_time } else { (i + 1) as f64 * dt })
            } else {
                (partial, self.config.final_time)
            };
            let next = self.step(&u, h)?;
            if !healthy(&next, l2_0) {
                traj.blow_up = Some(BlowUp {
                    time: t_next,
                    last_healthy: traj.snapshots().last().map_or(0.0, |s| s.time),
                });
                return Ok(traj);
            }
            u = next;
            t = t_next;
            if (i + 1) % stride == 0 || i + 1 == total {
                let d = self.diagnostics(t, &u);
                traj.push(Snapshot { time: t, field: u.clone() }, d);
            }
        }
        debug_assert!(total == 0 || t == self.config.final_time);
        Ok(traj)
    }
}

fn healthy(u: &SpectralField, l2_0: f64) -> bool {
    u.is_finite() && !(l2_0 > 0.0 && u.l2_norm() > BLOW_UP_GROWTH * l2_0)
}

/// Convenience wrapper around [`Solver::evolve`].
pub fn evolve(u0: &SpectralField, config: SolverConfig) -> Result<Trajectory> {
    Solver::new(config)?.evolve(u0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kdv_config(grid: Grid, t: f64) -> SolverConfig {
        SolverConfig::with_dt_bound(EquationSpec::gkdv(2).unwrap(), grid, t, 1e-3).unwrap()
    }

    #[test]
    fn propagator_examples() {
        let g = Grid::torus(16).unwrap();
        let table = SymbolTable::build(EquationSpec::gkdv(2).unwrap(), g).unwrap();
        let id = linear_propagator(&table, 0.0);
        assert!(id.iter().all(|c| *c == Complex64::new(1.0, 0.0)));
        let ph = linear_propagator(&table, 0.1);
        let expected = Complex64::from_polar(1.0, 0.8);
        assert!((ph[2] - expected).norm() < 1e-15);
        assert!(ph.iter().all(|c| (c.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn square_of_cosine() {
        let g = Grid::torus(16).unwrap();
        let u = SpectralField::from_fn(g, f64::cos);
        let n = nonlinear_term(&u, 2, 2);
        for m in g.mode_indices() {
            let expected = match m {
                2 => Complex64::new(0.0, 0.5),
                -2 => Complex64::new(0.0, -0.5),
                _ => ZERO,
            };
            assert!((n.coeff(m) - expected).norm() < 1e-15, "m={m}");
        }
        assert_eq!(n.coeffs()[0], ZERO);
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = Grid::torus(32).unwrap();
        let traj = evolve(&SpectralField::zeros(g), kdv_config(g, 0.05)).unwrap();
        assert!(traj.final_state().coeffs().iter().all(|c| *c == ZERO));
    }

    #[test]
    fn linear_step_is_exact() {
        let g = Grid::torus(32).unwrap();
        let u = SpectralField::from_fn(g, |x| (3.0 * x).sin() + 0.2 * (5.0 * x).cos()).without_nyquist();
        let mut solver = Solver::new(kdv_config(g, 0.1).linear(true)).unwrap();
        let next = solver.step(&u, 0.01).unwrap();
        let phases = linear_propagator(solver.table(), 0.01);
        for (m, (a, b)) in next.coeffs().iter().zip(u.coeffs()).enumerate() {
            assert_eq!(*a, phases[m] * b);
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_time_is_single_snapshot() {
        let g = Grid::torus(32).unwrap();
        let u = SpectralField::from_fn(g, f64::cos);
        let traj = evolve(&u, kdv_config(g, 0.0)).unwrap();
        assert_eq!(traj.snapshots().len(), 1);
        assert_eq!(traj.final_state(), &u.without_nyquist());
    }

    #[test]
    fn partial_step_lands_on_final_time() {
        let g = Grid::torus(32).unwrap();
        let u = SpectralField::from_fn(g, f64::cos);
        let config = kdv_config(g, 0.01).with_dt(0.003).with_stride(2);
        let traj = evolve(&u, config).unwrap();
        let times: Vec<f64> = traj.times().collect();
        assert_eq!(*times.last().unwrap(), 0.01);
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(times, vec![0.0, 0.006, 0.01]);
    }

    #[test]
    fn blow_up_is_flagged() {
        let g = Grid::torus(32).unwrap();
        let u = SpectralField::from_fn(g, |x| 50.0 * x.cos());
        // Far above the advisory step: the explicit stages diverge.
        let config = kdv_config(g, 2.0).with_dt(0.05);
        let traj = evolve(&u, config).unwrap();
        let b = traj.blow_up.expect("expected blow-up");
        assert!(b.time > b.last_healthy);
        assert!(traj.snapshots().iter().all(|s| s.field.is_finite()));
    }
}
