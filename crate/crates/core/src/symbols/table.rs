use std::io::Write;

use crate::error::{Error, Result};
use crate::io::fmt_float;
use crate::spectral::Grid;

use super::equation::{DepthParam, EquationSpec};
use super::functions::{h_closed_unchecked, k_unchecked, q_unchecked};

pub const SYMBOL_CSV_HEADER: &str = "mode,xi,p,K,L,q,h";

/// Per-mode dispersion p(m) and auxiliary symbols for one equation on one grid.
///
/// Values are stored for `m = 0..=M/2`; p is extended oddly and the
/// auxiliary symbols evenly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTable {
    grid: Grid,
    spec: EquationSpec,
    p: Vec<f64>,
    k: Option<Vec<f64>>,
    l: Option<Vec<f64>>,
    q: Option<Vec<f64>>,
    h: Option<Vec<f64>>,
}

impl SymbolTable {
    pub fn build(spec: EquationSpec, grid: Grid) -> Result<Self> {
        let xis: Vec<f64> = (0..grid.spectral_len())
            .map(|m| grid.wavenumber(m as i64))
            .collect();
        let tabulate = |f: &dyn Fn(f64) -> f64| xis.iter().map(|&xi| f(xi)).collect::<Vec<_>>();
        let depth = spec.depth();
        let p = tabulate(&|xi| depth.dispersion(xi));

        let (k, l, q, h) = match depth {
            DepthParam::Deep { delta } => (
                Some(tabulate(&|xi| k_unchecked(delta, xi))),
                None,
                Some(tabulate(&|xi| q_unchecked(delta, xi))),
                None,
            ),
            DepthParam::Finite { delta } => {
                (Some(tabulate(&|xi| k_unchecked(delta, xi))), None, None, None)
            }
            DepthParam::Infinite => (Some(tabulate(&f64::abs)), None, None, None),
            DepthParam::Shallow { delta } => (
                Some(tabulate(&|xi| k_unchecked(delta, xi))),
                Some(tabulate(&|xi| 3.0 / delta * k_unchecked(delta, xi))),
                None,
                Some(tabulate(&|xi| h_closed_unchecked(delta, xi))),
            ),
            DepthParam::KdvLimit => (None, None, None, None),
        };

        if p[0] != 0.0 || p.iter().any(|v| !v.is_finite()) {
            return Err(Error::param(
                "symbol table",
                format!("dispersion for {spec} is not finite with p(0) = 0"),
            ));
        }
        Ok(Self {
            grid,
            spec,
            p,
            k,
            l,
            q,
            h,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn spec(&self) -> &EquationSpec {
        &self.spec
    }

    /// Dispersion on the stored half spectrum.
    pub fn dispersion_half(&self) -> &[f64] {
        &self.p
    }

    fn index(&self, m: i64) -> Option<usize> {
        let n = self.grid.nyquist() as i64;
        (m.abs() <= n).then_some(m.unsigned_abs() as usize)
    }

    pub fn p(&self, m: i64) -> f64 {
        self.index(m)
            .map(|i| if m < 0 { -self.p[i] } else { self.p[i] })
            .unwrap_or(f64::NAN)
    }

    fn even(table: &Option<Vec<f64>>, index: Option<usize>) -> Option<f64> {
        table.as_ref().zip(index).map(|(t, i)| t[i])
    }

    pub fn k_symbol(&self, m: i64) -> Option<f64> {
        Self::even(&self.k, self.index(m))
    }

    pub fn l_symbol(&self, m: i64) -> Option<f64> {
        Self::even(&self.l, self.index(m))
    }

    pub fn q_symbol(&self, m: i64) -> Option<f64> {
        Self::even(&self.q, self.index(m))
    }

    pub fn h_symbol(&self, m: i64) -> Option<f64> {
        Self::even(&self.h, self.index(m))
    }

    /// CSV with header `mode,xi,p,K,L,q,h`; inapplicable cells are empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{SYMBOL_CSV_HEADER}")?;
        let cell = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
        for m in self.grid.mode_indices() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                m,
                fmt_float(self.grid.wavenumber(m)),
                fmt_float(self.p(m)),
                cell(self.k_symbol(m)),
                cell(self.l_symbol(m)),
                cell(self.q_symbol(m)),
                cell(self.h_symbol(m)),
            )?;
        }
        Ok(())
    }
}
