//! Dispersion symbols of the ILW family and their limits.

mod equation;
mod functions;
pub mod lemmas;
mod table;

use serde::{Deserialize, Serialize};

pub use equation::{DepthParam, EquationSpec, Family, Regime};
pub use functions::{
    coth_stable, h_closed, h_first_term, h_series, h_series_detailed, h_series_rel, k_delta,
    l_delta, q_delta, SeriesSum, COTH_SATURATES_ABOVE, COTH_SERIES_BELOW,
};
pub use table::{SymbolTable, SYMBOL_CSV_HEADER};

/// Explicit constants behind the asymptotic comparisons in the lemma hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparisonConstants {
    /// a ∼ b means 1/sim <= a/b <= sim.
    pub sim: f64,
    /// a ≫ b means a >= much · b.
    pub much: f64,
    /// Frequencies 0..=n0 enter the size hypothesis on |n₁|.
    pub n0: u32,
    /// Positive floor the measured minimum ratio is compared against.
    pub floor: f64,
}

impl Default for ComparisonConstants {
    fn default() -> Self {
        Self {
            sim: 2.0,
            much: 8.0,
            n0: 1,
            floor: 0.1,
        }
    }
}

impl ComparisonConstants {
    pub fn comparable(&self, a: f64, b: f64) -> bool {
        a * self.sim >= b && b * self.sim >= a
    }

    pub fn much_greater(&self, a: f64, b: f64) -> bool {
        a >= self.much * b
    }
}
