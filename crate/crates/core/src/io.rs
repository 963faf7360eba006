//! Deterministic text output helpers.

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:?}")
}
