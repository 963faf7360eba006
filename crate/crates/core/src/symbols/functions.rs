//! Scalar dispersion and perturbation symbols.
//!
//! Everything is expressed through `x = δξ` and two even helpers,
//! `g(x) = x coth x − 1` and `f(x) = 1 + x²/3 − x coth x`, each evaluated
//! from its Taylor series near the origin (where the direct form cancels
//! catastrophically) and from `coth` elsewhere.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Laurent branch below this magnitude.
pub const COTH_SERIES_BELOW: f64 = 1e-4;
/// `coth` is ±1 to double precision above this magnitude.
pub const COTH_SATURATES_ABOVE: f64 = 20.0;

// Below this |x| the helpers g and f use their Taylor series.
const TAYLOR_BELOW: f64 = 1.0;

/// Taylor coefficients of x coth x = Σ c_n x^{2n}, c_n = 2^{2n} B_{2n} / (2n)!, n = 1..=14.
const XCOTH_TAYLOR: [f64; 14] = [
    1.0 / 3.0,
    -1.0 / 45.0,
    2.0 / 945.0,
    -1.0 / 4725.0,
    2.0 / 93555.0,
    -1382.0 / 638512875.0,
    4.0 / 18243225.0,
    -3617.0 / 162820783125.0,
    87734.0 / 38979295480125.0,
    -349222.0 / 1531329465290625.0,
    310732.0 / 13447856940643125.0,
    -472728182.0 / 201919571963756521875.0,
    2631724.0 / 11094481976030578125.0,
    -13571120588.0 / 564653660170076273671875.0,
];

/// Horner evaluation of Σ_{n>=from} c_n y^{n-from} with y = x².
fn taylor_tail(y: f64, from: usize) -> f64 {
    XCOTH_TAYLOR[from - 1..]
        .iter()
        .rev()
        .fold(0.0, |acc, &c| acc * y + c)
}

pub(crate) fn coth_unchecked(x: f64) -> f64 {
    let a = x.abs();
    if a > COTH_SATURATES_ABOVE {
        x.signum()
    } else if a < COTH_SERIES_BELOW {
        1.0 / x + x / 3.0 - x * x * x / 45.0
    } else {
        (1.0 + 2.0 / (2.0 * a).exp_m1()).copysign(x)
    }
}

/// Hyperbolic cotangent accurate to a few ulps on |x| ∈ [1e-8, 700].
pub fn coth_stable(x: f64) -> Result<f64> {
    if x == 0.0 || x.is_nan() {
        return Err(Error::param("x", "coth is undefined at 0"));
    }
    Ok(coth_unchecked(x))
}

/// g(x) = x coth x − 1 (even, g(0) = 0).
pub(crate) fn xcoth_minus_one(x: f64) -> f64 {
    let a = x.abs();
    if a < TAYLOR_BELOW {
        let y = a * a;
        y * taylor_tail(y, 1)
    } else {
        a * coth_unchecked(a) - 1.0
    }
}

/// f(x)/x² where f(x) = 1 + x²/3 − x coth x (even, → 0 at the origin).
pub(crate) fn coth_remainder_ratio(x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        0.0
    } else if a < TAYLOR_BELOW {
        let y = a * a;
        -y * taylor_tail(y, 2)
    } else {
        (1.0 + a * a / 3.0 - a * coth_unchecked(a)) / (a * a)
    }
}

fn check_positive(name: &str, delta: f64) -> Result<()> {
    if !(delta > 0.0) || delta.is_nan() {
        return Err(Error::param(name, format!("must be positive, got {delta}")));
    }
    Ok(())
}

pub(crate) fn k_unchecked(delta: f64, xi: f64) -> f64 {
    if delta.is_infinite() {
        return xi.abs();
    }
    xcoth_minus_one(delta * xi) / delta
}

/// K_δ(ξ) = ξ coth(δξ) − 1/δ, with K_δ(0) = 0.
pub fn k_delta(delta: f64, xi: f64) -> Result<f64> {
    check_positive("delta", delta)?;
    Ok(k_unchecked(delta, xi))
}

/// L_δ(ξ) = (3/δ) K_δ(ξ).
pub fn l_delta(delta: f64, xi: f64) -> Result<f64> {
    check_positive("delta", delta)?;
    if delta.is_infinite() {
        return Err(Error::param("delta", "L is defined for finite depth only"));
    }
    Ok(3.0 / delta * k_unchecked(delta, xi))
}

pub(crate) fn q_unchecked(delta: f64, xi: f64) -> f64 {
    if delta.is_infinite() {
        return 0.0;
    }
    let a = xi.abs();
    let x = delta * a;
    if x < 0.5 {
        a - k_unchecked(delta, a)
    } else {
        // |ξ|(coth x − 1) = 2|ξ| / (e^{2x} − 1)
        1.0 / delta - 2.0 * a / (2.0 * x).exp_m1()
    }
}

/// q_δ(ξ) = 1/δ − ξ coth(δξ) + |ξ| = |ξ| − K_δ(ξ), the ILW–BO symbol gap.
pub fn q_delta(delta: f64, xi: f64) -> Result<f64> {
    if !(delta >= 2.0) {
        return Err(Error::param(
            "delta",
            format!("q is used in the deep regime delta >= 2, got {delta}"),
        ));
    }
    Ok(q_unchecked(delta, xi))
}

pub(crate) fn h_closed_unchecked(delta: f64, xi: f64) -> f64 {
    if xi == 0.0 {
        return 0.0;
    }
    3.0 * delta * coth_remainder_ratio(delta * xi)
}

/// h(ξ,δ) from ξ coth(δξ) = 1/δ + δξ²/3 − ξ² h/3, i.e. h = 3δ f(δξ)/(δξ)².
pub fn h_closed(delta: f64, xi: f64) -> Result<f64> {
    check_positive("delta", delta)?;
    Ok(h_closed_unchecked(delta, xi))
}

/// Outcome of the partial-fraction summation of h.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    /// Number of explicitly summed terms.
    pub terms: u64,
    /// Bound on |value − h|.
    pub error_bound: f64,
}

const MAX_SERIES_TERMS: u64 = 1 << 26;

/// h(ξ,δ) = Σ_{k>=1} 6δ³ξ² / (k²π²(k²π² + δ²ξ²)).
///
/// The first `K` terms are summed from the smallest upward; the tail is
/// replaced by the midpoint integral ∫_{K+1/2}^∞, exact in closed form. The
/// summand is positive, decreasing and convex, so the midpoint error of the
/// tail is at most |a'(K)|/24 <= a(K)/(6K); `K` doubles until that is below
/// `tol`.
pub fn h_series_detailed(delta: f64, xi: f64, tol: f64) -> Result<SeriesSum> {
    check_positive("delta", delta)?;
    if !(tol > 0.0) {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    if xi == 0.0 {
        return Ok(SeriesSum {
            value: 0.0,
            terms: 0,
            error_bound: 0.0,
        });
    }
    let x = delta * xi.abs();
    let x2 = x * x;
    let pi2 = PI * PI;
    let term = |k: f64| 6.0 * delta * x2 / (k * k * pi2 * (k * k * pi2 + x2));

    let mut n_terms: u64 = 16;
    while term(n_terms as f64) / (6.0 * n_terms as f64) >= tol {
        n_terms *= 2;
        if n_terms > MAX_SERIES_TERMS {
            return Err(Error::param(
                "tol",
                format!("{tol} needs more than {MAX_SERIES_TERMS} terms at delta={delta}, xi={xi}"),
            ));
        }
    }
    let partial: f64 = (1..=n_terms).rev().map(|k| term(k as f64)).sum();
    let tail = midpoint_tail(delta, x, n_terms as f64 + 0.5);
    Ok(SeriesSum {
        value: partial + tail,
        terms: n_terms,
        error_bound: term(n_terms as f64) / (6.0 * n_terms as f64),
    })
}

/// ∫_a^∞ 6δ [1/(π²t²) − 1/(π²t² + x²)] dt = (6δ/(πx)) (w − atan w), w = x/(πa).
fn midpoint_tail(delta: f64, x: f64, a: f64) -> f64 {
    let w = x / (PI * a);
    let w_minus_atan = if w < 0.1 {
        // w³/3 − w⁵/5 + w⁷/7 − …
        let w2 = w * w;
        let mut acc = 0.0;
        let mut power = w * w2;
        for n in 1..=12 {
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * power / (2 * n + 1) as f64;
            power *= w2;
        }
        acc
    } else {
        w - w.atan()
    };
    6.0 * delta / (PI * x) * w_minus_atan
}

pub fn h_series(delta: f64, xi: f64, tol: f64) -> Result<f64> {
    h_series_detailed(delta, xi, tol).map(|s| s.value)
}

/// Lower bound for h: its first series term.
pub fn h_first_term(delta: f64, xi: f64) -> f64 {
    let x2 = (delta * xi).powi(2);
    let pi2 = PI * PI;
    6.0 * delta * x2 / (pi2 * (pi2 + x2))
}

/// h_series with an error bound of `rel` times the leading term.
pub fn h_series_rel(delta: f64, xi: f64, rel: f64) -> Result<f64> {
    if xi == 0.0 {
        return h_series(delta, xi, 1.0);
    }
    h_series(delta, xi, rel * h_first_term(delta, xi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn coth_reference_values() {
        assert_relative_eq!(coth_stable(1.0).unwrap(), 1.3130352854993312, max_relative = 1e-15);
        assert_relative_eq!(coth_stable(-1.0).unwrap(), -1.3130352854993312, max_relative = 1e-15);
        assert!((coth_stable(50.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(coth_stable(25.0).unwrap(), 1.0);
        let x = 1e-6;
        assert_relative_eq!(coth_stable(x).unwrap(), 1e6 + x / 3.0, max_relative = 1e-12);
        assert!(coth_stable(0.0).is_err());
    }

    #[test]
    fn coth_branches_agree_at_crossovers() {
        for &x in &[COTH_SERIES_BELOW, COTH_SATURATES_ABOVE] {
            let below = x * (1.0 - 1e-12);
            let above = x * (1.0 + 1e-12);
            let (a, b) = (coth_unchecked(below), coth_unchecked(above));
            assert!(((a - b) / b).abs() < 1e-11, "x={x}: {a} vs {b}");
        }
        // Laurent branch vs expm1 form just on either side.
        let x = COTH_SERIES_BELOW;
        let laurent = 1.0 / x + x / 3.0 - x.powi(3) / 45.0;
        let direct = 1.0 + 2.0 / (2.0 * x).exp_m1();
        assert!(((laurent - direct) / direct).abs() < 1e-13);
    }

    #[test]
    fn taylor_and_direct_helpers_meet() {
        let x = TAYLOR_BELOW;
        let series = {
            let y = x * x;
            y * taylor_tail(y, 1)
        };
        let direct = x * coth_unchecked(x) - 1.0;
        assert!(((series - direct) / direct).abs() < 1e-14);
        let series_f = -x * x * taylor_tail(x * x, 2);
        let direct_f = (1.0 + x * x / 3.0 - x * coth_unchecked(x)) / (x * x);
        assert!(((series_f - direct_f) / direct_f).abs() < 1e-12);
    }

    #[test]
    fn k_examples() {
        assert_relative_eq!(k_delta(1.0, 1.0).unwrap(), 0.3130352854993312, max_relative = 1e-14);
        let k = k_delta(2.0, 5.0).unwrap();
        assert!(k > 4.5 && k < 5.0);
        assert_eq!(k_delta(3.7, 0.0).unwrap(), 0.0);
        assert_eq!(k_delta(2.0, -5.0).unwrap(), k);
        assert!(k_delta(0.0, 1.0).is_err());
        assert!(k_delta(-1.0, 1.0).is_err());
    }

    #[test]
    fn l_examples() {
        let v = l_delta(0.5, 3.0).unwrap();
        assert!(v > 0.0 && v < 9.0);
        let chain: Vec<f64> = [0.4, 0.2, 0.1, 0.05]
            .iter()
            .map(|&d| l_delta(d, 3.0).unwrap())
            .collect();
        assert!(chain.windows(2).all(|w| w[0] < w[1]));
        assert!(chain.iter().all(|&v| v < 9.0));
        assert!(9.0 - chain[3] < 0.1);
        assert_eq!(l_delta(0.3, 0.0).unwrap(), 0.0);
        assert!(l_delta(0.0, 1.0).is_err());
    }

    #[test]
    fn q_examples() {
        assert_eq!(q_delta(2.0, 0.0).unwrap(), 0.0);
        assert!((q_delta(2.0, 100.0).unwrap() - 0.5).abs() < 1e-6);
        assert!(q_delta(1.5, 1.0).is_err());
        for &d in &[2.0, 3.0, 10.0, 1e6] {
            for n in -512..=512 {
                let q = q_delta(d, n as f64).unwrap();
                assert!((0.0..=2.0 / d).contains(&q), "delta={d} n={n} q={q}");
            }
        }
    }

    #[test]
    fn q_branches_agree() {
        for &d in &[2.0, 7.0] {
            let xi = 0.5 / d;
            let direct = xi - k_unchecked(d, xi);
            let expm1 = 1.0 / d - 2.0 * xi / (2.0 * d * xi).exp_m1();
            assert!((direct - expm1).abs() < 1e-14);
        }
    }

    #[test]
    fn h_zero_frequency() {
        assert_eq!(h_series(0.3, 0.0, 1e-12).unwrap(), 0.0);
        assert_eq!(h_closed(0.3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn h_small_depth_is_cubic() {
        let h1 = h_series(0.1, 1.0, 1e-16).unwrap();
        let h2 = h_series(0.05, 1.0, 1e-16).unwrap();
        assert!(h1 > 0.0 && h1 <= 0.1);
        let (r1, r2) = (h1 / 0.1f64.powi(3), h2 / 0.05f64.powi(3));
        assert!((r1 / r2 - 1.0).abs() < 0.1, "{r1} {r2}");
    }

    #[test]
    fn h_series_error_bound_is_honest() {
        for &(d, xi) in &[(0.01, 3.0), (0.5, 10.0), (1.0, 100.0), (3.0, 7.0)] {
            let coarse = h_series_detailed(d, xi, 1e-6).unwrap();
            let fine = h_series_detailed(d, xi, 1e-15).unwrap();
            assert!((coarse.value - fine.value).abs() <= coarse.error_bound + fine.error_bound);
        }
    }

    #[test]
    fn h_series_rejects_bad_input() {
        assert!(h_series(0.0, 1.0, 1e-12).is_err());
        assert!(h_series(1.0, 1.0, 0.0).is_err());
        assert!(h_series(1e6, 512.0, 1e-300).is_err());
    }
}
