//! Bracketed scalar root finding: bisection made fast by guarded Newton steps.

use crate::{Error, Result};

const MAX_ITERS: usize = 300;

/// Solves `f(x) = 0` on a bracket `[lo, hi]` with `f(lo)` and `f(hi)` of
/// opposite sign (or zero). Each iteration tries a Newton step from the
/// current iterate and falls back to bisection whenever the step leaves the
/// bracket, so convergence is monotone in the bracket width.
///
/// Converged when `|f(x)| <= 1e-12 * f_scale` and the bracket width is at
/// most `1e-13 * x_scale`.
pub fn solve_bracketed(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    f_scale: f64,
    x_scale: f64,
    context: &'static str,
) -> Result<f64> {
    debug_assert!(lo < hi, "{context}: empty bracket [{lo}, {hi}]");
    let f_tol = 1e-12 * f_scale.abs().max(f64::MIN_POSITIVE);
    let x_tol = 1e-13 * x_scale.abs().max(f64::MIN_POSITIVE);

    let f_lo = f(lo);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let f_hi = f(hi);
    if f_hi == 0.0 {
        return Ok(hi);
    }
    debug_assert!(
        f_lo.is_sign_negative() != f_hi.is_sign_negative(),
        "{context}: no sign change on [{lo}, {hi}]: f = [{f_lo}, {f_hi}]"
    );

    let (mut lo, mut hi) = (lo, hi);
    let neg_at_lo = f_lo < 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_ITERS {
        let fx = f(x);
        if (fx < 0.0) == neg_at_lo {
            lo = x;
        } else {
            hi = x;
        }
        if fx.abs() <= f_tol && hi - lo <= x_tol {
            return Ok(x);
        }
        let d = df(x);
        let newton = x - fx / d;
        x = if d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::NoConvergence { context, iters: MAX_ITERS })
}

/// Grows `hi` geometrically from `start` until `pred(hi)` holds.
/// Used to build brackets for monotone curve equations.
pub fn grow_until(start: f64, factor: f64, pred: impl Fn(f64) -> bool, context: &'static str) -> Result<f64> {
    debug_assert!(factor > 0.0 && factor != 1.0);
    let mut x = start;
    for _ in 0..2048 {
        if pred(x) {
            return Ok(x);
        }
        x *= factor;
    }
    Err(Error::NoConvergence { context, iters: 2048 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_a_quadratic_root_to_machine_precision() {
        let f = |x: f64| x * x - 2.0;
        let df = |x: f64| 2.0 * x;
        let r = solve_bracketed(f, df, 0.0, 2.0, 2.0, 2.0, "sqrt2").unwrap();
        assert!((r - 2.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn survives_a_flat_derivative_by_bisection() {
        // df is reported as zero everywhere, so every step bisects.
        let f = |x: f64| x.powi(3) - 1.0;
        let df = |_: f64| 0.0;
        let r = solve_bracketed(f, df, 0.0, 4.0, 1.0, 4.0, "cbrt").unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_endpoint_roots_return_early() {
        let f = |x: f64| x;
        let df = |_: f64| 1.0;
        let r = solve_bracketed(f, df, 0.0, 1.0, 1.0, 1.0, "origin").unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn bracket_growth_stops_when_predicate_holds() {
        let hi = grow_until(1.0, 2.0, |x| x > 100.0, "grow").unwrap();
        assert_eq!(hi, 128.0);
    }
}
