//! Distinguished states built from the Lax curves: the sonic maximum of the
//! forward 1-curve, the two-curve intersection behind the exact Riemann
//! solver, and the largest-density crossings of a momentum level used by the
//! coupled valve solver.

use crate::curves::{backward_lax, backward_lax_slope, fl1_max, forward_lax, forward_lax_slope, Family};
use crate::roots::{grow_until, solve_bracketed};
use crate::state::{GasLaw, State};
use crate::{Error, Result};

/// Sonic point of the forward 1-curve through `u`, in closed form:
/// `rho = rho_o * exp((v - a)/a)`, `q = a * rho`.
///
/// For `v <= a` this is the curve's global maximum. For supersonic `u` the
/// true maximum sits lower on the shock branch; see [`fl1_max`].
pub fn bar_u(u: &State, law: &GasLaw) -> State {
    let rho = u.rho * ((u.v() - law.a()) / law.a()).exp();
    State::new(rho, law.a() * rho)
}

/// Intersection of the forward 1-curve through `u_l` with the backward
/// 2-curve through `u_r`: the middle state of the exact Riemann solution.
/// Always exists and is unique since their velocity gap is strictly
/// decreasing in density, from `+inf` near vacuum to `-inf`.
pub fn tilde_u(u_l: &State, u_r: &State, law: &GasLaw) -> Result<State> {
    let gap = |rho: f64| {
        forward_lax(Family::One, u_l, rho, law) / rho - backward_lax(Family::Two, u_r, rho, law) / rho
    };
    let gap_slope = |rho: f64| {
        let f = forward_lax_slope(Family::One, u_l, rho, law);
        let b = backward_lax_slope(Family::Two, u_r, rho, law);
        let fv = forward_lax(Family::One, u_l, rho, law) / rho;
        let bv = backward_lax(Family::Two, u_r, rho, law) / rho;
        // d/drho of (q/rho) = (slope - v) / rho for each curve.
        ((f - fv) - (b - bv)) / rho
    };
    // The gap is strictly decreasing in density, so these brackets are valid.
    let lo = grow_until(u_l.rho.min(u_r.rho), 0.5, |r| gap(r) > 0.0, "tilde_u lower bracket")?;
    let hi = grow_until(u_l.rho.max(u_r.rho), 2.0, |r| gap(r) < 0.0, "tilde_u upper bracket")?;
    let scale = law.a() + u_l.v().abs() + u_r.v().abs();
    let rho = solve_bracketed(gap, gap_slope, lo, hi, scale, hi, "tilde_u")?;
    Ok(State::new(rho, forward_lax(Family::One, u_l, rho, law)))
}

/// Largest admissible density slack accepted when a requested level sits a
/// rounding error above the curve maximum.
const LEVEL_SLACK: f64 = 1e-9;

/// Largest-density state on the forward 1-curve through `u_l` with momentum
/// `q0`, i.e. the crossing on the descending branch beyond the curve's
/// maximum. Errors `OutOfRange` unless `0 <= q0 <= max FL1`.
pub fn hat_u(q0: f64, u_l: &State, law: &GasLaw) -> Result<State> {
    let (rho_max, q_max) = fl1_max(u_l, law);
    if !(0.0..=q_max * (1.0 + LEVEL_SLACK) + f64::MIN_POSITIVE).contains(&q0) {
        return Err(Error::OutOfRange { what: "hat level q0", value: q0, lo: 0.0, hi: q_max });
    }
    if q0 == 0.0 {
        return Ok(hat_u_zero(u_l, law));
    }
    if q0 == u_l.q && u_l.rho >= rho_max {
        // Self-level datum on the descending branch; see check_u.
        return Ok(*u_l);
    }
    let q0 = q0.min(q_max);
    let f = |rho: f64| forward_lax(Family::One, u_l, rho, law) - q0;
    if f(rho_max) <= 0.0 {
        // Level equals the maximum to rounding; the crossing is the argmax.
        return Ok(State::new(rho_max, q0));
    }
    let hi = grow_until(2.0 * rho_max, 2.0, |r| f(r) < 0.0, "hat_u bracket")?;
    let df = |rho: f64| forward_lax_slope(Family::One, u_l, rho, law);
    let scale = q_max.max(law.a() * rho_max);
    let rho = solve_bracketed(f, df, rho_max, hi, scale, hi, "hat_u")?;
    Ok(State::new(rho, q0))
}

/// Density at which the backward 2-curve through `u_r` attains its minimum.
fn bl2_argmin(u_r: &State, law: &GasLaw) -> f64 {
    let a = law.a();
    let v = u_r.v();
    if v >= -a {
        // Rarefaction branch: v_r + a ln(rho/rho_r) + a = 0.
        u_r.rho * (-(v + a) / a).exp()
    } else {
        // Shock branch: 2 v_r w + a (3 w^2 - 1) = 0 in w = sqrt(rho/rho_r).
        let m = -v / a;
        let w = (m + (m * m + 3.0).sqrt()) / 3.0;
        u_r.rho * w * w
    }
}

/// Largest-density state on the backward 2-curve through `u_r` with momentum
/// `q0 >= 0`: the crossing on the ascending branch to the right of the
/// curve's minimum. Unique for every `q0 >= 0` since the curve tends to `0`
/// near vacuum, dips negative, and grows without bound.
pub fn check_u(q0: f64, u_r: &State, law: &GasLaw) -> Result<State> {
    if !(q0 >= 0.0) {
        return Err(Error::OutOfRange { what: "check level q0", value: q0, lo: 0.0, hi: f64::INFINITY });
    }
    let f = |rho: f64| backward_lax(Family::Two, u_r, rho, law) - q0;
    let lo = bl2_argmin(u_r, law);
    if q0 == u_r.q && u_r.rho >= lo {
        // Self-level datum already sits on the admissible branch; keep it
        // bitwise so degenerate interface waves cancel exactly.
        return Ok(*u_r);
    }
    debug_assert!(f(lo) < 0.0, "backward 2-curve minimum must be negative");
    let hi = grow_until(2.0 * lo.max(u_r.rho), 2.0, |r| f(r) > 0.0, "check_u bracket")?;
    let df = |rho: f64| backward_lax_slope(Family::Two, u_r, rho, law);
    let scale = (law.a() * u_r.rho).max(q0).max(u_r.q.abs());
    let rho = solve_bracketed(f, df, lo, hi, scale, hi, "check_u")?;
    Ok(State::new(rho, q0))
}

/// Momentum of the sonic maximum of the forward 1-curve through the zero
/// level crossing of `u`: `rho (sqrt(v^2 + 4 a^2) + v)^2 / (4 a e)`.
/// For `v >= 0` this equals the largest momentum deliverable after the state
/// has first been brought to rest at the interface.
pub fn ring_q(u: &State, law: &GasLaw) -> f64 {
    let a = law.a();
    let v = u.v();
    let w = (v * v + 4.0 * a * a).sqrt() + v;
    u.rho * w * w / (4.0 * a * std::f64::consts::E)
}

/// Closed-form largest-density zero crossing of the forward 1-curve through
/// `u`: the state reached when the interface delivers no flow.
pub fn hat_u_zero(u: &State, law: &GasLaw) -> State {
    let a = law.a();
    let v = u.v();
    let rho = if v >= 0.0 {
        // Shock branch: w - 1/w = v/a with w = sqrt(rho_hat/rho).
        let w = (v + (v * v + 4.0 * a * a).sqrt()) / (2.0 * a);
        u.rho * w * w
    } else {
        u.rho * (v / a).exp()
    };
    State::new(rho, 0.0)
}
