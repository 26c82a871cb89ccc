//! Shock and rarefaction branches and the pieced Lax curves.
//!
//! All curves are parametrized by density and return momentum. A curve of
//! family `i` through the base state `u_o` prescribes the velocity offset
//! from `v_o`; the offset is logarithmic on rarefaction branches and of
//! square-root type on shock branches. The two offsets agree to first order
//! at `rho_o`, so every pieced Lax curve is C1 there.

use crate::state::{GasLaw, State};

/// Characteristic family of a wave or curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    One,
    Two,
}

impl Family {
    /// Sign of the family's contribution to velocity offsets and speeds:
    /// `-1` for the first family, `+1` for the second.
    pub fn sign(&self) -> f64 {
        match self {
            Family::One => -1.0,
            Family::Two => 1.0,
        }
    }
}

/// One of the four elementary curve branches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveId {
    Shock(Family),
    Rarefaction(Family),
}

/// Rarefaction velocity offset `a * ln(rho / rho_o)`.
fn offset_r(rho: f64, rho_o: f64, a: f64) -> f64 {
    a * (rho / rho_o).ln()
}

/// Shock velocity offset `a * (w - 1/w)` with `w = sqrt(rho / rho_o)`.
fn offset_s(rho: f64, rho_o: f64, a: f64) -> f64 {
    let w = (rho / rho_o).sqrt();
    a * (w - 1.0 / w)
}

fn offset_r_prime(rho: f64, a: f64) -> f64 {
    a / rho
}

fn offset_s_prime(rho: f64, rho_o: f64, a: f64) -> f64 {
    let w = (rho / rho_o).sqrt();
    a * (w + 1.0 / w) / (2.0 * rho)
}

/// Momentum on the branch `id` through `u_o`, evaluated at density `rho`.
pub fn curve_value(id: CurveId, u_o: &State, rho: f64, law: &GasLaw) -> f64 {
    debug_assert!(rho > 0.0);
    let a = law.a();
    let (sign, offset) = match id {
        CurveId::Rarefaction(fam) => (fam.sign(), offset_r(rho, u_o.rho, a)),
        CurveId::Shock(fam) => (fam.sign(), offset_s(rho, u_o.rho, a)),
    };
    rho * (u_o.v() + sign * offset)
}

/// Slope `d q / d rho` of the branch `id` through `u_o` at density `rho`.
pub fn curve_slope(id: CurveId, u_o: &State, rho: f64, law: &GasLaw) -> f64 {
    let a = law.a();
    let (sign, offset, offset_prime) = match id {
        CurveId::Rarefaction(fam) => (fam.sign(), offset_r(rho, u_o.rho, a), offset_r_prime(rho, a)),
        CurveId::Shock(fam) => (
            fam.sign(),
            offset_s(rho, u_o.rho, a),
            offset_s_prime(rho, u_o.rho, a),
        ),
    };
    u_o.v() + sign * (offset + rho * offset_prime)
}

/// Branch of the forward Lax curve of `fam` through `u_o` at density `rho`.
/// First family: rarefactions below the base density, shocks above.
/// Second family: shocks below, rarefactions above.
pub fn forward_branch(fam: Family, u_o: &State, rho: f64) -> CurveId {
    match fam {
        Family::One => {
            if rho <= u_o.rho {
                CurveId::Rarefaction(fam)
            } else {
                CurveId::Shock(fam)
            }
        }
        Family::Two => {
            if rho < u_o.rho {
                CurveId::Shock(fam)
            } else {
                CurveId::Rarefaction(fam)
            }
        }
    }
}

/// Branch of the backward Lax curve of `fam` through `u_o` at density `rho`.
/// Mirror image of [`forward_branch`].
pub fn backward_branch(fam: Family, u_o: &State, rho: f64) -> CurveId {
    match fam {
        Family::One => {
            if rho < u_o.rho {
                CurveId::Shock(fam)
            } else {
                CurveId::Rarefaction(fam)
            }
        }
        Family::Two => {
            if rho <= u_o.rho {
                CurveId::Rarefaction(fam)
            } else {
                CurveId::Shock(fam)
            }
        }
    }
}

/// Forward Lax curve of `fam` through `u_o`: right states reachable from the
/// left state `u_o` by an admissible wave of that family.
pub fn forward_lax(fam: Family, u_o: &State, rho: f64, law: &GasLaw) -> f64 {
    curve_value(forward_branch(fam, u_o, rho), u_o, rho, law)
}

/// Backward Lax curve of `fam` through `u_o`: left states from which the
/// right state `u_o` is reachable by an admissible wave of that family.
pub fn backward_lax(fam: Family, u_o: &State, rho: f64, law: &GasLaw) -> f64 {
    curve_value(backward_branch(fam, u_o, rho), u_o, rho, law)
}

/// Slope of the forward Lax curve, used for Newton steps.
pub fn forward_lax_slope(fam: Family, u_o: &State, rho: f64, law: &GasLaw) -> f64 {
    curve_slope(forward_branch(fam, u_o, rho), u_o, rho, law)
}

/// Slope of the backward Lax curve.
pub fn backward_lax_slope(fam: Family, u_o: &State, rho: f64, law: &GasLaw) -> f64 {
    curve_slope(backward_branch(fam, u_o, rho), u_o, rho, law)
}

/// Speed of the `fam`-shock joining `u_o` on the left to the state of
/// density `rho` on its forward shock branch: `v_o + sign * a * sqrt(rho / rho_o)`.
pub fn shock_speed(fam: Family, u_o: &State, rho: f64, law: &GasLaw) -> f64 {
    u_o.v() + fam.sign() * law.a() * (rho / u_o.rho).sqrt()
}

/// Two-sided shock speed `(q_r - q_l) / (rho_r - rho_l)` from the jump
/// conditions of the mass equation. Equals [`shock_speed`] on admissible
/// shock pairs; useful as an independent check.
pub fn two_sided_shock_speed(l: &State, r: &State) -> f64 {
    (r.q - l.q) / (r.rho - l.rho)
}

/// Global maximum of the forward 1-curve through `u`: the largest momentum
/// any state reachable from `u` by a 1-wave can carry. Returns `(rho, q)`.
///
/// On the rarefaction side (`v <= a`) the maximum is at the sonic point
/// `rho = rho_o * exp((v - a) / a)`, where `q = a * rho`. For supersonic `u`
/// the maximum sits on the shock branch at `w = (v/a + sqrt((v/a)^2 + 3)) / 3`
/// in `w = sqrt(rho / rho_o)`, strictly below the sonic-point formula.
pub fn fl1_max(u: &State, law: &GasLaw) -> (f64, f64) {
    let a = law.a();
    let v = u.v();
    if v <= a {
        let rho = u.rho * ((v - a) / a).exp();
        (rho, a * rho)
    } else {
        let m = v / a;
        let w = (m + (m * m + 3.0).sqrt()) / 3.0;
        let rho = u.rho * w * w;
        (rho, forward_lax(Family::One, u, rho, law))
    }
}
