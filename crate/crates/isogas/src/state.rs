//! Gas law, conservative states and characteristic structure.

use serde::{Deserialize, Serialize};

/// Isothermal pressure law `p(rho) = a^2 rho` with constant sound speed `a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GasLaw {
    a: f64,
}

impl GasLaw {
    /// Panics unless `a` is finite and positive.
    pub fn new(a: f64) -> Self {
        assert!(a.is_finite() && a > 0.0, "sound speed must be positive, got {a}");
        GasLaw { a }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        self.a * self.a * rho
    }
}

/// Conservative state (density, momentum) in the open half plane `rho > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub rho: f64,
    pub q: f64,
}

impl State {
    /// Panics unless `rho > 0` and both components are finite.
    pub fn new(rho: f64, q: f64) -> Self {
        assert!(
            rho.is_finite() && rho > 0.0 && q.is_finite(),
            "state ({rho}, {q}) outside the state space"
        );
        State { rho, q }
    }

    /// Velocity `v = q / rho`.
    pub fn v(&self) -> f64 {
        self.q / self.rho
    }

    pub fn lambda1(&self, law: &GasLaw) -> f64 {
        self.v() - law.a()
    }

    pub fn lambda2(&self, law: &GasLaw) -> f64 {
        self.v() + law.a()
    }

    pub fn max_abs_lambda(&self, law: &GasLaw) -> f64 {
        self.lambda1(law).abs().max(self.lambda2(law).abs())
    }

    /// Sonic classification by `|v|` against `a`, with a small relative band
    /// around equality so states built from closed forms land on `Sonic`.
    pub fn sonic_class(&self, law: &GasLaw) -> SonicClass {
        let a = law.a();
        let d = self.v().abs() - a;
        if d.abs() <= 1e-9 * a {
            SonicClass::Sonic
        } else if d < 0.0 {
            SonicClass::Subsonic
        } else {
            SonicClass::Supersonic
        }
    }

    pub fn is_supersonic(&self, law: &GasLaw) -> bool {
        matches!(self.sonic_class(law), SonicClass::Supersonic)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SonicClass {
    Subsonic,
    Sonic,
    Supersonic,
}

/// Characteristic speeds `(v - a, v + a)` of the isothermal system.
pub fn eigenvalues(u: &State, law: &GasLaw) -> (f64, f64) {
    (u.lambda1(law), u.lambda2(law))
}
