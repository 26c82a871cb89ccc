//! Exact solver for the classical two-wave Riemann pattern and self-similar
//! sampling of wave patterns, including the stationary interface
//! discontinuities produced by the coupled valve solver.

use crate::curves::{shock_speed, Family};
use crate::points::tilde_u;
use crate::state::{GasLaw, SonicClass, State};
use crate::Result;

/// Relative density tolerance below which a wave collapses to `Null`.
const NULL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WaveKind {
    Shock,
    RarefactionFan,
    /// Zero-speed jump held by the valve interface; not a classical wave.
    StationaryNonclassical,
    Null,
}

/// One wave of a pattern. `speed_lo == speed_hi` except for fans; `Null`
/// waves carry the characteristic speed of their family for bookkeeping and
/// separate two equal states.
#[derive(Clone, Copy, Debug)]
pub struct Wave {
    pub family: Option<Family>,
    pub kind: WaveKind,
    pub left: State,
    pub right: State,
    pub speed_lo: f64,
    pub speed_hi: f64,
}

impl Wave {
    pub fn is_null(&self) -> bool {
        self.kind == WaveKind::Null
    }

    pub fn null(fam: Family, u: State, law: &GasLaw) -> Self {
        let s = match fam {
            Family::One => u.lambda1(law),
            Family::Two => u.lambda2(law),
        };
        Wave { family: Some(fam), kind: WaveKind::Null, left: u, right: u, speed_lo: s, speed_hi: s }
    }

    pub fn stationary(left: State, right: State) -> Self {
        Wave {
            family: None,
            kind: WaveKind::StationaryNonclassical,
            left,
            right,
            speed_lo: 0.0,
            speed_hi: 0.0,
        }
    }

    /// State inside a rarefaction fan at slope `xi`, from the fan's
    /// self-similar profile. `xi` must lie within `[speed_lo, speed_hi]`.
    pub fn fan_state(&self, xi: f64, law: &GasLaw) -> State {
        debug_assert_eq!(self.kind, WaveKind::RarefactionFan);
        let a = law.a();
        let v_left = self.left.v();
        let (v, rho) = match self.family {
            Some(Family::One) => {
                let v = xi + a;
                (v, self.left.rho * ((v_left - v) / a).exp())
            }
            Some(Family::Two) => {
                let v = xi - a;
                (v, self.left.rho * ((v - v_left) / a).exp())
            }
            None => unreachable!("fans always carry a family"),
        };
        State::new(rho, rho * v)
    }
}

/// Waves ordered by speed together with the constant states between them.
/// `states` has one more entry than `waves`; `states[k]` and `states[k+1]`
/// flank `waves[k]` exactly.
#[derive(Clone, Debug)]
pub struct WavePattern {
    pub waves: Vec<Wave>,
    pub states: Vec<State>,
}

impl WavePattern {
    pub fn from_waves(waves: Vec<Wave>) -> Self {
        assert!(!waves.is_empty());
        let mut states = Vec::with_capacity(waves.len() + 1);
        states.push(waves[0].left);
        for w in &waves {
            states.push(w.right);
        }
        let pattern = WavePattern { waves, states };
        debug_assert!(pattern.is_ordered(), "waves out of order: {pattern:?}");
        pattern
    }

    pub fn left_state(&self) -> State {
        self.states[0]
    }

    pub fn right_state(&self) -> State {
        *self.states.last().unwrap()
    }

    /// Non-null waves must not overlap and states must chain across waves.
    fn is_ordered(&self) -> bool {
        let mut last = f64::NEG_INFINITY;
        for w in &self.waves {
            if w.speed_lo > w.speed_hi {
                return false;
            }
            if !w.is_null() {
                if w.speed_lo < last {
                    return false;
                }
                last = w.speed_hi;
            }
        }
        self.waves.windows(2).all(|p| {
            let (a, b) = (&p[0], &p[1]);
            a.right.rho == b.left.rho && a.right.q == b.left.q
        })
    }

    /// Value at slope `xi`, taking the right flank on a discontinuity.
    pub fn sample(&self, xi: f64, law: &GasLaw) -> State {
        for w in &self.waves {
            if w.is_null() {
                continue;
            }
            if xi < w.speed_lo {
                return w.left;
            }
            if w.kind == WaveKind::RarefactionFan && xi <= w.speed_hi {
                return w.fan_state(xi, law);
            }
        }
        self.right_state()
    }

    /// Limit from the left at slope `xi`, taking the left flank on a
    /// discontinuity. Inside fans the two limits agree.
    pub fn sample_left_limit(&self, xi: f64, law: &GasLaw) -> State {
        for w in &self.waves {
            if w.is_null() {
                continue;
            }
            if xi <= w.speed_lo {
                return w.left;
            }
            if w.kind == WaveKind::RarefactionFan && xi <= w.speed_hi {
                return w.fan_state(xi, law);
            }
        }
        self.right_state()
    }

    /// Trace at the interface from the left, `u(0-)`.
    pub fn trace_left(&self, law: &GasLaw) -> State {
        self.sample_left_limit(0.0, law)
    }

    /// Trace at the interface from the right, `u(0+)`.
    pub fn trace_right(&self, law: &GasLaw) -> State {
        self.sample(0.0, law)
    }

    pub fn max_abs_speed(&self) -> f64 {
        self.waves
            .iter()
            .filter(|w| !w.is_null())
            .map(|w| w.speed_lo.abs().max(w.speed_hi.abs()))
            .fold(0.0, f64::max)
    }
}

/// Builds the admissible wave of family `fam` joining `l` to `r`, both on
/// the forward Lax curve relation. First-family shocks compress (`rho`
/// increases left to right), second-family shocks expand.
pub(crate) fn classical_wave(fam: Family, l: State, r: State, law: &GasLaw) -> Wave {
    let drho = r.rho - l.rho;
    if drho.abs() <= NULL_TOL * l.rho.max(r.rho) {
        return Wave::null(fam, l, law);
    }
    let compressive = match fam {
        Family::One => drho > 0.0,
        Family::Two => drho < 0.0,
    };
    if compressive {
        let s = shock_speed(fam, &l, r.rho, law);
        debug_assert!(
            ((r.q - l.q) - s * drho).abs() <= 1e-8 * (1.0 + s.abs()) * (1.0 + drho.abs()),
            "jump condition violated for {fam:?} shock {l:?} -> {r:?}"
        );
        Wave { family: Some(fam), kind: WaveKind::Shock, left: l, right: r, speed_lo: s, speed_hi: s }
    } else {
        let (lo, hi) = match fam {
            Family::One => (l.lambda1(law), r.lambda1(law)),
            Family::Two => (l.lambda2(law), r.lambda2(law)),
        };
        debug_assert!(lo <= hi);
        Wave { family: Some(fam), kind: WaveKind::RarefactionFan, left: l, right: r, speed_lo: lo, speed_hi: hi }
    }
}

/// Exact solution of the Riemann problem with data `(u_l, u_r)`: a 1-wave, a
/// middle state on the intersection of the relevant Lax curves, and a 2-wave.
/// Coinciding data yield two null waves.
pub fn solve_rp(u_l: &State, u_r: &State, law: &GasLaw) -> Result<WavePattern> {
    if u_l.rho == u_r.rho && u_l.q == u_r.q {
        return Ok(WavePattern::from_waves(vec![
            Wave::null(Family::One, *u_l, law),
            Wave::null(Family::Two, *u_l, law),
        ]));
    }
    let t = tilde_u(u_l, u_r, law)?;
    // Snap the middle state onto a datum when a wave degenerates, so the
    // pattern's flanks reproduce the data exactly.
    let mid = if (t.rho - u_l.rho).abs() <= NULL_TOL * t.rho.max(u_l.rho) {
        *u_l
    } else if (t.rho - u_r.rho).abs() <= NULL_TOL * t.rho.max(u_r.rho) {
        *u_r
    } else {
        t
    };
    Ok(WavePattern::from_waves(vec![
        classical_wave(Family::One, *u_l, mid, law),
        classical_wave(Family::Two, mid, *u_r, law),
    ]))
}

/// Sonic classes of the data and sides of the emerging waves.
#[derive(Clone, Copy, Debug)]
pub struct SameSideReport {
    pub left_class: SonicClass,
    pub right_class: SonicClass,
    /// All non-null waves have strictly negative speeds.
    pub all_left: bool,
    /// All non-null waves have strictly positive speeds.
    pub all_right: bool,
}

impl SameSideReport {
    pub fn same_side(&self) -> bool {
        self.all_left || self.all_right
    }
}

/// Reports whether the solution's waves leave the interface entirely on one
/// side. With both data subsonic this never happens, which is what makes
/// interface traces well defined.
pub fn same_side_wave_check(u_l: &State, u_r: &State, law: &GasLaw) -> Result<SameSideReport> {
    let pattern = solve_rp(u_l, u_r, law)?;
    let real: Vec<&Wave> = pattern.waves.iter().filter(|w| !w.is_null()).collect();
    let all_left = !real.is_empty() && real.iter().all(|w| w.speed_hi < 0.0);
    let all_right = !real.is_empty() && real.iter().all(|w| w.speed_lo > 0.0);
    Ok(SameSideReport {
        left_class: u_l.sonic_class(law),
        right_class: u_r.sonic_class(law),
        all_left,
        all_right,
    })
}
