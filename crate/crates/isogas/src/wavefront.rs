//! Exact piecewise solution for a three-state datum feeding the valve: a
//! fast upstream state behind an incoming 2-shock, a sonic buffer state in
//! front of it, and a resting downstream state. The construction follows the
//! finitely many wave interactions that occur before a rarefaction gets
//! involved, and reports the time up to which it is valid together with the
//! exact interface flow history on that window.
//!
//! The interaction cascade: the valve's opening decision at `t = 0` emits a
//! 1-wave to the left (and possibly a 2-shock to the right); the incoming
//! shock collides with that 1-wave; the collision sends a 2-shock into the
//! valve, which re-decides and emits a second 1-wave; the two 1-waves merge.
//! Each resolution is an exact Riemann or valve solve, so every front
//! carries exact flank states.

use crate::curves::{curve_value, CurveId, Family};
use crate::points::{bar_u, hat_u_zero, tilde_u};
use crate::riemann::{solve_rp, Wave, WaveKind};
use crate::state::{GasLaw, State};
use crate::valve::{interface_patterns, q_aitch, ValveParams};
use crate::{Error, Result};

/// Validated three-state datum: `u_i` for `x < x_jump`, `u_l` on
/// `(x_jump, 0)`, `u_r` for `x > 0`.
#[derive(Clone, Debug)]
pub struct ScenarioData {
    pub u_i: State,
    pub u_l: State,
    pub u_r: State,
    pub params: ValveParams,
    pub x_jump: f64,
    /// Speed of the incoming 2-shock.
    pub s_in: f64,
    /// Stagnation state the closed valve produces from `u_l`.
    pub hat0: State,
    /// Middle state of the upstream datum against the stagnation state; its
    /// momentum separates an opening decision that re-absorbs the incoming
    /// flow from one that re-expands it.
    pub tilde1: State,
    /// Flow the valve holds while closed against the incoming shock.
    pub q_tilde: f64,
    /// Largest threshold the post-collision state can open against.
    pub q_bar_t: f64,
}

fn rel_close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * (1.0 + x.abs() + y.abs())
}

impl ScenarioData {
    /// Checks the structural assumptions the construction needs:
    /// a resting downstream state, a sonic buffer on the incoming shock
    /// curve, a genuinely supersonic upstream state, and the momentum
    /// ordering `0 < q_l < q_tilde < q_i`.
    pub fn new(u_i: State, u_l: State, u_r: State, params: ValveParams, x_jump: f64) -> Result<Self> {
        let law = &params.law;
        let a = law.a();
        let fail = |msg: String| Err(Error::ScenarioViolation(msg));
        if !(x_jump < 0.0) {
            return fail(format!("the upstream jump must sit left of the valve, got x = {x_jump}"));
        }
        if u_r.q.abs() > 1e-9 * a * u_r.rho {
            return fail(format!("the downstream state must rest, got q = {}", u_r.q));
        }
        if !rel_close(u_l.v(), a, 1e-9) {
            return fail(format!("the buffer state must be sonic, got v = {} with a = {a}", u_l.v()));
        }
        let on_curve = curve_value(CurveId::Shock(Family::Two), &u_i, u_l.rho, law);
        if !rel_close(on_curve, u_l.q, 1e-8) {
            return fail(format!(
                "the buffer state must sit on the forward 2-curve of the upstream state \
                 (expected q = {on_curve}, got {})",
                u_l.q
            ));
        }
        if !(u_l.rho < u_i.rho) {
            return fail("the upstream jump must be a compressive 2-shock".into());
        }
        if !(u_i.v() > a) {
            return fail(format!("the upstream state must be supersonic, got v = {}", u_i.v()));
        }
        let hat0 = hat_u_zero(&u_l, law);
        let tilde1 = tilde_u(&u_i, &hat0, law)?;
        let q_tilde = tilde1.q;
        if !(0.0 < u_l.q && u_l.q < q_tilde && q_tilde < u_i.q) {
            return fail(format!(
                "momentum ordering violated: need 0 < q_l < q~ < q_i, got q_l = {}, q~ = {q_tilde}, q_i = {}",
                u_l.q, u_i.q
            ));
        }
        if !(tilde1.v() < a) {
            return fail("the post-collision middle state must be subsonic".into());
        }
        let s_in = (u_l.q - u_i.q) / (u_l.rho - u_i.rho);
        debug_assert!(s_in > 0.0);
        let q_bar_t = bar_u(&tilde1, law).q;
        Ok(ScenarioData { u_i, u_l, u_r, params, x_jump, s_in, hat0, tilde1, q_tilde, q_bar_t })
    }

    /// Sonic state on the forward 2-curve through `u_i` (shock branch when
    /// the upstream state is supersonic). Pure geometry, no validation.
    pub fn sonic_buffer(u_i: &State, law: &GasLaw) -> State {
        let a = law.a();
        let rho = if u_i.v() >= a {
            // Shock branch: w - 1/w = (a - v_i)/a in w = sqrt(rho/rho_i).
            let c = (a - u_i.v()) / a;
            let w = (c + (c * c + 4.0).sqrt()) / 2.0;
            u_i.rho * w * w
        } else {
            u_i.rho * ((a - u_i.v()) / a).exp()
        };
        State::new(rho, a * rho)
    }

    /// Builds the datum with the buffer state derived from `u_i`.
    pub fn from_upstream(u_i: State, u_r: State, params: ValveParams, x_jump: f64) -> Result<Self> {
        let u_l = Self::sonic_buffer(&u_i, &params.law);
        Self::new(u_i, u_l, u_r, params, x_jump)
    }

    /// Which interaction cascade the threshold selects.
    pub fn classify_case(&self) -> Case {
        let q = self.params.q_star;
        if q <= self.u_l.q {
            Case::OpenFromStart
        } else if q <= self.q_tilde {
            Case::OpensAbsorbing
        } else if q <= self.q_bar_t {
            Case::OpensExpanding
        } else {
            Case::NeverOpens
        }
    }
}

/// Threshold regimes of the cascade.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    /// Threshold at or below the buffer momentum: valve open from `t = 0`.
    OpenFromStart,
    /// Valve opens when the collision shock arrives; opening emits a 1-shock.
    OpensAbsorbing,
    /// Valve opens on arrival; opening emits a 1-rarefaction.
    OpensExpanding,
    /// The threshold exceeds what the collision state can deliver.
    NeverOpens,
}

/// Why the construction stops being tracked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// A rarefaction is about to reach the valve.
    FanReachedValve,
    /// A rarefaction is about to interact with a shock.
    FanMetShock,
    /// No further interaction occurs; valid for all time.
    NoInteraction,
}

/// A wave tracked in the `(x, t)` plane: born at `(x0, t0)`, flanks and
/// speeds from `wave`, alive until `died`.
#[derive(Clone, Debug)]
pub struct Front {
    pub wave: Wave,
    pub x0: f64,
    pub t0: f64,
    pub died: f64,
}

impl Front {
    fn alive_at(&self, t: f64) -> bool {
        self.t0 <= t && t < self.died
    }

    fn alive(&self) -> bool {
        self.died == f64::INFINITY
    }

    /// Positions of the left and right edges at time `t`.
    fn span(&self, t: f64) -> (f64, f64) {
        let dt = t - self.t0;
        (self.x0 + self.wave.speed_lo * dt, self.x0 + self.wave.speed_hi * dt)
    }

    #[cfg(test)]
    fn is_stationary(&self) -> bool {
        self.wave.kind == WaveKind::StationaryNonclassical
    }

    fn is_fan(&self) -> bool {
        self.wave.kind == WaveKind::RarefactionFan
    }
}

/// A resolved interaction.
#[derive(Clone, Debug)]
pub struct Event {
    pub t: f64,
    pub x: f64,
    pub incoming: Vec<Wave>,
    pub outgoing: Vec<Wave>,
}

/// The assembled solution: all fronts ever tracked, the resolved events, the
/// interface flow history, and the window `[0, t_stop]` it covers.
#[derive(Clone, Debug)]
pub struct ExactSolution {
    pub data: ScenarioData,
    pub case: Case,
    pub fronts: Vec<Front>,
    pub events: Vec<Event>,
    /// `(time, flow)` pairs; piecewise constant from each time on.
    pub flow_history: Vec<(f64, f64)>,
    pub t_stop: f64,
    pub stop: StopReason,
}

impl ExactSolution {
    /// Time at which the valve's flow was last re-decided by an arriving
    /// wave, if any wave arrived.
    pub fn t_open(&self) -> Option<f64> {
        self.flow_history.iter().find(|(t, _)| *t > 0.0).map(|(t, _)| *t)
    }

    /// Interface flow at time `t`.
    pub fn flow_at(&self, t: f64) -> f64 {
        self.flow_history.iter().rev().find(|(s, _)| *s <= t).map_or(0.0, |(_, q)| *q)
    }

    /// Exact state at `(t, x)`; `x = 0` returns the downstream flank.
    pub fn eval(&self, t: f64, x: f64) -> Result<State> {
        if !(t >= 0.0) || t > self.t_stop * (1.0 + 1e-12) {
            return Err(Error::OutOfDomain { t, t_stop: self.t_stop });
        }
        let mut alive: Vec<&Front> = self.fronts.iter().filter(|f| f.alive_at(t)).collect();
        alive.sort_by(|f, g| {
            let (fl, _) = f.span(t);
            let (gl, _) = g.span(t);
            fl.total_cmp(&gl).then(f.wave.speed_lo.total_cmp(&g.wave.speed_lo))
        });
        debug_assert!(!alive.is_empty());
        let mut left_state = alive[0].wave.left;
        for f in alive {
            let (lo, hi) = f.span(t);
            if x < lo {
                return Ok(left_state);
            }
            if f.is_fan() && x <= hi {
                if t - f.t0 <= 0.0 {
                    return Ok(f.wave.right);
                }
                return Ok(f.wave.fan_state((x - f.x0) / (t - f.t0), &self.data.params.law));
            }
            left_state = f.wave.right;
        }
        Ok(left_state)
    }
}

/// Candidate next interaction.
#[derive(Clone, Copy, Debug)]
enum Candidate {
    /// Fronts `i` and `j` collide at `(t, x)`.
    Collision { t: f64, x: f64, i: usize, j: usize },
    /// Front `i` reaches the valve at time `t`.
    ValveHit { t: f64, i: usize },
}

impl Candidate {
    fn time(&self) -> f64 {
        match self {
            Candidate::Collision { t, .. } | Candidate::ValveHit { t, .. } => *t,
        }
    }
}

const MAX_EVENTS: usize = 16;

/// Runs the interaction cascade for the datum and threshold in `s`.
pub fn build_exact(s: &ScenarioData) -> Result<ExactSolution> {
    let law = s.params.law;
    let mut fronts: Vec<Front> = Vec::new();
    let mut events: Vec<Event> = Vec::new();
    let mut flow_history: Vec<(f64, f64)> = Vec::new();

    let born = |fronts: &mut Vec<Front>, wave: Wave, x0: f64, t0: f64| {
        if wave.kind != WaveKind::Null {
            fronts.push(Front { wave, x0, t0, died: f64::INFINITY });
        }
    };

    // Incoming 2-shock.
    let incoming = Wave {
        family: Some(Family::Two),
        kind: WaveKind::Shock,
        left: s.u_i,
        right: s.u_l,
        speed_lo: s.s_in,
        speed_hi: s.s_in,
    };
    born(&mut fronts, incoming, s.x_jump, 0.0);

    // Valve decision at t = 0. The construction follows the coherent law.
    let q0 = q_aitch(&s.u_l, &s.params);
    let (lp, rp) = interface_patterns(q0, &s.u_l, &s.u_r, &law)?;
    flow_history.push((0.0, q0));
    for w in &lp.waves {
        born(&mut fronts, *w, 0.0, 0.0);
    }
    for w in &rp.waves {
        born(&mut fronts, *w, 0.0, 0.0);
    }
    let mut valve_front = Front {
        wave: Wave::stationary(lp.trace_left(&law), rp.trace_right(&law)),
        x0: 0.0,
        t0: 0.0,
        died: f64::INFINITY,
    };

    let mut t_now = 0.0;
    for _ in 0..MAX_EVENTS {
        // Enumerate candidates among alive classical fronts.
        let alive: Vec<usize> = (0..fronts.len()).filter(|&k| fronts[k].alive()).collect();
        let mut best: Option<Candidate> = None;
        let push = |c: Candidate, best: &mut Option<Candidate>| {
            if best.as_ref().map_or(true, |b| c.time() < b.time()) {
                *best = Some(c);
            }
        };
        for (ai, &i) in alive.iter().enumerate() {
            for &j in &alive[ai + 1..] {
                let (f, g) = (&fronts[i], &fronts[j]);
                let t_ref = f.t0.max(g.t0);
                let (fp, gp) = (f.span(t_ref), g.span(t_ref));
                // Order by position; same birth point means they diverge.
                let ((lf, li), (rf, rj)) = if fp.1 <= gp.0 && fp != gp {
                    ((f, i), (g, j))
                } else if gp.1 <= fp.0 && fp != gp {
                    ((g, j), (f, i))
                } else {
                    continue;
                };
                let s_l = lf.wave.speed_hi;
                let s_r = rf.wave.speed_lo;
                if s_l <= s_r {
                    continue;
                }
                let gap = rf.span(t_ref).0 - lf.span(t_ref).1;
                let t_c = t_ref + gap / (s_l - s_r);
                if t_c > t_now * (1.0 + 1e-13) + 1e-15 {
                    let x = lf.x0 + lf.wave.speed_hi * (t_c - lf.t0);
                    push(Candidate::Collision { t: t_c, x, i: li, j: rj }, &mut best);
                }
            }
            let f = &fronts[i];
            if f.x0 < 0.0 && f.wave.speed_hi > 0.0 {
                push(Candidate::ValveHit { t: f.t0 - f.x0 / f.wave.speed_hi, i }, &mut best);
            } else if f.x0 > 0.0 && f.wave.speed_lo < 0.0 {
                push(Candidate::ValveHit { t: f.t0 - f.x0 / f.wave.speed_lo, i }, &mut best);
            }
        }

        let Some(cand) = best else {
            return Ok(ExactSolution {
                data: s.clone(),
                case: s.classify_case(),
                fronts: collect_fronts(fronts, valve_front),
                events,
                flow_history,
                t_stop: f64::INFINITY,
                stop: StopReason::NoInteraction,
            });
        };

        // Any rarefaction involvement ends the tracked construction.
        let fan_involved = match cand {
            Candidate::Collision { i, j, .. } => fronts[i].is_fan() || fronts[j].is_fan(),
            Candidate::ValveHit { i, .. } => fronts[i].is_fan(),
        };
        if fan_involved {
            let stop = match cand {
                Candidate::ValveHit { .. } => StopReason::FanReachedValve,
                Candidate::Collision { .. } => StopReason::FanMetShock,
            };
            return Ok(ExactSolution {
                data: s.clone(),
                case: s.classify_case(),
                fronts: collect_fronts(fronts, valve_front),
                events,
                flow_history,
                t_stop: cand.time(),
                stop,
            });
        }

        t_now = cand.time();
        match cand {
            Candidate::Collision { t, x, i, j } => {
                // The candidate stores the left participant first.
                let (li, rj) = (i, j);
                let (lw, rw) = (fronts[li].wave, fronts[rj].wave);
                if !rel_close(lw.right.rho, rw.left.rho, 1e-8) || !rel_close(lw.right.q, rw.left.q, 1e-8) {
                    return Err(Error::ScenarioViolation(format!(
                        "colliding fronts disagree on the middle state at t = {t}"
                    )));
                }
                let out = solve_rp(&lw.left, &rw.right, &law)?;
                fronts[li].died = t;
                fronts[rj].died = t;
                for w in &out.waves {
                    born(&mut fronts, *w, x, t);
                }
                events.push(Event { t, x, incoming: vec![lw, rw], outgoing: out.waves.clone() });
            }
            Candidate::ValveHit { t, i } => {
                let arriving = fronts[i].wave;
                let from_left = fronts[i].x0 < 0.0;
                // The arriving wave replaces the flank it hits.
                let (tau, sigma) = if from_left {
                    debug_assert!(rel_close(arriving.right.rho, valve_front.wave.left.rho, 1e-8));
                    (arriving.left, valve_front.wave.right)
                } else {
                    debug_assert!(rel_close(arriving.left.rho, valve_front.wave.right.rho, 1e-8));
                    (valve_front.wave.left, arriving.right)
                };
                let q = q_aitch(&tau, &s.params);
                let (lp, rp) = interface_patterns(q, &tau, &sigma, &law)?;
                fronts[i].died = t;
                let old_valve_wave = valve_front.wave;
                valve_front.died = t;
                fronts.push(valve_front);
                valve_front = Front {
                    wave: Wave::stationary(lp.trace_left(&law), rp.trace_right(&law)),
                    x0: 0.0,
                    t0: t,
                    died: f64::INFINITY,
                };
                let mut outgoing = Vec::new();
                for w in lp.waves.iter().chain(rp.waves.iter()) {
                    born(&mut fronts, *w, 0.0, t);
                    if w.kind != WaveKind::Null {
                        outgoing.push(*w);
                    }
                }
                outgoing.push(valve_front.wave);
                flow_history.push((t, q));
                events.push(Event { t, x: 0.0, incoming: vec![arriving, old_valve_wave], outgoing });
            }
        }
    }
    Err(Error::ScenarioViolation(format!(
        "interaction cascade did not settle within {MAX_EVENTS} events"
    )))
}

fn collect_fronts(mut fronts: Vec<Front>, valve_front: Front) -> Vec<Front> {
    fronts.push(valve_front);
    fronts
}

/// Time-averaged interface flow `(1/T) \int_0^T q(t, 0) dt` of the exact
/// construction. The flow history stays valid past `t_stop` until a wave
/// actually changes the trace at the valve, which for the documented data
/// happens beyond `horizon`; `T` beyond `horizon` is refused.
pub fn exact_trace_flow(sol: &ExactSolution, t_avg: f64, horizon: f64) -> Result<f64> {
    if !(t_avg > 0.0) {
        return Err(Error::OutOfRange { what: "averaging window", value: t_avg, lo: 0.0, hi: horizon });
    }
    if t_avg > horizon * (1.0 + 1e-12) {
        return Err(Error::OutOfValidity { t: t_avg, limit: horizon });
    }
    let mut total = 0.0;
    for (k, &(t_k, q_k)) in sol.flow_history.iter().enumerate() {
        if t_k >= t_avg {
            break;
        }
        let t_next = sol.flow_history.get(k + 1).map_or(t_avg, |&(t, _)| t).min(t_avg);
        total += q_k * (t_next - t_k);
    }
    Ok(total / t_avg)
}
