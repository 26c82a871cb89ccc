//! One-way valve at `x = 0`: flow laws, the state-space geometry that decides
//! whether a closure decision is self-consistent, and the coupled solver that
//! joins two half Riemann problems through a prescribed interface flow.
//!
//! A valve law assigns a flow `Q` to the upstream trace. The naive law opens
//! to the threshold `q*` whenever the upstream state can deliver it and
//! closes otherwise; on one region of the state space that closure is not
//! self-consistent (the state the closure produces at the interface would
//! re-open the valve), which is what drives chattering in simulations. The
//! corrected law returns the upstream momentum itself on that region, which
//! yields a coherent stationary pattern.

use crate::curves::Family;
use crate::points::{bar_u, check_u, hat_u, ring_q};
use crate::riemann::{solve_rp, Wave, WaveKind, WavePattern};
use crate::state::{GasLaw, State};
use crate::{Error, Result};
use std::sync::OnceLock;

/// Valve threshold and the gas it operates on.
#[derive(Clone, Copy, Debug)]
pub struct ValveParams {
    pub law: GasLaw,
    pub q_star: f64,
}

impl ValveParams {
    /// Panics unless the threshold is finite and positive.
    pub fn new(law: GasLaw, q_star: f64) -> Self {
        assert!(q_star.is_finite() && q_star > 0.0, "threshold must be positive, got {q_star}");
        ValveParams { law, q_star }
    }
}

/// Largest flow the upstream state `u` can deliver through the interface:
/// the sonic maximum of its forward 1-curve while subsonic, the momentum
/// itself once supersonic. Continuously differentiable across `v = a`.
pub fn q_cap(u: &State, law: &GasLaw) -> f64 {
    if u.v() <= law.a() {
        bar_u(u, law).q
    } else {
        u.q
    }
}

/// Relative snap width for region and threshold comparisons.
const SNAP: f64 = 1e-12;

/// Naive valve law: threshold flow when deliverable, zero otherwise.
pub fn q_vee(u: &State, p: &ValveParams) -> f64 {
    if q_cap(u, &p.law) >= p.q_star * (1.0 - SNAP) {
        p.q_star
    } else {
        0.0
    }
}

/// Velocity ratio `v / a` above which a closure decision can contradict
/// itself, and the companion subsonic ratio. Both are universal constants,
/// the two roots of `sqrt(z) (1 - z) = 1/e` mapped through `v/a = 1/sqrt(z) - sqrt(z)`.
fn velocity_ratios() -> (f64, f64) {
    static RATIOS: OnceLock<(f64, f64)> = OnceLock::new();
    *RATIOS.get_or_init(|| {
        let g = |z: f64| z.sqrt() * (1.0 - z) - (-1.0_f64).exp();
        let dg = |z: f64| (1.0 - 3.0 * z) / (2.0 * z.sqrt());
        let to_ratio = |z: f64| 1.0 / z.sqrt() - z.sqrt();
        let z_sup = crate::roots::solve_bracketed(g, dg, 1e-6, 1.0 / 3.0, 1.0, 1.0, "velocity ratio sup")
            .expect("universal constant");
        let z_sub = crate::roots::solve_bracketed(g, dg, 1.0 / 3.0, 1.0 - 1e-9, 1.0, 1.0, "velocity ratio sub")
            .expect("universal constant");
        (to_ratio(z_sup), to_ratio(z_sub))
    })
}

/// States singled out by the valve geometry for a given threshold.
#[derive(Clone, Copy, Debug)]
pub struct SpecialStates {
    /// Sonic state carrying exactly the threshold flow.
    pub sonic_threshold: State,
    /// Stagnant state whose deliverable maximum is exactly the threshold.
    pub rest_threshold: State,
    /// Supersonic corner of the chatter-prone region: on the threshold level
    /// and on the stagnation curve through `rest_threshold`.
    pub corner_supersonic: State,
    /// Subsonic companion intersection of the same two curves.
    pub corner_subsonic: State,
    /// `v / a` at `corner_supersonic`.
    pub v_sup_ratio: f64,
    /// `v / a` at `corner_subsonic`.
    pub v_sub_ratio: f64,
}

/// Computes the distinguished states for `p`. The two corner states satisfy
/// `q = q_star` and deliver exactly `q_star` after stagnation.
pub fn special_states(p: &ValveParams) -> SpecialStates {
    let a = p.law.a();
    let (r_sup, r_sub) = velocity_ratios();
    let rho_rest = std::f64::consts::E * p.q_star / a;
    let state_at = |ratio: f64| {
        let v = ratio * a;
        // v/a = 1/sqrt(z) - sqrt(z) inverted for z in (0, 1].
        let sq = (-ratio + (ratio * ratio + 4.0).sqrt()) / 2.0;
        let rho = sq * sq * rho_rest;
        State::new(rho, rho * v)
    };
    SpecialStates {
        sonic_threshold: State::new(p.q_star / a, p.q_star),
        rest_threshold: State::new(rho_rest, 0.0),
        corner_supersonic: state_at(r_sup),
        corner_subsonic: state_at(r_sub),
        v_sup_ratio: r_sup,
        v_sub_ratio: r_sub,
    }
}

/// Where a state sits relative to the valve's closure geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionTag {
    /// `v <= v_sup`: opening and closing decisions are always self-consistent.
    CoherentModerate,
    /// Fast stream already carrying at least the threshold: the valve stays open.
    CoherentAbove,
    /// Fast stream that cannot reach the threshold even after stagnating at
    /// the interface: closure is self-consistent.
    CoherentChoked,
    /// Fast stream below the threshold whose interface stagnation state could
    /// deliver it: the naive law closes, then immediately re-opens.
    ChatterProne,
}

impl RegionTag {
    pub fn chatter_prone(&self) -> bool {
        matches!(self, RegionTag::ChatterProne)
    }
}

/// Whether the valve opens on upstream state `u` (its deliverable maximum
/// reaches the threshold). Boundary states count as open.
pub fn valve_opens(u: &State, p: &ValveParams) -> bool {
    q_cap(u, &p.law) >= p.q_star * (1.0 - SNAP)
}

/// Classifies `u` against the closure geometry. Comparisons snap within a
/// `1e-12` relative band so states constructed on a boundary land on its
/// closed side.
pub fn classify_region(u: &State, p: &ValveParams) -> RegionTag {
    let a = p.law.a();
    let (r_sup, _) = velocity_ratios();
    let v_sup = r_sup * a;
    let v = u.v();
    if v <= v_sup + SNAP * v_sup {
        RegionTag::CoherentModerate
    } else if u.q >= p.q_star * (1.0 - SNAP) {
        RegionTag::CoherentAbove
    } else if ring_q(u, &p.law) >= p.q_star * (1.0 - SNAP) {
        RegionTag::ChatterProne
    } else {
        RegionTag::CoherentChoked
    }
}

/// Corrected valve law: agrees with the naive law except on the
/// chatter-prone region, where it passes the upstream momentum unchanged,
/// producing a stationary interface shock instead of a closure that would
/// immediately re-open.
pub fn q_aitch(u: &State, p: &ValveParams) -> f64 {
    if valve_opens(u, p) {
        p.q_star
    } else if classify_region(u, p).chatter_prone() {
        u.q
    } else {
        0.0
    }
}

/// Interface flow law used by the coupled solver and the scheme.
#[derive(Clone, Copy)]
pub enum SolverKind {
    /// No valve: the classical solver, flow read off the interface trace.
    Lax,
    /// Naive open/closed law.
    Vee,
    /// Corrected law, coherent everywhere.
    Aitch,
    /// User-supplied law; must stay within `[0, q_cap(u_l)]`.
    Custom(fn(&State, &State, &ValveParams) -> f64),
}

impl std::fmt::Debug for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolverKind::Lax => write!(f, "Lax"),
            SolverKind::Vee => write!(f, "Vee"),
            SolverKind::Aitch => write!(f, "Aitch"),
            SolverKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl SolverKind {
    pub fn has_valve(&self) -> bool {
        !matches!(self, SolverKind::Lax)
    }

    /// Interface flow for the traces `(u_l, u_r)`.
    pub fn flow(&self, u_l: &State, u_r: &State, p: &ValveParams) -> Result<f64> {
        match self {
            SolverKind::Lax => Ok(solve_rp(u_l, u_r, &p.law)?.trace_right(&p.law).q),
            SolverKind::Vee => Ok(q_vee(u_l, p)),
            SolverKind::Aitch => Ok(q_aitch(u_l, p)),
            SolverKind::Custom(f) => Ok(f(u_l, u_r, p)),
        }
    }
}

/// Wave of family `fam` joining `l` to `r` with the exact two-sided jump
/// speed on shocks, so a shock with equal flank momenta is exactly
/// stationary. Used for interface patterns.
fn interface_wave(fam: Family, l: State, r: State, law: &GasLaw) -> Wave {
    let drho = r.rho - l.rho;
    if drho.abs() <= 1e-12 * l.rho.max(r.rho) {
        return Wave::null(fam, l, law);
    }
    let compressive = match fam {
        Family::One => drho > 0.0,
        Family::Two => drho < 0.0,
    };
    if compressive {
        let s = (r.q - l.q) / drho;
        Wave { family: Some(fam), kind: WaveKind::Shock, left: l, right: r, speed_lo: s, speed_hi: s }
    } else {
        let (lo, hi) = match fam {
            Family::One => (l.lambda1(law), r.lambda1(law)),
            Family::Two => (l.lambda2(law), r.lambda2(law)),
        };
        Wave { family: Some(fam), kind: WaveKind::RarefactionFan, left: l, right: r, speed_lo: lo, speed_hi: hi }
    }
}

/// Half patterns induced by pushing the flow level `q` through the interface:
/// on the left a 1-wave from `u_l` down to the largest-density crossing of
/// its forward 1-curve with `q`, on the right a 2-wave up from the matching
/// crossing of the backward 2-curve through `u_r`.
///
/// Does not check `q` against the valve's admissible range; the scheme needs
/// to push levels that exceed the naive cap of a supersonic trace. Fails only
/// if no crossing exists at all.
pub fn interface_patterns(q: f64, u_l: &State, u_r: &State, law: &GasLaw) -> Result<(WavePattern, WavePattern)> {
    let hat = hat_u(q, u_l, law)?;
    let check = check_u(q, u_r, law)?;
    let left = WavePattern::from_waves(vec![
        interface_wave(Family::One, *u_l, hat, law),
        Wave::null(Family::Two, hat, law),
    ]);
    let right = WavePattern::from_waves(vec![
        Wave::null(Family::One, check, law),
        interface_wave(Family::Two, check, *u_r, law),
    ]);
    Ok((left, right))
}

/// Solution of the interface-coupled problem: half patterns restricted to
/// each side and the flow joining them.
#[derive(Clone, Debug)]
pub struct CoupledSolution {
    pub left: WavePattern,
    pub right: WavePattern,
    pub q: f64,
}

impl CoupledSolution {
    /// Trace at `0-`.
    pub fn trace_left(&self, law: &GasLaw) -> State {
        self.left.trace_left(law)
    }

    /// Trace at `0+`.
    pub fn trace_right(&self, law: &GasLaw) -> State {
        self.right.trace_right(law)
    }

    /// Self-similar evaluation; `x = 0` takes the right trace.
    pub fn eval(&self, t: f64, x: f64, law: &GasLaw) -> State {
        if t <= 0.0 {
            return if x < 0.0 { self.left.left_state() } else { self.right.right_state() };
        }
        let xi = x / t;
        if x < 0.0 {
            self.left.sample(xi, law)
        } else {
            self.right.sample(xi, law)
        }
    }

    /// Waves for display: real left waves, the interface jump, real right waves.
    pub fn display_waves(&self, law: &GasLaw) -> Vec<Wave> {
        let mut out: Vec<Wave> = self.left.waves.iter().filter(|w| !w.is_null()).cloned().collect();
        let (tl, tr) = (self.trace_left(law), self.trace_right(law));
        if tl.rho != tr.rho || tl.q != tr.q {
            out.push(Wave::stationary(tl, tr));
        }
        out.extend(self.right.waves.iter().filter(|w| !w.is_null()).cloned());
        out
    }
}

/// Solves the interface-coupled Riemann problem for the given valve law.
/// With `Lax` the classical solution is returned on both sides. Otherwise
/// the law's flow is validated against `[0, q_cap(u_l)]` and pushed through
/// [`interface_patterns`].
pub fn solve_coupled(kind: SolverKind, u_l: &State, u_r: &State, p: &ValveParams) -> Result<CoupledSolution> {
    if let SolverKind::Lax = kind {
        let pat = solve_rp(u_l, u_r, &p.law)?;
        let q = pat.trace_right(&p.law).q;
        return Ok(CoupledSolution { left: pat.clone(), right: pat, q });
    }
    let q = kind.flow(u_l, u_r, p)?;
    let cap = q_cap(u_l, &p.law);
    if !(0.0..=cap * (1.0 + 1e-9) + f64::MIN_POSITIVE).contains(&q) {
        return Err(Error::FlowOutOfRange { q, cap });
    }
    let (left, right) = interface_patterns(q.min(cap), u_l, u_r, &p.law)?;
    debug_assert!(
        left.waves[0].speed_hi <= 1e-9 * (1.0 + p.law.a()),
        "admissible flow must keep the left wave at or left of the interface"
    );
    Ok(CoupledSolution { left, right, q })
}

fn states_close(x: &State, y: &State) -> bool {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-8 * (1.0 + a.abs() + b.abs());
    close(x.rho, y.rho) && close(x.q, y.q)
}

/// Coherence of a valve law on data `(u_l, u_r)`: solve, read the interface
/// traces, solve again from the traces; the law is coherent when the traces
/// reproduce themselves.
pub fn coherence_check(kind: SolverKind, u_l: &State, u_r: &State, p: &ValveParams) -> Result<bool> {
    let first = solve_coupled(kind, u_l, u_r, p)?;
    let (tau, sigma) = (first.trace_left(&p.law), first.trace_right(&p.law));
    let second = solve_coupled(kind, &tau, &sigma, p)?;
    Ok(states_close(&tau, &second.trace_left(&p.law)) && states_close(&sigma, &second.trace_right(&p.law)))
}

/// Strict variant: additionally requires the re-solved pattern to be
/// constant on each side, i.e. every non-null wave is stationary.
pub fn coherence_check_strict(kind: SolverKind, u_l: &State, u_r: &State, p: &ValveParams) -> Result<bool> {
    let first = solve_coupled(kind, u_l, u_r, p)?;
    let (tau, sigma) = (first.trace_left(&p.law), first.trace_right(&p.law));
    let second = solve_coupled(kind, &tau, &sigma, p)?;
    let tol = 1e-9 * (1.0 + p.law.a());
    let stationary = |pat: &WavePattern| {
        pat.waves
            .iter()
            .filter(|w| !w.is_null())
            .all(|w| w.speed_lo.abs() <= tol && w.speed_hi.abs() <= tol)
    };
    Ok(states_close(&tau, &second.trace_left(&p.law))
        && states_close(&sigma, &second.trace_right(&p.law))
        && stationary(&second.left)
        && stationary(&second.right))
}

/// Whether each half solution is supersonic anywhere on its side.
#[derive(Clone, Copy, Debug)]
pub struct TraceAudit {
    pub left_side_supersonic: bool,
    pub ul_supersonic: bool,
    pub right_side_supersonic: bool,
    pub ur_supersonic: bool,
}

/// Samples both half solutions on a dense slope grid and reports where the
/// flow is supersonic. Each side is supersonic somewhere exactly when its
/// datum is, which pins the sonic information to the incoming states.
pub fn supersonic_trace_audit(kind: SolverKind, u_l: &State, u_r: &State, p: &ValveParams) -> Result<TraceAudit> {
    let sol = solve_coupled(kind, u_l, u_r, p)?;
    let law = &p.law;
    let a = law.a();
    let super_on = |pat: &WavePattern, lo: f64, hi: f64| {
        let n = 257;
        (0..=n).any(|k| {
            let xi = lo + (hi - lo) * k as f64 / n as f64;
            pat.sample(xi, law).v().abs() > a * (1.0 + 1e-9)
        })
    };
    // The spans reach past every wave, so the data themselves get sampled.
    let span = sol.left.max_abs_speed().max(sol.right.max_abs_speed()) + 2.0 * a;
    Ok(TraceAudit {
        left_side_supersonic: super_on(&sol.left, -span, 0.0),
        ul_supersonic: u_l.is_supersonic(law),
        right_side_supersonic: super_on(&sol.right, 0.0, span),
        ur_supersonic: u_r.is_supersonic(law),
    })
}
