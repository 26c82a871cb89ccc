//! Experiment drivers: the time-averaged flow objective, threshold sweeps
//! for flow maximization, grid convergence against exact coupled solutions,
//! and the chattering comparison between the naive and the coherent valve.

use serde::Serialize;

use crate::points::ring_q;
use crate::rcm::{
    l1_rel_error, run, Field, FlowPolicy, FlowRecord, GridSpec, PiecewiseConstant, RunConfig,
    RunOutput,
};
use crate::state::{GasLaw, State};
use crate::valve::{q_aitch, q_cap, SolverKind, ValveParams};
use crate::wavefront::{build_exact, exact_trace_flow, ScenarioData};
use crate::{Error, Result};

/// Time-averaged interface flow `(1/T) \int_0^T q(t, 0) dt` from a recorded
/// run. The record is piecewise constant per step; a step straddling `T` is
/// clipped.
pub fn average_flow(record: &FlowRecord, t_avg: f64) -> Result<f64> {
    if !(t_avg > 0.0 && t_avg.is_finite()) {
        return Err(Error::OutOfRange { what: "averaging window", value: t_avg, lo: 0.0, hi: f64::INFINITY });
    }
    let span = record.span();
    if span < t_avg * (1.0 - 1e-9) {
        return Err(Error::SpanMismatch { recorded: span, requested: t_avg });
    }
    let mut total = 0.0;
    for s in &record.samples {
        if s.t >= t_avg {
            break;
        }
        total += s.q * ((s.t + s.dt).min(t_avg) - s.t);
    }
    Ok(total / t_avg)
}

/// Uniform threshold grid from 0.01 in the given step up to `1.5 * scale`.
/// The offset start keeps grid points off the exact region boundaries.
pub fn threshold_grid(scale: f64, step: f64) -> Vec<f64> {
    assert!(scale > 0.0 && step > 0.0, "grid scale and step must be positive");
    let hi = 1.5 * scale;
    let mut grid = Vec::new();
    let mut q = 0.01;
    while q <= hi {
        grid.push(q);
        q += step;
    }
    grid
}

/// One sweep sample: measured average flow at `(q_star, t_avg)`, with the
/// analytic value when an exact construction covers the datum.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepPoint {
    pub q_star: f64,
    pub t_avg: f64,
    pub measured: f64,
    pub analytic: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub dx: f64,
    pub cfl: f64,
    pub points: Vec<SweepPoint>,
}

/// Measured jump larger than this flags a discontinuity of the sweep curve.
pub const JUMP_THRESHOLD: f64 = 0.3;

impl SweepResult {
    fn at(&self, t_avg: f64) -> impl Iterator<Item = &SweepPoint> {
        self.points.iter().filter(move |p| p.t_avg == t_avg)
    }

    /// Midpoints of grid intervals where the measured curve jumps.
    pub fn jump_locations(&self, t_avg: f64) -> Vec<f64> {
        let pts: Vec<&SweepPoint> = self.at(t_avg).collect();
        pts.windows(2)
            .filter(|w| (w[1].measured - w[0].measured).abs() > JUMP_THRESHOLD)
            .map(|w| (w[0].q_star + w[1].q_star) / 2.0)
            .collect()
    }

    /// The grid point with the largest measured average flow.
    pub fn best(&self, t_avg: f64) -> Option<SweepPoint> {
        self.at(t_avg).copied().max_by(|p, q| p.measured.total_cmp(&q.measured))
    }
}

/// Threshold sweep for a two-state datum: the average flow is independent of
/// the averaging time, so the analytic curve is the coherent flow law of the
/// left state.
#[derive(Clone, Debug)]
pub struct RiemannMaxSpec {
    pub u_l: State,
    pub u_r: State,
    pub law: GasLaw,
    pub thresholds: Vec<f64>,
    pub t_avg: f64,
    pub dx: f64,
    pub cfl: f64,
    pub domain: (f64, f64),
}

impl RiemannMaxSpec {
    pub fn new(u_l: State, u_r: State, law: GasLaw) -> Self {
        let scale = q_cap(&u_l, &law).max(ring_q(&u_l, &law));
        RiemannMaxSpec {
            u_l,
            u_r,
            law,
            thresholds: threshold_grid(scale, 0.05),
            t_avg: 0.2,
            dx: 2e-3,
            cfl: 0.45,
            domain: (-1.0, 1.0),
        }
    }
}

pub fn run_riemann_max(spec: &RiemannMaxSpec) -> Result<SweepResult> {
    let ic = PiecewiseConstant::new(vec![0.0], vec![spec.u_l, spec.u_r]);
    let mut points = Vec::with_capacity(spec.thresholds.len());
    for &q_star in &spec.thresholds {
        let params = ValveParams::new(spec.law, q_star);
        let cfg = RunConfig {
            grid: GridSpec::new(spec.domain.0, spec.domain.1, spec.dx)?,
            params,
            kind: SolverKind::Aitch,
            policy: FlowPolicy::PerStep,
            cfl: spec.cfl,
            t_end: spec.t_avg,
            snapshot_times: Vec::new(),
        };
        let out = run(cfg, &ic)?;
        points.push(SweepPoint {
            q_star,
            t_avg: spec.t_avg,
            measured: average_flow(&out.flow, spec.t_avg)?,
            analytic: Some(q_aitch(&spec.u_l, &params)),
        });
    }
    Ok(SweepResult { dx: spec.dx, cfl: spec.cfl, points })
}

/// Threshold sweep for the three-state datum `u_i | u_l | u_r` with the jump
/// to `u_i` at `x_jump`. One run per threshold serves every averaging time.
#[derive(Clone, Debug)]
pub struct ThreeStateSpec {
    pub u_i: State,
    pub u_l: State,
    pub u_r: State,
    pub law: GasLaw,
    pub x_jump: f64,
    pub thresholds: Vec<f64>,
    pub t_avgs: Vec<f64>,
    pub dx: f64,
    pub cfl: f64,
    pub domain: (f64, f64),
    /// Validity horizon of the exact flow history for the analytic overlay.
    pub horizon: f64,
}

impl ThreeStateSpec {
    /// Datum with the sonic buffer state derived from `u_i`. The default
    /// threshold grid spans 1.5 times the largest analytically reachable
    /// flow (or the buffer cap when no exact construction applies).
    pub fn new(u_i: State, u_r: State, law: GasLaw, x_jump: f64) -> Self {
        let u_l = ScenarioData::sonic_buffer(&u_i, &law);
        let scale = ScenarioData::new(u_i, u_l, u_r, ValveParams::new(law, 1.0), x_jump)
            .map(|s| s.q_bar_t)
            .unwrap_or_else(|_| q_cap(&u_l, &law));
        ThreeStateSpec {
            u_i,
            u_l,
            u_r,
            law,
            x_jump,
            thresholds: threshold_grid(scale, 0.05),
            t_avgs: vec![0.5, 2.0],
            dx: 2e-3,
            cfl: 0.45,
            domain: (-2.0, 3.0),
            horizon: 2.0,
        }
    }
}

pub fn run_three_state_max(spec: &ThreeStateSpec) -> Result<SweepResult> {
    let t_max = spec.t_avgs.iter().copied().fold(0.0f64, f64::max);
    if !(t_max > 0.0) {
        return Err(Error::OutOfRange { what: "averaging times", value: t_max, lo: 0.0, hi: f64::INFINITY });
    }
    let ic = PiecewiseConstant::new(vec![spec.x_jump, 0.0], vec![spec.u_i, spec.u_l, spec.u_r]);
    let mut points = Vec::new();
    for &q_star in &spec.thresholds {
        let params = ValveParams::new(spec.law, q_star);
        let cfg = RunConfig {
            grid: GridSpec::new(spec.domain.0, spec.domain.1, spec.dx)?,
            params,
            kind: SolverKind::Aitch,
            policy: FlowPolicy::PerStep,
            cfl: spec.cfl,
            t_end: t_max,
            snapshot_times: Vec::new(),
        };
        let out = run(cfg, &ic)?;
        let exact = ScenarioData::new(spec.u_i, spec.u_l, spec.u_r, params, spec.x_jump)
            .and_then(|s| build_exact(&s))
            .ok();
        for &t_avg in &spec.t_avgs {
            points.push(SweepPoint {
                q_star,
                t_avg,
                measured: average_flow(&out.flow, t_avg)?,
                analytic: exact
                    .as_ref()
                    .and_then(|sol| exact_trace_flow(sol, t_avg, spec.horizon).ok()),
            });
        }
    }
    Ok(SweepResult { dx: spec.dx, cfl: spec.cfl, points })
}

/// Grid refinement study against the exact coupled Riemann solution.
#[derive(Clone, Debug)]
pub struct ConvergenceSpec {
    pub u_l: State,
    pub u_r: State,
    pub params: ValveParams,
    pub kind: SolverKind,
    pub t_end: f64,
    pub cfl: f64,
    pub dxs: Vec<f64>,
    pub domain: (f64, f64),
}

impl ConvergenceSpec {
    pub fn new(u_l: State, u_r: State, params: ValveParams) -> Self {
        ConvergenceSpec {
            u_l,
            u_r,
            params,
            kind: SolverKind::Aitch,
            t_end: 0.2,
            cfl: 0.45,
            dxs: vec![4e-3, 2e-3, 1e-3, 5e-4],
            domain: (-1.0, 1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConvergencePoint {
    pub dx: f64,
    pub error: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergenceResult {
    pub points: Vec<ConvergencePoint>,
    /// Least-squares slope of log(error) against log(dx).
    pub slope: f64,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

pub fn run_convergence(spec: &ConvergenceSpec) -> Result<ConvergenceResult> {
    let exact = crate::valve::solve_coupled(spec.kind, &spec.u_l, &spec.u_r, &spec.params)?;
    let ic = PiecewiseConstant::new(vec![0.0], vec![spec.u_l, spec.u_r]);
    let mut points = Vec::with_capacity(spec.dxs.len());
    for &dx in &spec.dxs {
        let grid = GridSpec::new(spec.domain.0, spec.domain.1, dx)?;
        let cfg = RunConfig {
            grid: grid.clone(),
            params: spec.params,
            kind: spec.kind,
            policy: FlowPolicy::PerStep,
            cfl: spec.cfl,
            t_end: spec.t_end,
            snapshot_times: Vec::new(),
        };
        let out = run(cfg, &ic)?;
        let t = out.field.t;
        let law = spec.params.law;
        points.push(ConvergencePoint {
            dx,
            error: l1_rel_error(&out.field, &grid, |x| exact.eval(t, x, &law)),
        });
    }
    let slope = fit_loglog_slope(&points.iter().map(|p| (p.dx, p.error)).collect::<Vec<_>>());
    Ok(ConvergenceResult { points, slope })
}

/// Chattering comparison on one datum: the naive valve with its opening
/// decision frozen at the initial data, the same valve re-deciding every
/// step, and the coherent valve.
#[derive(Clone, Debug)]
pub struct ChatteringSpec {
    pub u_l: State,
    pub u_r: State,
    pub params: ValveParams,
    pub t_end: f64,
    pub dx: f64,
    pub cfl: f64,
    pub domain: (f64, f64),
}

impl ChatteringSpec {
    pub fn new(u_l: State, u_r: State, params: ValveParams) -> Self {
        ChatteringSpec { u_l, u_r, params, t_end: 0.2, dx: 2e-3, cfl: 0.45, domain: (-1.0, 1.0) }
    }
}

#[derive(Debug)]
pub struct ChatteringResult {
    pub frozen: RunOutput,
    pub per_step: RunOutput,
    pub coherent: RunOutput,
    /// Fraction of consecutive per-step flow pairs (after the first step)
    /// that alternate between fully closed and the threshold.
    pub alternation_fraction: f64,
    /// Relative L1 distance between the per-step and coherent final fields.
    pub l1_gap: f64,
}

/// Fraction of consecutive sample pairs alternating between 0 and `q_star`.
pub fn alternation_fraction(record: &FlowRecord, q_star: f64) -> f64 {
    let flows: Vec<f64> = record.samples.iter().skip(1).map(|s| s.q).collect();
    if flows.len() < 2 {
        return 0.0;
    }
    let is = |q: f64, v: f64| (q - v).abs() <= 1e-9 * (1.0 + v.abs());
    let alternating = flows
        .windows(2)
        .filter(|w| (is(w[0], 0.0) && is(w[1], q_star)) || (is(w[0], q_star) && is(w[1], 0.0)))
        .count();
    alternating as f64 / flows.windows(2).count() as f64
}

/// Relative L1 distance between two fields on the same grid.
pub fn l1_field_gap(a: &Field, b: &Field) -> f64 {
    assert_eq!(a.cells.len(), b.cells.len(), "fields live on different grids");
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.cells.iter().zip(&b.cells) {
        num += (x.rho - y.rho).abs() + (x.q - y.q).abs();
        den += y.rho.abs() + y.q.abs();
    }
    num / den
}

pub fn run_chattering(spec: &ChatteringSpec) -> Result<ChatteringResult> {
    let ic = PiecewiseConstant::new(vec![0.0], vec![spec.u_l, spec.u_r]);
    let grid = GridSpec::new(spec.domain.0, spec.domain.1, spec.dx)?;
    let cfg = |kind, policy| RunConfig {
        grid: grid.clone(),
        params: spec.params,
        kind,
        policy,
        cfl: spec.cfl,
        t_end: spec.t_end,
        snapshot_times: Vec::new(),
    };
    let frozen = run(cfg(SolverKind::Vee, FlowPolicy::Frozen), &ic)?;
    let per_step = run(cfg(SolverKind::Vee, FlowPolicy::PerStep), &ic)?;
    let coherent = run(cfg(SolverKind::Aitch, FlowPolicy::PerStep), &ic)?;
    let alternation = alternation_fraction(&per_step.flow, spec.params.q_star);
    let l1_gap = l1_field_gap(&per_step.field, &coherent.field);
    Ok(ChatteringResult { frozen, per_step, coherent, alternation_fraction: alternation, l1_gap })
}
