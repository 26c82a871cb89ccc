//! CSV writers for run artifacts: profiles, snapshots, flow records,
//! interaction event logs, sweep curves, and experiment summaries.

use std::path::Path;

use crate::experiments::{ConvergenceResult, SweepResult};
use crate::rcm::{FlowRecord, GridSpec, Snapshot};
use crate::riemann::{Wave, WaveKind};
use crate::state::State;
use crate::wavefront::Event;
use crate::Result;

/// Compact single-token description of a wave for event logs.
pub fn describe_wave(w: &Wave) -> String {
    let fam = w.family.map_or("-".to_string(), |f| match f {
        crate::curves::Family::One => "1".to_string(),
        crate::curves::Family::Two => "2".to_string(),
    });
    match w.kind {
        WaveKind::Shock => format!("{fam}-shock s={:.6}", w.speed_lo),
        WaveKind::RarefactionFan => format!("{fam}-fan [{:.6},{:.6}]", w.speed_lo, w.speed_hi),
        WaveKind::StationaryNonclassical => "interface-jump".to_string(),
        WaveKind::Null => "null".to_string(),
    }
}

/// `x,rho,q` rows.
pub fn write_profile(path: impl AsRef<Path>, rows: &[(f64, State)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "rho", "q"])?;
    for (x, u) in rows {
        w.write_record([format!("{x}"), format!("{}", u.rho), format!("{}", u.q)])?;
    }
    w.flush()?;
    Ok(())
}

/// `t,x,rho,q` rows, one block per snapshot, cells at their centers.
pub fn write_snapshots(path: impl AsRef<Path>, grid: &GridSpec, snaps: &[Snapshot]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "x", "rho", "q"])?;
    for s in snaps {
        for (j, u) in s.cells.iter().enumerate() {
            w.write_record([
                format!("{}", s.t),
                format!("{}", grid.center(j)),
                format!("{}", u.rho),
                format!("{}", u.q),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `n,t,dt,Q` rows of the per-step interface flow.
pub fn write_flow(path: impl AsRef<Path>, record: &FlowRecord) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "t", "dt", "Q"])?;
    for s in &record.samples {
        w.write_record([
            format!("{}", s.step),
            format!("{}", s.t),
            format!("{}", s.dt),
            format!("{}", s.q),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `k,t,x,in_waves,out_waves` rows; wave lists joined with `;`.
pub fn write_events(path: impl AsRef<Path>, events: &[Event]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["k", "t", "x", "in_waves", "out_waves"])?;
    let join = |ws: &[Wave]| ws.iter().map(describe_wave).collect::<Vec<_>>().join(";");
    for (k, e) in events.iter().enumerate() {
        w.write_record([
            format!("{k}"),
            format!("{}", e.t),
            format!("{}", e.x),
            join(&e.incoming),
            join(&e.outgoing),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `q_star,t_avg,measured,analytic` rows; `analytic` empty when unavailable.
pub fn write_sweep(path: impl AsRef<Path>, sweep: &SweepResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["q_star", "t_avg", "measured", "analytic"])?;
    for p in &sweep.points {
        w.write_record([
            format!("{}", p.q_star),
            format!("{}", p.t_avg),
            format!("{}", p.measured),
            p.analytic.map_or(String::new(), |v| format!("{v}")),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `dx,error` rows.
pub fn write_convergence(path: impl AsRef<Path>, result: &ConvergenceResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["dx", "error"])?;
    for p in &result.points {
        w.write_record([format!("{}", p.dx), format!("{}", p.error)])?;
    }
    w.flush()?;
    Ok(())
}

/// `experiment,param,value` rows.
pub fn write_summary(path: impl AsRef<Path>, rows: &[(String, String, String)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["experiment", "param", "value"])?;
    for (experiment, param, value) in rows {
        w.write_record([experiment, param, value])?;
    }
    w.flush()?;
    Ok(())
}
