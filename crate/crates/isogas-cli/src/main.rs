//! Command line front end: exact solvers, random choice runs, and the flow
//! maximization experiments, all writing CSV into an output directory.
//!
//! Exit codes: 0 on success, 2 for usage or configuration problems, 3 when
//! the requested computation is mathematically inadmissible or fails to
//! converge.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use isogas::experiments::{
    average_flow, run_chattering, run_convergence, run_riemann_max, run_three_state_max,
    threshold_grid, ChatteringSpec, ConvergenceSpec, RiemannMaxSpec, ThreeStateSpec,
};
use isogas::points::ring_q;
use isogas::rcm::{run, FlowPolicy, GridSpec, PiecewiseConstant, RunConfig};
use isogas::report::{
    describe_wave, write_convergence, write_events, write_flow, write_profile, write_snapshots,
    write_summary, write_sweep,
};
use isogas::valve::{classify_region, q_cap, solve_coupled};
use isogas::wavefront::{build_exact, ScenarioData};
use isogas::{GasLaw, SolverKind, State, ValveParams};

#[derive(Parser)]
#[command(name = "isogas")]
#[command(about = "Isothermal gas flow through a one-way valve: exact solvers and simulations")]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one valve-coupled Riemann problem and write its profile
    Riemann(RiemannArgs),
    /// Random choice simulation driven by a config file
    Run(ConfigArgs),
    /// Grid refinement study against the exact coupled solution
    Convergence(ConfigArgs),
    /// Compare the naive and coherent valve decisions on one datum
    Chattering(ConfigArgs),
    /// Sweep the valve threshold and measure the averaged flow
    Maximize(MaximizeArgs),
    /// Exact wavefront construction for a shock approaching the valve
    Wavefront(ConfigArgs),
}

#[derive(Args)]
struct RiemannArgs {
    /// Left state as RHO,Q
    #[arg(long, value_parser = parse_state_arg)]
    ul: State,
    /// Right state as RHO,Q
    #[arg(long, value_parser = parse_state_arg)]
    ur: State,
    /// Sound speed
    #[arg(long)]
    a: f64,
    /// Valve threshold q*
    #[arg(long)]
    qstar: f64,
    /// Valve model: lax (no valve), v (naive), h (coherent)
    #[arg(long, default_value = "h")]
    solver: String,
    /// Evaluation time for the profile
    #[arg(long, default_value_t = 0.2)]
    t: f64,
    /// Number of profile sample points
    #[arg(long, default_value_t = 400)]
    xi_grid: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat key = value file, `#` starts a comment
    #[arg(long)]
    config: PathBuf,
    /// Override a config entry, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MaximizeArgs {
    /// Which datum family to sweep: riemann or three-state
    #[arg(long)]
    family: String,
    #[command(flatten)]
    config: ConfigArgs,
}

fn parse_state_arg(s: &str) -> std::result::Result<State, String> {
    let (rho, q) = s
        .split_once(',')
        .ok_or_else(|| format!("expected RHO,Q, got `{s}`"))?;
    let rho: f64 = rho.trim().parse().map_err(|e| format!("bad density: {e}"))?;
    let q: f64 = q.trim().parse().map_err(|e| format!("bad momentum: {e}"))?;
    if !(rho > 0.0) {
        return Err(format!("density must be positive, got {rho}"));
    }
    Ok(State::new(rho, q))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let numeric = err.chain().any(|c| {
                matches!(
                    c.downcast_ref::<isogas::Error>(),
                    Some(e) if !matches!(e, isogas::Error::Io(_) | isogas::Error::Csv(_))
                )
            });
            ExitCode::from(if numeric { 3 } else { 2 })
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Riemann(args) => cmd_riemann(args),
        Command::Run(args) => cmd_run(args),
        Command::Convergence(args) => cmd_convergence(args),
        Command::Chattering(args) => cmd_chattering(args),
        Command::Maximize(args) => cmd_maximize(args),
        Command::Wavefront(args) => cmd_wavefront(args),
    }
}

/// Flat key = value configuration with `--set` overrides applied on top.
struct Config {
    map: BTreeMap<String, String>,
}

impl Config {
    fn load(path: &Path, sets: &[String]) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                anyhow!("{}:{}: expected `key = value`", path.display(), lineno + 1)
            })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        for s in sets {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got `{s}`"))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { map })
    }

    fn raw(&self, key: &str) -> Result<&str> {
        self.map
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| anyhow!("config key `{key}` is required"))
    }

    fn f64(&self, key: &str) -> Result<f64> {
        self.raw(key)?
            .parse()
            .with_context(|| format!("config key `{key}` must be a number"))
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.map.get(key) {
            Some(_) => self.f64(key),
            None => Ok(default),
        }
    }

    fn state(&self, key: &str) -> Result<State> {
        parse_state_arg(self.raw(key)?).map_err(|e| anyhow!("config key `{key}`: {e}"))
    }

    fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.raw(key)?
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .with_context(|| format!("config key `{key}` must list numbers"))
            })
            .collect()
    }

    fn states(&self, key: &str) -> Result<Vec<State>> {
        self.raw(key)?
            .split(';')
            .map(|s| parse_state_arg(s.trim()).map_err(|e| anyhow!("config key `{key}`: {e}")))
            .collect()
    }

    fn solver_or(&self, key: &str, default: SolverKind) -> Result<SolverKind> {
        match self.map.get(key) {
            None => Ok(default),
            Some(s) => parse_solver(s),
        }
    }

    fn policy_or(&self, key: &str, default: FlowPolicy) -> Result<FlowPolicy> {
        match self.map.get(key).map(String::as_str) {
            None => Ok(default),
            Some("per-step") => Ok(FlowPolicy::PerStep),
            Some("frozen") => Ok(FlowPolicy::Frozen),
            Some(other) => bail!("config key `{key}` must be per-step or frozen, got `{other}`"),
        }
    }
}

fn parse_solver(s: &str) -> Result<SolverKind> {
    match s {
        "lax" => Ok(SolverKind::Lax),
        "v" => Ok(SolverKind::Vee),
        "h" => Ok(SolverKind::Aitch),
        other => bail!("solver must be lax, v or h, got `{other}`"),
    }
}

fn out_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path)
        .with_context(|| format!("creating output directory {}", path.display()))
}

fn summary_row(experiment: &str, param: &str, value: impl ToString) -> (String, String, String) {
    (experiment.to_string(), param.to_string(), value.to_string())
}

fn cmd_riemann(args: RiemannArgs) -> Result<()> {
    if !(args.a > 0.0) || !(args.qstar >= 0.0) || !(args.t > 0.0) || args.xi_grid < 2 {
        bail!("need a > 0, qstar >= 0, t > 0 and at least two sample points");
    }
    out_dir(&args.out)?;
    let law = GasLaw::new(args.a);
    let params = ValveParams::new(law, args.qstar);
    let kind = parse_solver(&args.solver)?;
    let sol = solve_coupled(kind, &args.ul, &args.ur, &params)?;

    let waves = sol.display_waves(&law);
    let (mut s_lo, mut s_hi) = (-1.0_f64, 1.0_f64);
    for w in &waves {
        s_lo = s_lo.min(w.speed_lo);
        s_hi = s_hi.max(w.speed_hi);
    }
    let (x_lo, x_hi) = (args.t * s_lo - 0.5, args.t * s_hi + 0.5);
    let rows: Vec<(f64, State)> = (0..args.xi_grid)
        .map(|i| {
            let x = x_lo + (x_hi - x_lo) * i as f64 / (args.xi_grid - 1) as f64;
            (x, sol.eval(args.t, x, &law))
        })
        .collect();
    write_profile(args.out.join("profile.csv"), &rows)?;

    let mut rows = vec![
        summary_row("riemann", "solver", &args.solver),
        summary_row("riemann", "region", format!("{:?}", classify_region(&args.ul, &params))),
        summary_row("riemann", "flow", sol.q),
        summary_row("riemann", "trace_left", format!("{:?}", sol.trace_left(&law))),
        summary_row("riemann", "trace_right", format!("{:?}", sol.trace_right(&law))),
    ];
    for (i, w) in waves.iter().enumerate() {
        rows.push(summary_row("riemann", &format!("wave_{i}"), describe_wave(w)));
    }
    write_summary(args.out.join("summary.csv"), &rows)?;
    println!("interface flow {} with {} waves -> {}", sol.q, waves.len(), args.out.display());
    Ok(())
}

fn cmd_run(args: ConfigArgs) -> Result<()> {
    let cfg = Config::load(&args.config, &args.sets)?;
    out_dir(&args.out)?;
    let law = GasLaw::new(cfg.f64("a")?);
    let params = ValveParams::new(law, cfg.f64("q_star")?);
    let t_end = cfg.f64("t_end")?;
    if !(t_end > 0.0) {
        bail!("t_end must be positive");
    }
    let breaks = cfg.f64_list("breaks")?;
    let states = cfg.states("states")?;
    if states.len() != breaks.len() + 1 {
        bail!("`states` needs exactly one more entry than `breaks`");
    }
    let snapshot_times = match cfg.map.contains_key("snapshots") {
        true => cfg.f64_list("snapshots")?,
        false => Vec::new(),
    };
    let run_cfg = RunConfig {
        grid: GridSpec::new(cfg.f64("x_min")?, cfg.f64("x_max")?, cfg.f64("dx")?)?,
        params,
        kind: cfg.solver_or("solver", SolverKind::Aitch)?,
        policy: cfg.policy_or("policy", FlowPolicy::PerStep)?,
        cfl: cfg.f64_or("cfl", 0.45)?,
        t_end,
        snapshot_times,
    };
    let grid = run_cfg.grid.clone();
    let ic = PiecewiseConstant::new(breaks, states);
    let out = run(run_cfg, &ic)?;

    let rows: Vec<(f64, State)> =
        out.field.cells.iter().enumerate().map(|(j, u)| (grid.center(j), *u)).collect();
    write_profile(args.out.join("profile.csv"), &rows)?;
    write_flow(args.out.join("flow.csv"), &out.flow)?;
    if !out.snapshots.is_empty() {
        write_snapshots(args.out.join("snapshots.csv"), &grid, &out.snapshots)?;
    }
    let mean_q = average_flow(&out.flow, t_end)?;
    write_summary(
        args.out.join("summary.csv"),
        &[
            summary_row("run", "steps", out.field.step_index),
            summary_row("run", "t_final", out.field.t),
            summary_row("run", "mean_flow", mean_q),
        ],
    )?;
    println!(
        "{} steps to t = {}, mean interface flow {} -> {}",
        out.field.step_index,
        out.field.t,
        mean_q,
        args.out.display()
    );
    Ok(())
}

fn cmd_convergence(args: ConfigArgs) -> Result<()> {
    let cfg = Config::load(&args.config, &args.sets)?;
    out_dir(&args.out)?;
    let law = GasLaw::new(cfg.f64("a")?);
    let params = ValveParams::new(law, cfg.f64("q_star")?);
    let mut spec = ConvergenceSpec::new(cfg.state("ul")?, cfg.state("ur")?, params);
    spec.kind = cfg.solver_or("solver", spec.kind)?;
    spec.t_end = cfg.f64_or("t_end", spec.t_end)?;
    spec.cfl = cfg.f64_or("cfl", spec.cfl)?;
    if cfg.map.contains_key("dxs") {
        spec.dxs = cfg.f64_list("dxs")?;
    }
    spec.domain = (
        cfg.f64_or("x_min", spec.domain.0)?,
        cfg.f64_or("x_max", spec.domain.1)?,
    );
    let result = run_convergence(&spec)?;
    write_convergence(args.out.join("convergence.csv"), &result)?;
    write_summary(
        args.out.join("summary.csv"),
        &[summary_row("convergence", "slope", result.slope)],
    )?;
    println!("L1 convergence slope {} -> {}", result.slope, args.out.display());
    Ok(())
}

fn cmd_chattering(args: ConfigArgs) -> Result<()> {
    let cfg = Config::load(&args.config, &args.sets)?;
    out_dir(&args.out)?;
    let law = GasLaw::new(cfg.f64("a")?);
    let params = ValveParams::new(law, cfg.f64("q_star")?);
    let mut spec = ChatteringSpec::new(cfg.state("ul")?, cfg.state("ur")?, params);
    spec.t_end = cfg.f64_or("t_end", spec.t_end)?;
    spec.dx = cfg.f64_or("dx", spec.dx)?;
    spec.cfl = cfg.f64_or("cfl", spec.cfl)?;
    spec.domain = (
        cfg.f64_or("x_min", spec.domain.0)?,
        cfg.f64_or("x_max", spec.domain.1)?,
    );
    let result = run_chattering(&spec)?;
    write_flow(args.out.join("naive_per_step_flow.csv"), &result.per_step.flow)?;
    write_flow(args.out.join("naive_frozen_flow.csv"), &result.frozen.flow)?;
    write_flow(args.out.join("coherent_flow.csv"), &result.coherent.flow)?;
    write_summary(
        args.out.join("summary.csv"),
        &[
            summary_row("chattering", "alternation_fraction", result.alternation_fraction),
            summary_row("chattering", "l1_gap", result.l1_gap),
        ],
    )?;
    println!(
        "alternation fraction {}, profile gap {} -> {}",
        result.alternation_fraction,
        result.l1_gap,
        args.out.display()
    );
    Ok(())
}

fn cmd_maximize(args: MaximizeArgs) -> Result<()> {
    let cfg = Config::load(&args.config.config, &args.config.sets)?;
    out_dir(&args.config.out)?;
    let law = GasLaw::new(cfg.f64("a")?);
    let sweep = match args.family.as_str() {
        "riemann" => {
            let mut spec = RiemannMaxSpec::new(cfg.state("ul")?, cfg.state("ur")?, law);
            if cfg.map.contains_key("thresholds") {
                spec.thresholds = cfg.f64_list("thresholds")?;
            } else if cfg.map.contains_key("step") {
                let u_l = spec.u_l;
                let scale = q_cap(&u_l, &law).max(ring_q(&u_l, &law));
                spec.thresholds = threshold_grid(scale, cfg.f64("step")?);
            }
            spec.t_avg = cfg.f64_or("t_avg", spec.t_avg)?;
            spec.dx = cfg.f64_or("dx", spec.dx)?;
            spec.cfl = cfg.f64_or("cfl", spec.cfl)?;
            spec.domain =
                (cfg.f64_or("x_min", spec.domain.0)?, cfg.f64_or("x_max", spec.domain.1)?);
            run_riemann_max(&spec)?
        }
        "three-state" => {
            let mut spec =
                ThreeStateSpec::new(cfg.state("ui")?, cfg.state("ur")?, law, cfg.f64("x_jump")?);
            if cfg.map.contains_key("thresholds") {
                spec.thresholds = cfg.f64_list("thresholds")?;
            }
            if cfg.map.contains_key("t_avgs") {
                spec.t_avgs = cfg.f64_list("t_avgs")?;
            }
            spec.dx = cfg.f64_or("dx", spec.dx)?;
            spec.cfl = cfg.f64_or("cfl", spec.cfl)?;
            spec.domain =
                (cfg.f64_or("x_min", spec.domain.0)?, cfg.f64_or("x_max", spec.domain.1)?);
            spec.horizon = cfg.f64_or("horizon", spec.horizon)?;
            run_three_state_max(&spec)?
        }
        other => bail!("--family must be riemann or three-state, got `{other}`"),
    };
    write_sweep(args.config.out.join("sweep.csv"), &sweep)?;

    let mut rows = Vec::new();
    let t_avgs: Vec<f64> = {
        let mut ts: Vec<f64> = sweep.points.iter().map(|p| p.t_avg).collect();
        ts.dedup();
        ts
    };
    for t in t_avgs {
        if let Some(best) = sweep.best(t) {
            rows.push(summary_row("maximize", &format!("best_q_star_t{t}"), best.q_star));
            rows.push(summary_row("maximize", &format!("best_flow_t{t}"), best.measured));
        }
        let jumps = sweep.jump_locations(t);
        rows.push(summary_row(
            "maximize",
            &format!("jumps_t{t}"),
            jumps.iter().map(|j| format!("{j}")).collect::<Vec<_>>().join(";"),
        ));
    }
    write_summary(args.config.out.join("summary.csv"), &rows)?;
    println!(
        "{} sweep points -> {}",
        sweep.points.len(),
        args.config.out.display()
    );
    Ok(())
}

fn cmd_wavefront(args: ConfigArgs) -> Result<()> {
    let cfg = Config::load(&args.config, &args.sets)?;
    out_dir(&args.out)?;
    let law = GasLaw::new(cfg.f64("a")?);
    let params = ValveParams::new(law, cfg.f64("q_star")?);
    let scenario =
        ScenarioData::from_upstream(cfg.state("ui")?, cfg.state("ur")?, params, cfg.f64("x_jump")?)?;
    let sol = build_exact(&scenario)?;

    write_events(args.out.join("events.csv"), &sol.events)?;
    let history: String = std::iter::once("t,q".to_string())
        .chain(sol.flow_history.iter().map(|(t, q)| format!("{t},{q}")))
        .collect::<Vec<_>>()
        .join("\n");
    fs::write(args.out.join("flow_history.csv"), history + "\n")?;

    let default_t = if sol.t_stop.is_finite() { 0.9 * sol.t_stop } else { 1.0 };
    let t = cfg.f64_or("t", default_t)?;
    let x_lo = cfg.f64_or("x_min", scenario.x_jump - 1.0)?;
    let x_hi = cfg.f64_or("x_max", -2.0 * scenario.x_jump)?;
    let n = cfg.f64_or("points", 600.0)? as usize;
    if n < 2 || !(x_hi > x_lo) {
        bail!("need at least two profile points and x_max > x_min");
    }
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let x = x_lo + (x_hi - x_lo) * i as f64 / (n - 1) as f64;
        rows.push((x, sol.eval(t, x)?));
    }
    write_profile(args.out.join("profile.csv"), &rows)?;

    let mut summary = vec![
        summary_row("wavefront", "case", format!("{:?}", sol.case)),
        summary_row("wavefront", "stop", format!("{:?}", sol.stop)),
        summary_row("wavefront", "t_stop", sol.t_stop),
        summary_row("wavefront", "events", sol.events.len()),
        summary_row("wavefront", "buffer_momentum", scenario.u_l.q),
        summary_row("wavefront", "collision_flow", scenario.q_tilde),
        summary_row("wavefront", "ceiling_flow", scenario.q_bar_t),
        summary_row("wavefront", "incoming_speed", scenario.s_in),
        summary_row("wavefront", "profile_time", t),
    ];
    if let Some(t_open) = sol.t_open() {
        summary.push(summary_row("wavefront", "t_open", t_open));
    }
    write_summary(args.out.join("summary.csv"), &summary)?;
    println!(
        "case {:?}, stop {:?} at t = {}, {} events -> {}",
        sol.case,
        sol.stop,
        sol.t_stop,
        sol.events.len(),
        args.out.display()
    );
    Ok(())
}
