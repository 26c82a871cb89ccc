//! Acceptance gate: one test per release criterion, each printing a single
//! pass/fail line (visible under `--nocapture`). Tolerances are pinned here
//! on purpose; loosening them is a release decision, not a test fix.

use std::f64::consts::E;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use isogas::curves::{forward_lax, two_sided_shock_speed, Family};
use isogas::experiments::{
    run_convergence, run_riemann_max, run_three_state_max, ConvergenceSpec, RiemannMaxSpec,
    ThreeStateSpec,
};
use isogas::points::ring_q;
use isogas::rcm::{l1_rel_error, run, FlowPolicy, GridSpec, PiecewiseConstant, RunConfig};
use isogas::riemann::solve_rp;
use isogas::valve::{
    classify_region, coherence_check, interface_patterns, q_aitch, q_cap, solve_coupled,
    special_states,
};
use isogas::wavefront::{build_exact, ScenarioData};
use isogas::{GasLaw, RegionTag, SolverKind, State, ValveParams};

fn report(idx: u32, ok: bool, detail: &str) {
    println!("criterion {:02} {}: {}", idx, if ok { "PASS" } else { "FAIL" }, detail);
    assert!(ok, "criterion {idx:02} failed: {detail}");
}

fn in_band(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

#[test]
fn criterion_01_special_flow_levels_and_critical_ratios() {
    let law = GasLaw::new(2.0);
    let cap = q_cap(&State::new(2.0, 2.0), &law);
    let cap_exact = 4.0 / E.sqrt();
    let ring = ring_q(&State::new(0.25, 2.5), &law);
    let ring_exact = (10.0 + 2.0 * 29.0_f64.sqrt()).powi(2) / (32.0 * E);
    let ss = special_states(&ValveParams::new(law, 1.0));
    let ok = (cap - cap_exact).abs() < 1e-9
        && (ring - ring_exact).abs() < 1e-9
        && in_band(ss.v_sup_ratio, 1.62, 1.64)
        && in_band(ss.v_sub_ratio, 0.80, 0.82);
    report(
        1,
        ok,
        &format!(
            "cap {cap:.12} vs {cap_exact:.12}, ring {ring:.12} vs {ring_exact:.12}, \
             ratios {:.6}/{:.6}",
            ss.v_sup_ratio, ss.v_sub_ratio
        ),
    );
}

#[test]
fn criterion_02_three_state_constants_and_stop_times() {
    let law = GasLaw::new(1.0);
    let (u_i, u_r) = (State::new(3.0, 4.0), State::new(8.0, 0.0));
    let scenario = |q_star: f64| {
        ScenarioData::from_upstream(u_i, u_r, ValveParams::new(law, q_star), -1.0).unwrap()
    };
    let s = scenario(2.2);
    let mut ok = in_band(s.u_l.rho, 2.14, 2.16)
        && in_band(s.hat0.rho, 5.63, 5.65)
        && in_band(s.q_tilde, 2.61, 2.63)
        && in_band(s.tilde1.rho, 7.84, 7.86)
        && in_band(s.q_bar_t, 4.02, 4.04);

    let stop = |q_star: f64| build_exact(&scenario(q_star)).unwrap().t_stop;
    let (t_a, t_b, t_c, t_d) = (stop(0.2), stop(2.2), stop(3.5), stop(4.5));
    ok = ok
        && in_band(t_a, 1.35, 1.39)
        && in_band(t_b, 1.54, 1.58)
        && in_band(t_c, 1.24, 1.28)
        && in_band(t_d, 1.42, 1.46);

    // Collapse limit: thresholds just under the buffer momentum push every
    // interaction into the arrival point of the incoming shock.
    let t_min = stop(s.u_l.q * (1.0 - 1e-6));
    let t2 = build_exact(&scenario(2.2)).unwrap().t_open().unwrap();
    ok = ok && in_band(t_min, 0.45, 0.47) && in_band(t2, 0.52, 0.56);
    report(
        2,
        ok,
        &format!(
            "rho_l {:.4} hat {:.4} q~ {:.4} rho~ {:.4} qbar {:.4}; stops \
             {t_a:.4}/{t_b:.4}/{t_c:.4}/{t_d:.4}, collapse {t_min:.4}, opening {t2:.4}",
            s.u_l.rho, s.hat0.rho, s.q_tilde, s.tilde1.rho, s.q_bar_t
        ),
    );
}

fn convergence_slope(u_l: State, u_r: State) -> f64 {
    let law = GasLaw::new(2.0);
    let spec = ConvergenceSpec::new(u_l, u_r, ValveParams::new(law, 3.0));
    run_convergence(&spec).unwrap().slope
}

#[test]
fn criterion_03_first_order_convergence() {
    let s1 = convergence_slope(State::new(6.0, 1.0), State::new(1.0, -1.0));
    let s2 = convergence_slope(State::new(2.0, 2.0), State::new(3.0, 4.0));
    let ok = in_band(s1, 0.7, 1.3) && in_band(s2, 0.7, 1.3);
    report(3, ok, &format!("L1 convergence slopes {s1:.3} and {s2:.3}"));
}

fn fine_profile_error(u_l: State, u_r: State) -> f64 {
    let law = GasLaw::new(2.0);
    let params = ValveParams::new(law, 3.0);
    let exact = solve_coupled(SolverKind::Aitch, &u_l, &u_r, &params).unwrap();
    let cfg = RunConfig {
        grid: GridSpec::new(-1.0, 1.0, 5e-4).unwrap(),
        params,
        kind: SolverKind::Aitch,
        policy: FlowPolicy::PerStep,
        cfl: 0.45,
        t_end: 0.2,
        snapshot_times: Vec::new(),
    };
    let grid = cfg.grid.clone();
    let ic = PiecewiseConstant::new(vec![0.0], vec![u_l, u_r]);
    let out = run(cfg, &ic).unwrap();
    l1_rel_error(&out.field, &grid, |x| exact.eval(0.2, x, &law))
}

#[test]
fn criterion_04_fine_grid_profiles_match_the_exact_solution() {
    let e1 = fine_profile_error(State::new(6.0, 1.0), State::new(1.0, -1.0));
    let e2 = fine_profile_error(State::new(2.0, 2.0), State::new(3.0, 4.0));
    let ok = e1 <= 0.05 && e2 <= 0.05;
    report(4, ok, &format!("relative L1 errors {e1:.4} and {e2:.4} at dx = 5e-4"));
}

const A: f64 = 2.0;

fn law2() -> GasLaw {
    GasLaw::new(A)
}

fn ring_factor(v: f64) -> f64 {
    let w = (v * v + 4.0 * A * A).sqrt() + v;
    w * w / (4.0 * A * E)
}

/// Draws a left state with the requested region tag.
fn draw_tagged(rng: &mut ChaCha8Rng, tag: RegionTag, p: &ValveParams) -> State {
    let q_star = p.q_star;
    let ss = special_states(p);
    let v_sup = ss.v_sup_ratio * A;
    loop {
        let u = match tag {
            RegionTag::CoherentModerate => {
                let v = rng.gen_range(-3.0..v_sup * 0.995);
                State::new(rng.gen_range(0.05..8.0), 0.0).with_v(v)
            }
            RegionTag::CoherentAbove => {
                let v = rng.gen_range(v_sup * 1.005..v_sup * 4.0);
                let rho = rng.gen_range(1.001..6.0) * q_star / v;
                State::new(rho, rho * v)
            }
            RegionTag::ChatterProne => {
                let v = rng.gen_range(v_sup * 1.005..v_sup * 4.0);
                let (lo, hi) = (q_star / ring_factor(v), q_star / v);
                let rho = lo + rng.gen_range(0.02..0.98) * (hi - lo);
                State::new(rho, rho * v)
            }
            RegionTag::CoherentChoked => {
                let v = rng.gen_range(v_sup * 1.005..v_sup * 4.0);
                let rho = rng.gen_range(0.05..0.95) * q_star / ring_factor(v);
                State::new(rho, rho * v)
            }
        };
        if classify_region(&u, p) == tag {
            return u;
        }
    }
}

trait WithV {
    fn with_v(self, v: f64) -> State;
}

impl WithV for State {
    fn with_v(self, v: f64) -> State {
        State::new(self.rho, self.rho * v)
    }
}

#[test]
fn criterion_05_coherence_classification_over_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = ValveParams::new(law2(), 3.0);
    let tags = [
        RegionTag::CoherentModerate,
        RegionTag::CoherentAbove,
        RegionTag::ChatterProne,
        RegionTag::CoherentChoked,
    ];
    let mut counts = [0usize; 4];
    let mut checked = 0usize;
    let mut ok = true;
    for trial in 0..10_000 {
        let tag = tags[trial % 4];
        let u_l = draw_tagged(&mut rng, tag, &p);
        let u_r = State::new(rng.gen_range(0.05..10.0), 0.0)
            .with_v(rng.gen_range(-4.0..4.0));
        counts[trial % 4] += 1;
        checked += 1;
        let coherent_h = coherence_check(SolverKind::Aitch, &u_l, &u_r, &p).unwrap();
        let coherent_v = coherence_check(SolverKind::Vee, &u_l, &u_r, &p).unwrap();
        if !coherent_h || coherent_v != (tag != RegionTag::ChatterProne) {
            ok = false;
            break;
        }
    }
    report(
        5,
        ok,
        &format!(
            "{checked} pairs, tags {counts:?}: coherent solver always coherent, \
             naive solver incoherent exactly on the chatter wedge"
        ),
    );
}

#[test]
fn criterion_06_no_admissible_flow_beats_the_coherent_decision() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let p = ValveParams::new(law2(), 3.0);
    let law = p.law;
    let mut ok = true;
    for _ in 0..1_000 {
        let u_l = draw_tagged(&mut rng, RegionTag::ChatterProne, &p);
        let u_r = State::new(rng.gen_range(0.05..10.0), 0.0)
            .with_v(rng.gen_range(-4.0..4.0));
        let best = q_aitch(&u_l, &p);
        let q = rng.gen_range(0.0..q_cap(&u_l, &law));
        let (left, _right) = interface_patterns(q, &u_l, &u_r, &law).unwrap();
        let realized = left.trace_left(&law).q;
        if !(realized <= best + 1e-12 && best == u_l.q && best < p.q_star) {
            ok = false;
            break;
        }
    }
    report(6, ok, "1000 wedge draws: custom flows never beat q_l, and q_l < q*");
}

#[test]
fn criterion_07_riemann_sweeps_match_the_analytic_flow_curves() {
    let law = law2();
    let u_r = State::new(1.0, -1.0);
    let mut worst = 0.0_f64;
    let mut ok = true;
    for u_l in [State::new(2.0, 2.0), State::new(0.25, 2.5)] {
        let spec = RiemannMaxSpec::new(u_l, u_r, law);
        let sweep = run_riemann_max(&spec).unwrap();
        // Analytic discontinuities of the optimal-flow curve.
        let jumps = [q_cap(&u_l, &law), ring_q(&u_l, &law)];
        let step = 0.05;
        for pt in &sweep.points {
            if jumps.iter().any(|j| (pt.q_star - j).abs() <= step * 1.0001) {
                continue;
            }
            let gap = (pt.measured - pt.analytic.unwrap()).abs();
            worst = worst.max(gap);
            if gap > 0.05 {
                ok = false;
            }
        }
    }
    report(7, ok, &format!("worst off-jump gap to the decision curve {worst:.4}"));
}

#[test]
fn criterion_08_shock_sweep_matches_the_averaged_flow_formula() {
    let law = GasLaw::new(1.0);
    let spec = ThreeStateSpec::new(State::new(3.0, 4.0), State::new(8.0, 0.0), law, -1.0);
    let probe =
        ScenarioData::from_upstream(State::new(3.0, 4.0), State::new(8.0, 0.0),
            ValveParams::new(law, 2.2), -1.0)
        .unwrap();
    let t2 = build_exact(&probe).unwrap().t_open().unwrap();
    let (q_l, q_bar_t) = (probe.u_l.q, probe.q_bar_t);

    let sweep = run_three_state_max(&spec).unwrap();
    let t_avg = 2.0;
    let formula = |q_star: f64| {
        if q_star <= q_l {
            q_star
        } else if q_star <= q_bar_t {
            (t_avg - t2) / t_avg * q_star
        } else {
            0.0
        }
    };
    let step = 0.05;
    let mut worst = 0.0_f64;
    let mut ok = true;
    for pt in sweep.points.iter().filter(|p| p.t_avg == t_avg) {
        if (pt.q_star - q_l).abs() <= step * 1.0001
            || (pt.q_star - q_bar_t).abs() <= step * 1.0001
        {
            continue;
        }
        let gap = (pt.measured - formula(pt.q_star)).abs();
        worst = worst.max(gap);
        if gap > 0.05 {
            ok = false;
        }
    }
    let jumps = sweep.jump_locations(t_avg);
    ok = ok
        && jumps.len() == 2
        && (jumps[0] - q_l).abs() <= step
        && (jumps[1] - q_bar_t).abs() <= step;
    report(
        8,
        ok,
        &format!(
            "worst off-jump gap {worst:.4}; detected jumps {jumps:?} vs \
             ({q_l:.4}, {q_bar_t:.4})"
        ),
    );
}

#[test]
fn criterion_09_chattering_alternation_and_its_coherent_limit() {
    let law = law2();
    let params = ValveParams::new(law, 3.0);
    let (u_l, u_r) = (State::new(0.25, 2.5), State::new(6.0, 11.0));
    let mk = |kind: SolverKind| RunConfig {
        grid: GridSpec::new(-1.0, 1.0, 2e-3).unwrap(),
        params,
        kind,
        policy: FlowPolicy::PerStep,
        cfl: 0.45,
        t_end: 0.2,
        snapshot_times: Vec::new(),
    };
    let ic = PiecewiseConstant::new(vec![0.0], vec![u_l, u_r]);
    let naive = run(mk(SolverKind::Vee), &ic).unwrap();
    let coherent = run(mk(SolverKind::Aitch), &ic).unwrap();

    let flows: Vec<f64> = naive.flow.samples.iter().skip(1).map(|s| s.q).collect();
    let alternating = flows
        .windows(2)
        .filter(|w| (w[0] == 0.0 && w[1] == 3.0) || (w[0] == 3.0 && w[1] == 0.0))
        .count();
    let fraction = alternating as f64 / (flows.len() - 1) as f64;
    let steady = coherent.flow.samples.iter().all(|s| s.q == 2.5);

    let num: f64 = naive
        .field
        .cells
        .iter()
        .zip(&coherent.field.cells)
        .map(|(x, y)| (x.rho - y.rho).abs() + (x.q - y.q).abs())
        .sum();
    let den: f64 = coherent.field.cells.iter().map(|u| u.rho.abs() + u.q.abs()).sum();
    let gap = num / den;

    let ok = fraction >= 0.9 && steady;
    report(
        9,
        ok,
        &format!(
            "alternation fraction {fraction:.3}, coherent flow steady at 2.5, \
             profile gap {gap:.4} (reported only)"
        ),
    );
}

#[test]
fn criterion_10_jump_conditions_invariants_and_classical_coherence() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut ok = true;
    let mut worst_rh = 0.0_f64;
    for _ in 0..100_000 {
        let law = GasLaw::new(rng.gen_range(0.5..3.0));
        let a = law.a();
        let rho = rng.gen_range(0.05..20.0);
        let u = State::new(rho, rho * rng.gen_range(-5.0..5.0));
        let fam = if rng.gen_bool(0.5) { Family::One } else { Family::Two };
        // Compressive side of the forward curve.
        let ratio = rng.gen_range(1.0001..25.0);
        let rho2 = match fam {
            Family::One => rho * ratio,
            Family::Two => rho / ratio,
        };
        let q2 = forward_lax(fam, &u, rho2, &law);
        let r = State::new(rho2, q2);
        let s = two_sided_shock_speed(&u, &r);
        let mass = (r.q - u.q) - s * (r.rho - u.rho);
        let flux = |w: &State| w.q * w.q / w.rho + a * a * w.rho;
        let mom = (flux(&r) - flux(&u)) - s * (r.q - u.q);
        let scale = 1.0 + u.q.abs() + r.q.abs() + flux(&u).abs() + flux(&r).abs();
        let rh = (mass.abs() + mom.abs()) / scale;
        worst_rh = worst_rh.max(rh);
        if rh > 1e-10 {
            ok = false;
        }

        // Rarefaction side keeps the Riemann invariant.
        let rho3 = match fam {
            Family::One => rho / ratio,
            Family::Two => rho * ratio,
        };
        let q3 = forward_lax(fam, &u, rho3, &law);
        let inv = |w: &State| match fam {
            Family::One => w.v() + a * (w.rho.ln()),
            Family::Two => w.v() - a * (w.rho.ln()),
        };
        let w3 = State::new(rho3, q3);
        if (inv(&u) - inv(&w3)).abs() > 1e-12 * (1.0 + inv(&u).abs()) {
            ok = false;
        }
    }

    // Classical solver coherence: re-solving from the interface traces
    // reproduces them.
    let p = ValveParams::new(GasLaw::new(2.0), 1.0);
    for _ in 0..10_000 {
        let rho_l = rng.gen_range(0.05..10.0);
        let rho_r = rng.gen_range(0.05..10.0);
        let u_l = State::new(rho_l, rho_l * rng.gen_range(-4.0..4.0));
        let u_r = State::new(rho_r, rho_r * rng.gen_range(-4.0..4.0));
        if solve_rp(&u_l, &u_r, &p.law).is_err()
            || !coherence_check(SolverKind::Lax, &u_l, &u_r, &p).unwrap()
        {
            ok = false;
            break;
        }
    }
    report(
        10,
        ok,
        &format!("worst scaled jump residual {worst_rh:.2e}; classical re-solve coherent"),
    );
}
