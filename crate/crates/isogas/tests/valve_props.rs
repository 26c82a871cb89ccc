//! Property tests for the valve region geometry, the coherence
//! characterization of the two solvers, and flow maximality on the
//! chatter-prone wedge.

use isogas::curves::{backward_lax, Family};
use isogas::points::ring_q;
use isogas::valve::{
    classify_region, coherence_check, coherence_check_strict, interface_patterns, q_aitch, q_cap,
    q_vee, solve_coupled, special_states, valve_opens,
};
use isogas::{GasLaw, RegionTag, SolverKind, State, ValveParams};
use proptest::prelude::*;

const A: f64 = 2.0;

fn params(q_star: f64) -> ValveParams {
    ValveParams::new(GasLaw::new(A), q_star)
}

/// Ring factor g(v) with ring_q(u) = rho * g(v).
fn ring_factor(v: f64) -> f64 {
    let s = (v * v + 4.0 * A * A).sqrt() + v;
    s * s / (4.0 * A * std::f64::consts::E)
}

fn right_state_strat() -> impl Strategy<Value = State> {
    (0.1f64..15.0, -5.0f64..5.0).prop_map(|(rho, v)| State::new(rho, rho * v))
}

/// States strictly inside the chatter-prone wedge of the given threshold:
/// supersonic beyond the critical speed, flow below the threshold, but close
/// enough to the valve curve that a closed valve would reopen.
fn chatter_prone_strat(q_star: f64) -> impl Strategy<Value = State> {
    let p = params(q_star);
    let v_sup = special_states(&p).v_sup_ratio * A;
    (0.01f64..2.5, 0.02f64..0.98).prop_map(move |(dv, t)| {
        let v = v_sup * (1.0 + dv);
        let rho_lo = q_star / ring_factor(v);
        let rho_hi = q_star / v;
        assert!(rho_lo < rho_hi, "wedge must be nonempty at v = {v}");
        let rho = rho_lo + t * (rho_hi - rho_lo);
        State::new(rho, rho * v)
    })
}

fn moderate_strat(q_star: f64) -> impl Strategy<Value = State> {
    let p = params(q_star);
    let v_sup = special_states(&p).v_sup_ratio * A;
    (0.05f64..10.0, -3.0f64..1.0, 0.02f64..0.98)
        .prop_map(move |(rho, lo, t)| State::new(rho, rho * (lo + t * (v_sup * 0.999 - lo))))
}

fn above_strat(q_star: f64) -> impl Strategy<Value = State> {
    let p = params(q_star);
    let v_sup = special_states(&p).v_sup_ratio * A;
    (0.001f64..2.5, 1.001f64..6.0).prop_map(move |(dv, f)| {
        let v = v_sup * (1.0 + dv);
        let rho = f * q_star / v;
        State::new(rho, rho * v)
    })
}

fn choked_strat(q_star: f64) -> impl Strategy<Value = State> {
    let p = params(q_star);
    let v_sup = special_states(&p).v_sup_ratio * A;
    (0.001f64..2.5, 0.05f64..0.95).prop_map(move |(dv, f)| {
        let v = v_sup * (1.0 + dv);
        let rho = f * q_star / ring_factor(v);
        State::new(rho, rho * v)
    })
}

proptest! {
    #[test]
    fn region_tags_satisfy_their_defining_inequalities(
        u in prop_oneof![
            chatter_prone_strat(3.0),
            moderate_strat(3.0),
            above_strat(3.0),
            choked_strat(3.0),
        ],
    ) {
        let p = params(3.0);
        let v_sup = special_states(&p).v_sup_ratio * A;
        match classify_region(&u, &p) {
            RegionTag::CoherentModerate => prop_assert!(u.v() <= v_sup * (1.0 + 1e-9)),
            RegionTag::CoherentAbove => prop_assert!(u.q >= p.q_star * (1.0 - 1e-9)),
            RegionTag::ChatterProne => {
                prop_assert!(u.v() > v_sup);
                prop_assert!(u.q < p.q_star);
                prop_assert!(ring_q(&u, &p.law) >= p.q_star * (1.0 - 1e-9));
            }
            RegionTag::CoherentChoked => {
                prop_assert!(u.v() > v_sup);
                prop_assert!(u.q < p.q_star);
                prop_assert!(ring_q(&u, &p.law) < p.q_star * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn wedge_boundary_agrees_with_the_backward_shock_curve(
        dv in 0.01f64..2.5,
        t in -0.5f64..1.5,
    ) {
        // Independent characterization: within the supersonic wedge below the
        // threshold, chatter-proneness is delimited by the backward 1-shock
        // curve through the resting closure state.
        let p = params(3.0);
        let ss = special_states(&p);
        let v = ss.v_sup_ratio * A * (1.0 + dv);
        let rho_lo = p.q_star / ring_factor(v);
        let rho_hi = p.q_star / v;
        let rho = rho_lo + t * (rho_hi - rho_lo);
        prop_assume!(rho > 1e-6);
        let u = State::new(rho, rho * v);
        prop_assume!(u.q < p.q_star * (1.0 - 1e-7));
        let on_curve = backward_lax(Family::One, &ss.rest_threshold, rho, &p.law);
        prop_assume!((u.q - on_curve).abs() > 1e-7 * (1.0 + u.q.abs()));
        let by_curve = u.q >= on_curve;
        let tagged = classify_region(&u, &p) == RegionTag::ChatterProne;
        prop_assert_eq!(by_curve, tagged, "v {} rho {} q {} curve {}", v, rho, u.q, on_curve);
    }

    #[test]
    fn coherent_solver_is_coherent_everywhere(
        u_l in prop_oneof![
            chatter_prone_strat(3.0),
            moderate_strat(3.0),
            above_strat(3.0),
            choked_strat(3.0),
        ],
        u_r in right_state_strat(),
    ) {
        let p = params(3.0);
        prop_assert!(coherence_check(SolverKind::Aitch, &u_l, &u_r, &p).unwrap());
        prop_assert!(coherence_check_strict(SolverKind::Aitch, &u_l, &u_r, &p).unwrap());
    }

    #[test]
    fn naive_solver_chatters_exactly_on_the_wedge(
        u_l in prop_oneof![
            chatter_prone_strat(3.0),
            moderate_strat(3.0),
            above_strat(3.0),
            choked_strat(3.0),
        ],
        u_r in right_state_strat(),
    ) {
        let p = params(3.0);
        let coherent = coherence_check(SolverKind::Vee, &u_l, &u_r, &p).unwrap();
        let prone = classify_region(&u_l, &p) == RegionTag::ChatterProne;
        prop_assert_eq!(coherent, !prone);
    }

    #[test]
    fn wedge_states_cap_at_their_own_flow_and_the_solver_attains_it(
        u_l in chatter_prone_strat(3.0),
        u_r in right_state_strat(),
        frac in 0.0f64..1.0,
    ) {
        let p = params(3.0);
        // The maximal admissible flow on the wedge is the state's own flow,
        // the naive valve shuts, and the coherent valve attains the cap.
        prop_assert_eq!(q_cap(&u_l, &p.law), u_l.q);
        prop_assert_eq!(q_aitch(&u_l, &p), u_l.q);
        prop_assert_eq!(q_vee(&u_l, &p), 0.0);
        let sol = solve_coupled(SolverKind::Aitch, &u_l, &u_r, &p).unwrap();
        prop_assert_eq!(sol.q, u_l.q);
        prop_assert!(sol.q < p.q_star);
        // Any admissible prescribed flow stays below it.
        let q = frac * q_cap(&u_l, &p.law);
        let (lp, _) = interface_patterns(q, &u_l, &u_r, &p.law).unwrap();
        prop_assert!(lp.trace_left(&p.law).q <= u_l.q + 1e-12);
    }

    #[test]
    fn opening_matches_the_cap_comparison(
        u in prop_oneof![
            chatter_prone_strat(1.0),
            moderate_strat(1.0),
            above_strat(1.0),
            choked_strat(1.0),
        ],
    ) {
        let p = params(1.0);
        // Off the exact boundary, the valve opens exactly when the cap
        // reaches the threshold.
        prop_assume!((q_cap(&u, &p.law) - p.q_star).abs() > 1e-9 * p.q_star);
        prop_assert_eq!(valve_opens(&u, &p), q_cap(&u, &p.law) >= p.q_star);
    }

    #[test]
    fn flow_cap_is_smooth_across_the_sonic_line(rho in 0.1f64..10.0) {
        let law = GasLaw::new(A);
        let h = 1e-5;
        let cap = |eps: f64| q_cap(&State::new(rho, rho * (A + eps)), &law);
        let left_slope = (cap(0.0) - cap(-h)) / h;
        let right_slope = (cap(h) - cap(0.0)) / h;
        prop_assert!(
            (left_slope - right_slope).abs() <= 1e-3 * (1.0 + left_slope.abs()),
            "slopes {left_slope} vs {right_slope}"
        );
    }
}

#[test]
fn critical_velocity_ratios_bracket_the_documented_values() {
    let p = params(3.0);
    let ss = special_states(&p);
    assert!((ss.v_sup_ratio - 1.62940009972492).abs() < 1e-10);
    assert!((ss.v_sub_ratio - 0.810222451729283).abs() < 1e-10);
    // The two corner states share the threshold flow level.
    assert!((ss.corner_supersonic.q - p.q_star).abs() < 1e-9 * p.q_star);
    assert!((ss.corner_subsonic.q - p.q_star).abs() < 1e-9 * p.q_star);
}
