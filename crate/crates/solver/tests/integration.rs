use pemfc_solver::verify::convergence_order;
use pemfc_solver::{integrate, Bdf, Event, SolverError, SolverSettings, Termination};
use proptest::prelude::*;

fn stiff_cos(t: f64, y: &[f64], dy: &mut [f64]) {
    dy[0] = -1000.0 * (y[0] - t.cos()) - t.sin();
}

fn robertson(_t: f64, y: &[f64], dy: &mut [f64]) {
    let (a, b, c) = (y[0], y[1], y[2]);
    dy[0] = -0.04 * a + 1e4 * b * c;
    dy[1] = 0.04 * a - 1e4 * b * c - 3e7 * b * b;
    dy[2] = 3e7 * b * b;
}

#[test]
fn stiff_cosine_tracks_analytic_solution() {
    let s = SolverSettings::default();
    let out = integrate(stiff_cos, &[1.0], (0.0, 10.0), &s, &[]).unwrap();
    let err = (out.y_final[0] - 10f64.cos()).abs();
    assert!(err < 100.0 * s.rtol, "err = {err:e}");
    assert!(out.stats.steps < 2000, "steps = {}", out.stats.steps);
}

#[test]
fn robertson_conserves_mass() {
    let s = SolverSettings::default().with_rtol(1e-8).with_atol(1e-12);
    let out = integrate(robertson, &[1.0, 0.0, 0.0], (0.0, 1e4), &s, &[]).unwrap();
    for y in &out.states {
        let sum: f64 = y.iter().sum();
        assert!((sum - 1.0).abs() < 1e-6, "sum = {sum}");
    }
    let reference = integrate(
        robertson,
        &[1.0, 0.0, 0.0],
        (0.0, 1e4),
        &SolverSettings::default().with_rtol(1e-10).with_atol(1e-14),
        &[],
    )
    .unwrap();
    for (a, b) in out.y_final.iter().zip(&reference.y_final) {
        assert!((a - b).abs() < 1e-5 * b.abs().max(1e-6), "{a} vs {b}");
    }
}

#[test]
fn fixed_step_orders_match_nominal() {
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0];
    let exact = |t: f64| vec![(-t).exp()];
    for k in 1..=5usize {
        let counts: Vec<usize> = [20usize, 40, 80, 160].to_vec();
        let p = convergence_order(rhs, exact, 0.0, 1.0, k, &counts).unwrap();
        assert!((p - k as f64).abs() <= 0.3, "BDF-{k}: measured {p}");
    }
}

#[test]
fn linear_stiff_problem_is_stable_at_large_steps() {
    let lambda = -1e6;
    let rhs = move |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = lambda * y[0];
    // h = 0.01 is 5000 times the explicit stability limit 2/|λ|
    let h = 0.01;
    for order in 1..=2usize {
        let history: Vec<Vec<f64>> = (0..=order).map(|_| vec![1.0]).collect();
        let mut y = history[0].clone();
        let mut hist = history;
        for _ in 0..50 {
            let next = pemfc_solver::integrate_fixed(rhs, &hist, 0.0, h, 1, order).unwrap();
            assert!(next[0].abs() <= y[0].abs() + 1e-15, "BDF-{order} grew");
            hist.insert(0, next.clone());
            hist.truncate(order + 1);
            y = next;
        }
        assert!(y[0].abs() < 1e-12, "BDF-{order}: {}", y[0]);
    }
    let s = SolverSettings::default().with_max_order(2);
    let out = integrate(rhs, &[1.0], (0.0, 10.0), &s, &[]).unwrap();
    assert!(out.states.iter().all(|y| y[0].abs() <= 1.0 + 1e-12));
    assert!(out.stats.steps < 2000, "steps = {}", out.stats.steps);
}

#[test]
fn runs_are_bitwise_deterministic() {
    let s = SolverSettings::default();
    let a = integrate(robertson, &[1.0, 0.0, 0.0], (0.0, 100.0), &s, &[]).unwrap();
    let b = integrate(robertson, &[1.0, 0.0, 0.0], (0.0, 100.0), &s, &[]).unwrap();
    assert_eq!(a.times, b.times);
    assert_eq!(a.states, b.states);
    assert_eq!(a.stats, b.stats);
}

#[test]
fn terminal_event_is_located() {
    // y = exp(-t) hits 0.5 at ln 2
    let s = SolverSettings::default().with_rtol(1e-8).with_atol(1e-12);
    let ev = [Event::new(|_, y: &[f64]| y[0] - 0.5)];
    let out = integrate(|_, y, dy| dy[0] = -y[0], &[1.0], (0.0, 5.0), &s, &ev).unwrap();
    let t_star = 2f64.ln();
    match out.termination {
        Termination::Event { index, t } => {
            assert_eq!(index, 0);
            assert!((t - t_star).abs() < 1e-6 * 5.0, "t = {t}");
        }
        Termination::Completed => panic!("event missed"),
    }
    assert_eq!(out.t_final, *out.times.last().unwrap());
}

#[test]
fn non_terminal_events_are_recorded() {
    let s = SolverSettings::default().with_rtol(1e-8).with_atol(1e-12);
    // harmonic oscillator: y0 = sin t crosses zero at kπ
    let ev = [Event::new(|_, y: &[f64]| y[0]).non_terminal()];
    let out = integrate(
        |_, y, dy| {
            dy[0] = y[1];
            dy[1] = -y[0];
        },
        &[0.0, 1.0],
        (0.0, 10.0),
        &s,
        &ev,
    )
    .unwrap();
    assert_eq!(out.termination, Termination::Completed);
    let ts: Vec<f64> = out.events.iter().map(|e| e.t).collect();
    assert_eq!(ts.len(), 3, "{ts:?}");
    for (k, t) in ts.iter().enumerate() {
        assert!((t - (k + 1) as f64 * std::f64::consts::PI).abs() < 1e-5);
    }
}

#[test]
fn falling_direction_filters_crossings() {
    let s = SolverSettings::default().with_rtol(1e-8).with_atol(1e-12);
    let ev = [Event::new(|_, y: &[f64]| y[0]).non_terminal().falling()];
    let out = integrate(
        |_, y, dy| {
            dy[0] = y[1];
            dy[1] = -y[0];
        },
        &[0.0, 1.0],
        (0.0, 10.0),
        &s,
        &ev,
    )
    .unwrap();
    // sin t falls through zero only at π and 3π
    assert_eq!(out.events.len(), 2);
}

#[test]
fn warm_restart_continues_the_trajectory() {
    let s = SolverSettings::default().with_rtol(1e-8).with_atol(1e-12);
    let mut bdf = Bdf::new(s);
    let first = bdf
        .integrate(stiff_cos, &[1.0], 0.0, 5.0, &[], None)
        .unwrap();
    let second = bdf
        .integrate(stiff_cos, &first.y_final, 5.0, 10.0, &[], None)
        .unwrap();
    assert!((second.y_final[0] - 10f64.cos()).abs() < 1e-6);
    // the cached Jacobian is reused: the second leg does not start from scratch
    assert!(second.stats.jac_evals <= first.stats.jac_evals);
}

#[test]
fn non_finite_rhs_mid_run_is_reported() {
    let s = SolverSettings::default();
    let err = integrate(
        |t, y, dy| dy[0] = if t > 0.5 { f64::NAN } else { -y[0] },
        &[1.0],
        (0.0, 1.0),
        &s,
        &[],
    )
    .unwrap_err();
    assert!(matches!(
        err,
        SolverError::NewtonDivergence { .. } | SolverError::StepSizeUnderflow { .. }
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tighter_tolerance_never_hurts_much(rate in 0.1f64..50.0, exp in 4i32..8) {
        let rtol = 10f64.powi(-exp);
        let run = |r: f64| {
            let s = SolverSettings::default().with_rtol(r).with_atol(r * 1e-3);
            let out = integrate(move |_, y, dy| dy[0] = -rate * y[0], &[1.0], (0.0, 1.0), &s, &[]).unwrap();
            (out.y_final[0] - (-rate).exp()).abs()
        };
        let loose = run(rtol);
        let tight = run(rtol * 1e-2);
        prop_assert!(loose < 1e3 * rtol);
        prop_assert!(tight <= loose.max(1e-3 * rtol) * 10.0);
    }
}
