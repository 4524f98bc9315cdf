use mbtop::integrate::{integrate, solve, solve_at, IntegratorSpec, OdeSystem, Sampling, TopSystem};
use mbtop::model::{first_integrals, Params, Preset, State};

fn reference(b: &Params, x0: &State, t: f64) -> [f64; 3] {
    let spec = IntegratorSpec::rk45(1e-13, 1e-15);
    solve(&TopSystem::new(*b), x0.to_array(), t, &spec).unwrap().last().1
}

fn max_diff(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

#[test]
fn rk4_global_error_is_fourth_order() {
    let b = Params::new(1.0, -2.0, 0.5).unwrap();
    let x0 = State::new(0.3, 1.0, -0.4);
    let exact = reference(&b, &x0, 2.0);
    let hs = [0.1, 0.05, 0.025];
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| {
            max_diff(&solve(&TopSystem::new(b), x0.to_array(), 2.0, &IntegratorSpec::rk4(h)).unwrap().last().1, &exact)
        })
        .collect();
    // least-squares slope of log(err) against log(h)
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope - 4.0).abs() <= 0.3, "slope {slope}, errors {errs:?}");
}

#[test]
fn rk4_invariant_drift_scales_like_h4() {
    // Moderate amplitude and horizon keep h = 0.1 in the asymptotic regime.
    // On larger orbits or longer runs an h^5 secular term still dominates at
    // this step and the ratio drifts toward 32.
    let b = Preset::LorenzHamilton.params();
    let x0 = State::new(0.0, 0.5, 0.25);
    let drift = |h: f64| {
        let traj = integrate(&b, &x0, 10.0, &IntegratorSpec::rk4(h)).unwrap();
        let h0 = traj.h_series[0];
        traj.h_series.iter().map(|v| (v - h0).abs()).fold(0.0, f64::max)
    };
    let ratio = drift(0.1) / drift(0.05);
    assert!((ratio - 16.0).abs() <= 0.3 * 16.0, "ratio {ratio}");
}

#[test]
fn midpoint_preserves_quadratic_invariants_over_long_runs() {
    let b = Preset::LorenzHamilton.params();
    let x0 = State::new(0.0, 1.0, 0.0);
    let traj = integrate(&b, &x0, 1000.0, &IntegratorSpec::midpoint(0.1)).unwrap();
    let i0 = first_integrals(&b, &x0);
    for (h, c) in traj.h_series.iter().zip(&traj.c_series) {
        assert!((h - i0.h).abs() <= 1e-11 && (c - i0.c).abs() <= 1e-11);
    }
}

#[test]
fn forward_then_reversed_returns_to_the_start() {
    let b = Params::new(0.7, -1.3, 2.1).unwrap();
    let x0 = [0.4, -0.8, 1.1];
    let spec = IntegratorSpec::rk45(1e-12, 1e-14);
    let forward = solve(&TopSystem::new(b), x0, 5.0, &spec).unwrap().last().1;
    let back = solve(&TopSystem::reversed(b), forward, 5.0, &spec).unwrap().last().1;
    assert!(max_diff(&back, &x0) <= 1e-8, "{back:?}");
}

#[test]
fn sampled_output_lands_on_the_grid() {
    let b = Preset::MaxwellBloch.params();
    let x0 = State::new(0.1, 0.9, 0.3);
    let traj = integrate(&b, &x0, 1.0, &IntegratorSpec::rk45(1e-10, 1e-12).sampled_every(0.25)).unwrap();
    assert_eq!(traj.times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
}

#[test]
fn dense_output_matches_direct_integration() {
    let b = Params::new(-1.0, 2.0, -0.5).unwrap();
    let x0 = [1.0, 0.5, -0.3];
    let spec = IntegratorSpec::rk45(1e-11, 1e-13);
    let times = [0.0, 0.37, 1.11, 2.5, 3.0];
    let sol = solve_at(&TopSystem::new(b), x0, &times, &spec).unwrap();
    assert_eq!(sol.times, times);
    for (t, y) in times.iter().zip(&sol.states).skip(1) {
        assert!(max_diff(y, &reference(&b, &State::from(x0), *t)) <= 1e-8);
    }
}

#[test]
fn fixed_step_grid_is_uniform_and_ends_exactly() {
    let b = Preset::MaxwellBloch.params();
    let traj = integrate(&b, &State::new(0.1, 0.2, 0.3), 1.0, &IntegratorSpec::rk4(0.3)).unwrap();
    assert_eq!(traj.len(), 5);
    assert_eq!(*traj.times.last().unwrap(), 1.0);
    assert!(matches!(IntegratorSpec::rk4(0.3).sampling, Sampling::Steps));
}

struct Harmonic;

impl OdeSystem<2> for Harmonic {
    fn rhs(&self, y: &[f64; 2]) -> [f64; 2] {
        [y[1], -y[0]]
    }
}

#[test]
fn generic_systems_use_the_same_solvers() {
    let t = std::f64::consts::PI;
    for spec in [IntegratorSpec::rk45(1e-12, 1e-14), IntegratorSpec::rk4(1e-3), IntegratorSpec::midpoint(1e-3)] {
        let y = solve(&Harmonic, [1.0, 0.0], t, &spec).unwrap().last().1;
        assert!((y[0] + 1.0).abs() <= 1e-6 && y[1].abs() <= 1e-6, "{:?}: {y:?}", spec.method);
    }
}
