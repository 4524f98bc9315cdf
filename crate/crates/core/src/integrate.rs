//! Time integration with invariant-drift instrumentation.
//!
//! Three methods are provided: classical fixed-step RK4, the Dormand-Prince
//! 5(4) pair with PI step control, and the implicit midpoint rule. The
//! midpoint rule preserves every quadratic first integral, which covers both
//! `H` and `C` of the top.

use std::ops::ControlFlow;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{casimir, hamiltonian, vector_field, Params, State};

/// Autonomous ODE `y' = f(y)` on `R^N`.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, y: &[f64; N]) -> [f64; N];

    /// Jacobian `df/dy`. The default is a forward difference.
    fn jacobian(&self, y: &[f64; N]) -> [[f64; N]; N] {
        let f0 = self.rhs(y);
        let mut jac = [[0.0; N]; N];
        for j in 0..N {
            let h = 1e-7 * y[j].abs().max(1.0);
            let mut yp = *y;
            yp[j] += h;
            let fp = self.rhs(&yp);
            for i in 0..N {
                jac[i][j] = (fp[i] - f0[i]) / h;
            }
        }
        jac
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4Fixed,
    Rk45Adaptive,
    ImplicitMidpoint,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "rk4" | "rk4_fixed" => Ok(Method::Rk4Fixed),
            "rk45" | "rk45_adaptive" | "dopri5" => Ok(Method::Rk45Adaptive),
            "midpoint" | "implicit_midpoint" => Ok(Method::ImplicitMidpoint),
            _ => Err(Error::InvalidInput(format!("unknown integration method `{s}`"))),
        }
    }
}

/// Which times end up in the output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Every accepted step.
    Steps,
    /// Multiples of the interval (plus `t_end`), interpolated on accepted
    /// steps (fourth-order dense output for `rk45`, cubic Hermite otherwise).
    Every(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSpec {
    pub method: Method,
    /// Step size for the fixed-step methods.
    pub step: f64,
    pub rtol: f64,
    pub atol: f64,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    pub sampling: Sampling,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self {
            method: Method::Rk45Adaptive,
            step: 0.01,
            rtol: 1e-10,
            atol: 1e-12,
            newton_tol: 1e-13,
            newton_max_iters: 50,
            sampling: Sampling::Steps,
        }
    }
}

impl IntegratorSpec {
    pub fn rk4(step: f64) -> Self {
        Self { method: Method::Rk4Fixed, step, ..Self::default() }
    }

    pub fn rk45(rtol: f64, atol: f64) -> Self {
        Self { method: Method::Rk45Adaptive, rtol, atol, ..Self::default() }
    }

    pub fn midpoint(step: f64) -> Self {
        Self { method: Method::ImplicitMidpoint, step, ..Self::default() }
    }

    pub fn sampled_every(mut self, dt: f64) -> Self {
        self.sampling = Sampling::Every(dt);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{name} must be positive, got {v}")))
            }
        };
        positive("step", self.step)?;
        positive("rtol", self.rtol)?;
        positive("atol", self.atol)?;
        positive("newton_tol", self.newton_tol)?;
        if self.newton_max_iters < 1 {
            return Err(Error::InvalidInput("newton_max_iters must be at least 1".into()));
        }
        if let Sampling::Every(dt) = self.sampling {
            positive("sampling interval", dt)?;
        }
        Ok(())
    }
}

/// Output of the generic solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
}

impl<const N: usize> Solution<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        (*self.times.last().expect("nonempty"), *self.states.last().expect("nonempty"))
    }
}

/// One accepted step. Dense output is the cubic Hermite interpolant through
/// the endpoints, plus a quartic correction when the method provides one.
struct Step<const N: usize> {
    t0: f64,
    y0: [f64; N],
    f0: [f64; N],
    t1: f64,
    y1: [f64; N],
    f1: [f64; N],
    correction: Option<[f64; N]>,
}

impl<const N: usize> Step<N> {
    fn interpolate(&self, t: f64) -> [f64; N] {
        if t == self.t1 {
            return self.y1;
        }
        if t == self.t0 {
            return self.y0;
        }
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s1 = 1.0 - s;
        std::array::from_fn(|i| {
            let diff = self.y1[i] - self.y0[i];
            let r3 = h * self.f0[i] - diff;
            let r4 = diff - h * self.f1[i] - r3;
            let r5 = self.correction.map_or(0.0, |c| c[i]);
            self.y0[i] + s * (diff + s1 * (r3 + s * (r4 + s1 * r5)))
        })
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn max_norm<const N: usize>(v: &[f64; N]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn all_finite<const N: usize>(v: &[f64; N]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn check_t_end(t_end: f64) -> Result<()> {
    if t_end > 0.0 && t_end.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("t_end must be positive, got {t_end}")))
    }
}

const MAX_STEPS: usize = 20_000_000;

fn drive<S, const N: usize>(
    sys: &S,
    y0: [f64; N],
    t_end: f64,
    spec: &IntegratorSpec,
    mut accept: impl FnMut(&Step<N>) -> ControlFlow<()>,
) -> Result<()>
where
    S: OdeSystem<N> + ?Sized,
{
    spec.validate()?;
    check_t_end(t_end)?;
    match spec.method {
        Method::Rk4Fixed => fixed_steps(sys, y0, t_end, spec, rk4_step, &mut accept),
        Method::ImplicitMidpoint => fixed_steps(sys, y0, t_end, spec, midpoint_step, &mut accept),
        Method::Rk45Adaptive => dopri5(sys, y0, t_end, spec, &mut accept),
    }
}

type FixedStepFn<S, const N: usize> = fn(&S, f64, &[f64; N], &[f64; N], f64, &IntegratorSpec) -> Result<[f64; N]>;

fn fixed_steps<S, const N: usize>(
    sys: &S,
    y0: [f64; N],
    t_end: f64,
    spec: &IntegratorSpec,
    step_fn: FixedStepFn<S, N>,
    accept: &mut impl FnMut(&Step<N>) -> ControlFlow<()>,
) -> Result<()>
where
    S: OdeSystem<N> + ?Sized,
{
    let n = ((t_end / spec.step) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = t_end / n as f64;
    let mut y = y0;
    let mut f = sys.rhs(&y);
    let mut t = 0.0;
    for i in 1..=n {
        let y1 = step_fn(sys, t, &y, &f, h, spec)?;
        let t1 = if i == n { t_end } else { i as f64 * h };
        let f1 = sys.rhs(&y1);
        let step = Step { t0: t, y0: y, f0: f, t1, y1, f1, correction: None };
        if accept(&step).is_break() {
            return Ok(());
        }
        (t, y, f) = (t1, y1, f1);
    }
    Ok(())
}

fn rk4_step<S, const N: usize>(
    sys: &S,
    _t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    _spec: &IntegratorSpec,
) -> Result<[f64; N]>
where
    S: OdeSystem<N> + ?Sized,
{
    let k2 = sys.rhs(&axpy(y, 0.5 * h, &[(1.0, k1)]));
    let k3 = sys.rhs(&axpy(y, 0.5 * h, &[(1.0, &k2)]));
    let k4 = sys.rhs(&axpy(y, h, &[(1.0, &k3)]));
    Ok(axpy(y, h / 6.0, &[(1.0, k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)]))
}

/// Solves `Y = y + (h/2) f(Y)` for the midpoint stage and returns `2Y - y`.
fn midpoint_step<S, const N: usize>(
    sys: &S,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    h: f64,
    spec: &IntegratorSpec,
) -> Result<[f64; N]>
where
    S: OdeSystem<N> + ?Sized,
{
    let converged = |delta: f64, stage: &[f64; N]| delta <= spec.newton_tol * (1.0 + max_norm(stage));
    let finish = |stage: &[f64; N]| std::array::from_fn(|i| 2.0 * stage[i] - y[i]);

    // fixed-point iteration, abandoned as soon as it stops contracting fast
    let mut stage = axpy(y, 0.5 * h, &[(1.0, f0)]);
    let mut prev_delta = f64::INFINITY;
    for _ in 0..spec.newton_max_iters {
        let next = axpy(y, 0.5 * h, &[(1.0, &sys.rhs(&stage))]);
        let delta = max_norm(&std::array::from_fn::<f64, N, _>(|i| next[i] - stage[i]));
        if !all_finite(&next) || delta > 0.5 * prev_delta {
            break;
        }
        stage = next;
        if converged(delta, &stage) {
            return Ok(finish(&stage));
        }
        prev_delta = delta;
    }

    // Newton on G(Y) = Y - y - (h/2) f(Y)
    if !all_finite(&stage) {
        stage = *y;
    }
    for _ in 0..spec.newton_max_iters {
        let f = sys.rhs(&stage);
        let jac = sys.jacobian(&stage);
        let g = DVector::<f64>::from_fn(N, |i, _| stage[i] - y[i] - 0.5 * h * f[i]);
        let dg = DMatrix::<f64>::from_fn(N, N, |i, j| (if i == j { 1.0 } else { 0.0 }) - 0.5 * h * jac[i][j]);
        let Some(dy) = dg.lu().solve(&g) else {
            break;
        };
        for i in 0..N {
            stage[i] -= dy[i];
        }
        if !all_finite(&stage) {
            break;
        }
        if converged(dy.amax(), &stage) {
            return Ok(finish(&stage));
        }
    }
    Err(Error::NewtonDivergence { t, iters: spec.newton_max_iters })
}

// Dormand-Prince 5(4) tableau
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B5: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

// continuous extension of order 4
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const PI_BETA: f64 = 0.04;

fn dopri5<S, const N: usize>(
    sys: &S,
    y0: [f64; N],
    t_end: f64,
    spec: &IntegratorSpec,
    accept: &mut impl FnMut(&Step<N>) -> ControlFlow<()>,
) -> Result<()>
where
    S: OdeSystem<N> + ?Sized,
{
    let expo = 0.2 - PI_BETA * 0.75;
    let h_min = 1e-12 * t_end;
    let mut t = 0.0;
    let mut y = y0;
    let mut k1 = sys.rhs(&y);
    let mut h = 1e-3 * t_end;
    let mut err_old = 1e-4_f64;
    let mut rejected = false;

    for _ in 0..MAX_STEPS {
        if t >= t_end {
            return Ok(());
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let k2 = sys.rhs(&axpy(&y, h, &[(A2[0], &k1)]));
        let k3 = sys.rhs(&axpy(&y, h, &[(A3[0], &k1), (A3[1], &k2)]));
        let k4 = sys.rhs(&axpy(&y, h, &[(A4[0], &k1), (A4[1], &k2), (A4[2], &k3)]));
        let k5 = sys.rhs(&axpy(&y, h, &[(A5[0], &k1), (A5[1], &k2), (A5[2], &k3), (A5[3], &k4)]));
        let k6 = sys.rhs(&axpy(&y, h, &[(A6[0], &k1), (A6[1], &k2), (A6[2], &k3), (A6[3], &k4), (A6[4], &k5)]));
        let y1 = axpy(&y, h, &[(B5[0], &k1), (B5[2], &k3), (B5[3], &k4), (B5[4], &k5), (B5[5], &k6)]);
        let k7 = sys.rhs(&y1);

        let mut err = 0.0;
        for i in 0..N {
            let e = h * (E[0] * k1[i] + E[2] * k3[i] + E[3] * k4[i] + E[4] * k5[i] + E[5] * k6[i] + E[6] * k7[i]);
            let sc = spec.atol + spec.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (err / N as f64).sqrt();
        let err = if err.is_finite() && all_finite(&y1) && all_finite(&k7) { err } else { f64::INFINITY };

        let fac_err = err.powf(expo);
        if err <= 1.0 {
            let t1 = if last { t_end } else { t + h };
            let correction =
                axpy(&[0.0; N], h, &[(D[0], &k1), (D[2], &k3), (D[3], &k4), (D[4], &k5), (D[5], &k6), (D[6], &k7)]);
            let step = Step { t0: t, y0: y, f0: k1, t1, y1, f1: k7, correction: Some(correction) };
            if accept(&step).is_break() {
                return Ok(());
            }
            let mut factor = (fac_err / err_old.powf(PI_BETA) / SAFETY).clamp(1.0 / MAX_FACTOR, 1.0 / MIN_FACTOR);
            if rejected {
                factor = factor.max(1.0);
            }
            err_old = err.max(1e-4);
            rejected = false;
            (t, y, k1) = (t1, y1, k7);
            h /= factor;
        } else {
            rejected = true;
            let factor = if err.is_finite() { (fac_err / SAFETY).min(1.0 / MIN_FACTOR) } else { 1.0 / MIN_FACTOR };
            h /= factor;
        }
        if h < h_min && t < t_end {
            return Err(Error::StepFailure { t, h });
        }
    }
    Err(Error::StepFailure { t, h })
}

/// Output grid for [`solve_with`].
enum Grid<'a> {
    Steps,
    Times(&'a [f64]),
}

fn solve_with<S, const N: usize>(
    sys: &S,
    y0: [f64; N],
    t_end: f64,
    spec: &IntegratorSpec,
    grid: Grid<'_>,
    mut keep_going: impl FnMut(f64, &[f64; N]) -> bool,
) -> Result<Solution<N>>
where
    S: OdeSystem<N> + ?Sized,
{
    let mut sol = Solution { times: vec![0.0], states: vec![y0] };
    if !keep_going(0.0, &y0) {
        return Ok(sol);
    }
    let mut next = match grid {
        Grid::Times(ts) => ts.iter().position(|&t| t > 0.0).unwrap_or(ts.len()),
        Grid::Steps => 0,
    };
    drive(sys, y0, t_end, spec, |step| {
        match grid {
            Grid::Steps => {
                sol.times.push(step.t1);
                sol.states.push(step.y1);
                if !keep_going(step.t1, &step.y1) {
                    return ControlFlow::Break(());
                }
            }
            Grid::Times(ts) => {
                while next < ts.len() && ts[next] <= step.t1 {
                    let y = step.interpolate(ts[next]);
                    sol.times.push(ts[next]);
                    sol.states.push(y);
                    next += 1;
                    if !keep_going(ts[next - 1], &y) {
                        return ControlFlow::Break(());
                    }
                }
            }
        }
        ControlFlow::Continue(())
    })?;
    Ok(sol)
}

/// `0, dt, 2 dt, ...` strictly below `t_end`, then `t_end`.
pub fn sample_times(t_end: f64, dt: f64) -> Vec<f64> {
    let mut ts = vec![0.0];
    let mut k = 1;
    loop {
        let t = k as f64 * dt;
        if t >= t_end * (1.0 - 1e-12) {
            break;
        }
        ts.push(t);
        k += 1;
    }
    ts.push(t_end);
    ts
}

/// Integrates from `t = 0` to `t_end`, storing the points selected by
/// `spec.sampling`.
pub fn solve<S, const N: usize>(sys: &S, y0: [f64; N], t_end: f64, spec: &IntegratorSpec) -> Result<Solution<N>>
where
    S: OdeSystem<N> + ?Sized,
{
    solve_until(sys, y0, t_end, spec, |_, _| true)
}

/// Like [`solve`], stopping early once `keep_going` returns false on a
/// stored point.
pub fn solve_until<S, const N: usize>(
    sys: &S,
    y0: [f64; N],
    t_end: f64,
    spec: &IntegratorSpec,
    keep_going: impl FnMut(f64, &[f64; N]) -> bool,
) -> Result<Solution<N>>
where
    S: OdeSystem<N> + ?Sized,
{
    check_t_end(t_end)?;
    match spec.sampling {
        Sampling::Steps => solve_with(sys, y0, t_end, spec, Grid::Steps, keep_going),
        Sampling::Every(dt) => {
            let ts = sample_times(t_end, dt);
            solve_with(sys, y0, t_end, spec, Grid::Times(&ts), keep_going)
        }
    }
}

/// Integrates to the last of `times` (ascending, non-negative) and returns
/// the interpolated states at exactly those times. Time 0 is always the
/// first entry of the output.
pub fn solve_at<S, const N: usize>(sys: &S, y0: [f64; N], times: &[f64], spec: &IntegratorSpec) -> Result<Solution<N>>
where
    S: OdeSystem<N> + ?Sized,
{
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| *t < 0.0 || !t.is_finite()) {
        return Err(Error::InvalidInput("output times must be finite, non-negative and sorted".into()));
    }
    let t_end = times.last().copied().unwrap_or(0.0);
    check_t_end(t_end)?;
    solve_with(sys, y0, t_end, spec, Grid::Times(times), |_, _| true)
}

/// The top vector field, optionally with time reversed.
#[derive(Debug, Clone, Copy)]
pub struct TopSystem {
    pub params: Params,
    pub reversed: bool,
}

impl TopSystem {
    pub fn new(params: Params) -> Self {
        Self { params, reversed: false }
    }

    pub fn reversed(params: Params) -> Self {
        Self { params, reversed: true }
    }

    fn sign(&self) -> f64 {
        if self.reversed {
            -1.0
        } else {
            1.0
        }
    }
}

impl OdeSystem<3> for TopSystem {
    fn rhs(&self, y: &[f64; 3]) -> [f64; 3] {
        vector_field(&self.params, &State::from(*y)).map(|v| self.sign() * v)
    }

    fn jacobian(&self, y: &[f64; 3]) -> [[f64; 3]; 3] {
        let s = self.sign();
        crate::stability::linearization(&self.params, &State::from(*y)).map(|row| row.map(|v| s * v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub h_series: Vec<f64>,
    pub c_series: Vec<f64>,
}

impl Trajectory {
    pub fn from_states(b: &Params, times: Vec<f64>, states: Vec<State>) -> Self {
        let (h, c) = (hamiltonian(b), casimir(b));
        let h_series = states.iter().map(|x| h.eval(x)).collect();
        let c_series = states.iter().map(|x| c.eval(x)).collect();
        Self { times, states, h_series, c_series }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Integrates the top from `x0` over `[0, t_end]`.
pub fn integrate(b: &Params, x0: &State, t_end: f64, spec: &IntegratorSpec) -> Result<Trajectory> {
    let sol = solve(&TopSystem::new(*b), x0.to_array(), t_end, spec)?;
    Ok(Trajectory::from_states(b, sol.times, sol.states.into_iter().map(State::from).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftReport {
    pub dh_max: f64,
    pub dc_max: f64,
}

pub fn drift_report(traj: &Trajectory) -> Result<DriftReport> {
    let (Some(h0), Some(c0)) = (traj.h_series.first(), traj.c_series.first()) else {
        return Err(Error::EmptyTrajectory);
    };
    Ok(DriftReport {
        dh_max: traj.h_series.iter().map(|h| (h - h0).abs()).fold(0.0, f64::max),
        dc_max: traj.c_series.iter().map(|c| (c - c0).abs()).fold(0.0, f64::max),
    })
}

/// Max of `|x(t) - x(0)|_inf` over a series of states.
pub fn max_excursion<const N: usize>(states: &[[f64; N]], center: &[f64; N]) -> f64 {
    states.iter().map(|y| (0..N).map(|i| (y[i] - center[i]).abs()).fold(0.0, f64::max)).fold(0.0, f64::max)
}
