//! Reduction of the top on a level set of `H0` to the pendulum
//! `theta'' = (b1 b3 / gamma) sqrt(2H) cos(theta)`, valid when `b2 b3 < 0`.
//!
//! Forward map, with `gamma = sqrt(-b3/b2)`:
//!
//! ```text
//! x1 = (gamma / b3) theta'
//! x2 = sqrt(2H) cos(theta)
//! x3 = gamma sqrt(2H) sin(theta)
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{sample_times, solve_at, IntegratorSpec, OdeSystem, Sampling, TopSystem};
use crate::model::{reduced_hamiltonian, Params, State};

/// Smallest level value accepted by the reduction.
pub const MIN_LEVEL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReductionContext {
    pub params: Params,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PendulumState {
    pub theta: f64,
    pub theta_dot: f64,
    /// Level value `H = H0(x) > 0`.
    pub h: f64,
}

pub fn make_context(b: &Params) -> Result<ReductionContext> {
    let b2b3 = b.b2() * b.b3();
    if b2b3 >= 0.0 {
        return Err(Error::WrongSignRegime(b2b3));
    }
    Ok(ReductionContext { params: *b, gamma: (-b.b3() / b.b2()).sqrt() })
}

impl ReductionContext {
    /// `b1 b3 / gamma`, the pendulum gain per unit `sqrt(2H)`.
    pub fn gain(&self) -> f64 {
        self.params.b1() * self.params.b3() / self.gamma
    }
}

pub fn to_pendulum(ctx: &ReductionContext, x: &State) -> Result<PendulumState> {
    let h = reduced_hamiltonian(&ctx.params).eval(x);
    if h.is_nan() || h < MIN_LEVEL || x.x2 * x.x2 + x.x3 * x.x3 == 0.0 {
        return Err(Error::OnSingularRay);
    }
    Ok(PendulumState { theta: (x.x3 / ctx.gamma).atan2(x.x2), theta_dot: ctx.params.b3() * x.x1 / ctx.gamma, h })
}

pub fn from_pendulum(ctx: &ReductionContext, p: &PendulumState) -> State {
    let r = (2.0 * p.h).sqrt();
    State::new(ctx.gamma / ctx.params.b3() * p.theta_dot, r * p.theta.cos(), ctx.gamma * r * p.theta.sin())
}

pub fn pendulum_accel(ctx: &ReductionContext, h: f64, theta: f64) -> f64 {
    ctx.gain() * (2.0 * h).sqrt() * theta.cos()
}

/// Conserved energy `theta'^2 / 2 - K sin(theta)` with `K = (b1 b3/gamma) sqrt(2H)`.
pub fn pendulum_energy(ctx: &ReductionContext, p: &PendulumState) -> f64 {
    0.5 * p.theta_dot * p.theta_dot - ctx.gain() * (2.0 * p.h).sqrt() * p.theta.sin()
}

/// Planar pendulum `(theta, theta')` on a fixed level `H`.
#[derive(Debug, Clone, Copy)]
pub struct PendulumSystem {
    pub accel_scale: f64,
}

impl PendulumSystem {
    pub fn new(ctx: &ReductionContext, h: f64) -> Self {
        Self { accel_scale: ctx.gain() * (2.0 * h).sqrt() }
    }
}

impl OdeSystem<2> for PendulumSystem {
    fn rhs(&self, y: &[f64; 2]) -> [f64; 2] {
        [y[1], self.accel_scale * y[0].cos()]
    }

    fn jacobian(&self, y: &[f64; 2]) -> [[f64; 2]; 2] {
        [[0.0, 1.0], [-self.accel_scale * y[0].sin(), 0.0]]
    }
}

/// Removes `2 pi` jumps from a sequence of wrapped angles.
pub fn unwrap_angles(angles: &[f64]) -> Vec<f64> {
    use std::f64::consts::{PI, TAU};
    let mut out = Vec::with_capacity(angles.len());
    let mut offset = 0.0;
    for (i, a) in angles.iter().enumerate() {
        if i > 0 {
            let jump = a - angles[i - 1];
            if jump > PI {
                offset -= TAU;
            } else if jump < -PI {
                offset += TAU;
            }
        }
        out.push(a + offset);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReductionSample {
    pub t: f64,
    pub theta: f64,
    pub theta_dot: f64,
    pub direct: State,
    pub mapped: State,
    /// `|x_direct - x_mapped|_inf`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionCheck {
    pub level: f64,
    pub max_discrepancy: f64,
    /// Max of `|x2^2 - (b2/b3) x3^2 - 2H|` along the mapped solution.
    pub max_level_residual: f64,
    pub energy_drift: f64,
    pub samples: Vec<ReductionSample>,
}

/// Number of output intervals used when the integrator is set to sample every step.
const DEFAULT_INTERVALS: usize = 200;

/// Integrates the top directly and through the pendulum, mapping the
/// pendulum solution back with [`from_pendulum`], and compares the two on a
/// common output grid.
pub fn verify_reduction(
    ctx: &ReductionContext,
    x0: &State,
    t_end: f64,
    spec: &IntegratorSpec,
) -> Result<ReductionCheck> {
    let p0 = to_pendulum(ctx, x0)?;
    let start = ReductionSample {
        t: 0.0,
        theta: p0.theta,
        theta_dot: p0.theta_dot,
        direct: *x0,
        mapped: from_pendulum(ctx, &p0),
        residual: x0.max_abs_diff(&from_pendulum(ctx, &p0)),
    };
    if t_end == 0.0 {
        return Ok(ReductionCheck {
            level: p0.h,
            max_discrepancy: start.residual,
            max_level_residual: level_residual(ctx, &start.mapped, p0.h),
            energy_drift: 0.0,
            samples: vec![start],
        });
    }
    let times = match spec.sampling {
        Sampling::Every(dt) => sample_times(t_end, dt),
        Sampling::Steps => sample_times(t_end, t_end / DEFAULT_INTERVALS as f64),
    };
    let direct = solve_at(&TopSystem::new(ctx.params), x0.to_array(), &times, spec)?;
    let pendulum = solve_at(&PendulumSystem::new(ctx, p0.h), [p0.theta, p0.theta_dot], &times, spec)?;

    let e0 = pendulum_energy(ctx, &p0);
    let mut check = ReductionCheck {
        level: p0.h,
        max_discrepancy: 0.0,
        max_level_residual: 0.0,
        energy_drift: 0.0,
        samples: Vec::with_capacity(times.len()),
    };
    for ((t, xd), th) in direct.times.iter().zip(&direct.states).zip(&pendulum.states) {
        let p = PendulumState { theta: th[0], theta_dot: th[1], h: p0.h };
        let mapped = from_pendulum(ctx, &p);
        let direct = State::from(*xd);
        let residual = direct.max_abs_diff(&mapped);
        check.max_discrepancy = check.max_discrepancy.max(residual);
        check.max_level_residual = check.max_level_residual.max(level_residual(ctx, &mapped, p0.h));
        check.energy_drift = check.energy_drift.max((pendulum_energy(ctx, &p) - e0).abs());
        check.samples.push(ReductionSample { t: *t, theta: p.theta, theta_dot: p.theta_dot, direct, mapped, residual });
    }
    Ok(check)
}

fn level_residual(ctx: &ReductionContext, x: &State, h: f64) -> f64 {
    let b = &ctx.params;
    (x.x2 * x.x2 - b.b2() / b.b3() * x.x3 * x.x3 - 2.0 * h).abs()
}
