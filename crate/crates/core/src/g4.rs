//! Optimal control of the drift-free left-invariant system
//! `X' = X (A1 u1 + A2 u2)` on the nilpotent group `G4` with cost
//! `J = (1/2) int (c1 u1^2 + c2 u2^2) dt`.
//!
//! Extremal controls are `u_i = z_i / c_i`, with the costate obeying
//!
//! ```text
//! z1' = z2 z3 / c2,  z2' = -z1 z3 / c1,  z3' = -z1 z4 / c1,  z4' = 0.
//! ```
//!
//! With `k = z4` and `(y1, y2, y3) = (z3, z1, z2)` this is the top with
//! `b = (-k/c1, 1/c2, -1/c1)`. Only the forward problem is solved: given
//! `z(0)`, produce the extremal and its state trajectory.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{sample_times, solve_at, IntegratorSpec, OdeSystem, Sampling};
use crate::model::{Mat3, Params, State, Vec3};
use crate::pendulum::{make_context, verify_reduction, PendulumState, ReductionCheck};
use crate::stability::{nonlinear_classify, Equilibrium, EquilibriumReport, NonlinearVerdict};

/// Coordinates of a group element.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct G4State {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub x4: f64,
}

impl G4State {
    pub const fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        Self { x1, x2, x3, x4 }
    }

    /// The unipotent matrix
    /// `[[1, x2, x3, x4], [0, 1, x1, x1^2/2], [0, 0, 1, x1], [0, 0, 0, 1]]`.
    #[rustfmt::skip]
    pub fn embed(&self) -> Matrix4<f64> {
        Matrix4::new(
            1.0, self.x2, self.x3, self.x4,
            0.0, 1.0, self.x1, 0.5 * self.x1 * self.x1,
            0.0, 0.0, 1.0, self.x1,
            0.0, 0.0, 0.0, 1.0,
        )
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.x3, self.x4]
    }
}

impl From<[f64; 4]> for G4State {
    fn from(x: [f64; 4]) -> Self {
        Self::new(x[0], x[1], x[2], x[3])
    }
}

impl From<G4State> for [f64; 4] {
    fn from(x: G4State) -> Self {
        x.to_array()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Costate {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    pub z4: f64,
}

impl Costate {
    pub const fn new(z1: f64, z2: f64, z3: f64, z4: f64) -> Self {
        Self { z1, z2, z3, z4 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.z1, self.z2, self.z3, self.z4]
    }

    pub fn reduced(&self) -> Vec3 {
        [self.z1, self.z2, self.z3]
    }
}

impl From<[f64; 4]> for Costate {
    fn from(z: [f64; 4]) -> Self {
        Self::new(z[0], z[1], z[2], z[3])
    }
}

impl From<Costate> for [f64; 4] {
    fn from(z: Costate) -> Self {
        z.to_array()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlConfig {
    pub c1: f64,
    pub c2: f64,
    pub k: f64,
    pub t_f: f64,
}

impl ControlConfig {
    pub fn new(c1: f64, c2: f64, k: f64, t_f: f64) -> Result<Self> {
        let cfg = Self { c1, c2, k, t_f };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c1 > 0.0 && self.c2 > 0.0) || !self.c1.is_finite() || !self.c2.is_finite() {
            return Err(Error::InvalidInput(format!(
                "cost weights must be positive, got c1 = {}, c2 = {}",
                self.c1, self.c2
            )));
        }
        if !(self.t_f > 0.0 && self.t_f.is_finite()) {
            return Err(Error::InvalidInput(format!("t_f must be positive, got {}", self.t_f)));
        }
        if !self.k.is_finite() {
            return Err(Error::InvalidInput(format!("k must be finite, got {}", self.k)));
        }
        if self.k == 0.0 {
            // the reduced system leaves the top family
            return Err(Error::DegenerateParams(-self.k / self.c1, 1.0 / self.c2, -1.0 / self.c1));
        }
        Ok(())
    }
}

fn unit(i: usize, j: usize) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m[(i, j)] = 1.0;
    m
}

pub fn commutator(a: &Matrix4<f64>, b: &Matrix4<f64>) -> Matrix4<f64> {
    a * b - b * a
}

/// Basis `A1..A4` of the Lie algebra of `G4` with the residuals of its
/// defining brackets.
#[derive(Debug, Clone, PartialEq)]
pub struct LieBasis {
    pub a: [Matrix4<f64>; 4],
    /// `|[A2, A1] - A3|_max`.
    pub a3_residual: f64,
    /// `|[A3, A1] - A4|_max`.
    pub a4_residual: f64,
    /// `max_i |[A4, A_i]|_max`.
    pub center_residual: f64,
}

pub fn lie_basis() -> LieBasis {
    let a1 = unit(1, 2) + unit(2, 3);
    let a2 = unit(0, 1);
    let a3 = commutator(&a2, &a1);
    let a4 = commutator(&a3, &a1);
    let a = [a1, a2, a3, a4];
    let amax = |m: Matrix4<f64>| m.amax();
    LieBasis {
        a3_residual: amax(commutator(&a2, &a1) - a3),
        a4_residual: amax(commutator(&a3, &a1) - a4),
        center_residual: a.iter().map(|ai| amax(commutator(&a4, ai))).fold(0.0, f64::max),
        a,
    }
}

/// The full costate field, `z4` included.
pub fn costate_rhs(cfg: &ControlConfig, z: &Costate) -> [f64; 4] {
    [z.z2 * z.z3 / cfg.c2, -z.z1 * z.z3 / cfg.c1, -z.z1 * z.z4 / cfg.c1, 0.0]
}

/// Costate field with `z4` replaced by `cfg.k`.
pub fn reduced_costate_rhs(cfg: &ControlConfig, z: &Vec3) -> Vec3 {
    [z[1] * z[2] / cfg.c2, -z[0] * z[2] / cfg.c1, -cfg.k * z[0] / cfg.c1]
}

/// The relabeling `z1 = y2, z2 = y3, z3 = y1` between costate and top coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Relabeling;

impl Relabeling {
    pub fn z_to_y(&self, z: &Vec3) -> State {
        State::new(z[2], z[0], z[1])
    }

    pub fn y_to_z(&self, y: &State) -> Vec3 {
        [y.x2, y.x3, y.x1]
    }
}

/// Top parameters `b = (-k/c1, 1/c2, -1/c1)` of the reduced costate system.
pub fn to_mbtop(cfg: &ControlConfig) -> Result<(Params, Relabeling)> {
    let b = Params::new(-cfg.k / cfg.c1, 1.0 / cfg.c2, -1.0 / cfg.c1)?;
    Ok((b, Relabeling))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct G4Invariants {
    /// `-(k / 2 c1)(z1^2 + (c1/c2) z2^2)`.
    pub h: f64,
    /// `z2 - z3^2 / (2k)`.
    pub c: f64,
}

pub fn g4_invariants(cfg: &ControlConfig, z: &Costate) -> G4Invariants {
    G4Invariants {
        h: -cfg.k / (2.0 * cfg.c1) * (z.z1 * z.z1 + cfg.c1 / cfg.c2 * z.z2 * z.z2),
        c: z.z2 - z.z3 * z.z3 / (2.0 * cfg.k),
    }
}

pub fn g4_invariant_gradients(cfg: &ControlConfig, z: &Costate) -> (Vec3, Vec3) {
    ([-cfg.k / cfg.c1 * z.z1, -cfg.k / cfg.c2 * z.z2, 0.0], [0.0, 1.0, -z.z3 / cfg.k])
}

/// Poisson matrix of the reduced costate system in `z` coordinates.
pub fn g4_pi_matrix(cfg: &ControlConfig, z: &Costate) -> Mat3 {
    let s = z.z3 / cfg.k;
    [[0.0, -s, -1.0], [s, 0.0, 0.0], [1.0, 0.0, 0.0]]
}

pub fn optimal_controls(cfg: &ControlConfig, z: &Costate) -> (f64, f64) {
    (z.z1 / cfg.c1, z.z2 / cfg.c2)
}

/// Cost integrand `(c1 u1^2 + c2 u2^2) / 2` along the extremal.
pub fn running_cost(cfg: &ControlConfig, z: &Costate) -> f64 {
    let (u1, u2) = optimal_controls(cfg, z);
    0.5 * (cfg.c1 * u1 * u1 + cfg.c2 * u2 * u2)
}

/// Co-integrated extremal. State layout:
/// `[z1, z2, z3, z4, x1, x2, x3, x4, w, cost]` where `w` is the matrix
/// entry `(2,4)` integrated from `w' = u1 x1`.
#[derive(Debug, Clone, Copy)]
pub struct ExtremalSystem {
    pub cfg: ControlConfig,
}

impl OdeSystem<10> for ExtremalSystem {
    fn rhs(&self, y: &[f64; 10]) -> [f64; 10] {
        let z = Costate::new(y[0], y[1], y[2], y[3]);
        let dz = costate_rhs(&self.cfg, &z);
        let (u1, u2) = optimal_controls(&self.cfg, &z);
        [dz[0], dz[1], dz[2], dz[3], u1, u2, u1 * y[5], u1 * y[6], u1 * y[4], running_cost(&self.cfg, &z)]
    }
}

/// Right-hand side `X (A1 u1 + A2 u2)` of the matrix equation.
pub fn left_invariant_rhs(x: &G4State, u1: f64, u2: f64) -> Matrix4<f64> {
    let basis = lie_basis();
    x.embed() * (basis.a[0] * u1 + basis.a[1] * u2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reconstruction {
    pub times: Vec<f64>,
    pub g4: Vec<G4State>,
    pub costate: Vec<Costate>,
    pub controls: Vec<(f64, f64)>,
    /// `J` accumulated up to each output time.
    pub cost_series: Vec<f64>,
    pub cost: f64,
    /// Max over interior output times of `|X' - X (A1 u1 + A2 u2)|_max`,
    /// with `X'` from the five-point central difference of step
    /// `1e-4 t_end` on dense output.
    pub residual: f64,
    /// Max of `|w - x1^2 / 2|` where `w` is the integrated entry `(2,4)`.
    pub unipotent_residual: f64,
    pub z4_drift: f64,
    pub h_drift: f64,
    pub c_drift: f64,
}

const DEFAULT_INTERVALS: usize = 200;

pub fn reconstruct(
    cfg: &ControlConfig,
    x0: &G4State,
    z0: &Costate,
    t_end: f64,
    spec: &IntegratorSpec,
) -> Result<Reconstruction> {
    cfg.validate()?;
    if (cfg.k - z0.z4).abs() > 1e-12 {
        return Err(Error::ConflictingMomentum { config_k: cfg.k, z4: z0.z4 });
    }
    if t_end.is_nan() || t_end <= 0.0 || t_end > cfg.t_f {
        return Err(Error::InvalidInput(format!("t_end must lie in (0, t_f = {}], got {t_end}", cfg.t_f)));
    }
    let base = match spec.sampling {
        Sampling::Every(dt) => sample_times(t_end, dt),
        Sampling::Steps => sample_times(t_end, t_end / DEFAULT_INTERVALS as f64),
    };
    let delta = 1e-4 * t_end;
    let mut grid: Vec<f64> = base
        .iter()
        .flat_map(|&t| [t - 2.0 * delta, t - delta, t, t + delta, t + 2.0 * delta])
        .filter(|t| *t >= 0.0 && *t <= t_end)
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let y0 = [z0.z1, z0.z2, z0.z3, z0.z4, x0.x1, x0.x2, x0.x3, x0.x4, 0.5 * x0.x1 * x0.x1, 0.0];
    let sol = solve_at(&ExtremalSystem { cfg: *cfg }, y0, &grid, spec)?;
    let lookup =
        |t: f64| -> Option<&[f64; 10]> { sol.times.binary_search_by(|s| s.total_cmp(&t)).ok().map(|i| &sol.states[i]) };
    let g4_of = |y: &[f64; 10]| G4State::new(y[4], y[5], y[6], y[7]);
    let costate_of = |y: &[f64; 10]| Costate::new(y[0], y[1], y[2], y[3]);

    let inv0 = g4_invariants(cfg, z0);
    let mut out = Reconstruction {
        times: Vec::with_capacity(base.len()),
        g4: Vec::with_capacity(base.len()),
        costate: Vec::with_capacity(base.len()),
        controls: Vec::with_capacity(base.len()),
        cost_series: Vec::with_capacity(base.len()),
        cost: 0.0,
        residual: 0.0,
        unipotent_residual: 0.0,
        z4_drift: 0.0,
        h_drift: 0.0,
        c_drift: 0.0,
    };
    for &t in &base {
        let y = lookup(t).expect("base times are on the grid");
        let (x, z) = (g4_of(y), costate_of(y));
        let (u1, u2) = optimal_controls(cfg, &z);
        let inv = g4_invariants(cfg, &z);
        out.unipotent_residual = out.unipotent_residual.max((y[8] - 0.5 * x.x1 * x.x1).abs());
        out.z4_drift = out.z4_drift.max((z.z4 - z0.z4).abs());
        out.h_drift = out.h_drift.max((inv.h - inv0.h).abs());
        out.c_drift = out.c_drift.max((inv.c - inv0.c).abs());
        let stencil = [-2.0, -1.0, 1.0, 2.0].map(|j| lookup(t + j * delta).map(|y| g4_of(y).embed()));
        if let [Some(m2), Some(m1), Some(p1), Some(p2)] = stencil {
            let xdot = (m2 - p2 + (p1 - m1) * 8.0) / (12.0 * delta);
            let r = (xdot - left_invariant_rhs(&x, u1, u2)).amax();
            out.residual = out.residual.max(r);
        }
        out.times.push(t);
        out.g4.push(x);
        out.costate.push(z);
        out.controls.push((u1, u2));
        out.cost_series.push(y[9]);
    }
    out.cost = *out.cost_series.last().expect("nonempty grid");
    Ok(out)
}

/// Costate from pendulum variables via the closed form
/// `z1 = sqrt(2H) cos(theta)`, `z2 = sqrt(c2/c1) sqrt(2H) sin(theta)`,
/// `z3 = -sqrt(c1 c2) theta'` on the level `z1^2 + (c1/c2) z2^2 = 2H`.
pub fn costate_from_pendulum(cfg: &ControlConfig, p: &PendulumState) -> Vec3 {
    let r = (2.0 * p.h).sqrt();
    [r * p.theta.cos(), (cfg.c2 / cfg.c1).sqrt() * r * p.theta.sin(), -(cfg.c1 * cfg.c2).sqrt() * p.theta_dot]
}

/// Pendulum acceleration `(k / c1^2) sqrt(c1/c2) sqrt(2H) cos(theta)` of
/// the reduced costate system.
pub fn costate_pendulum_accel(cfg: &ControlConfig, h: f64, theta: f64) -> f64 {
    cfg.k / (cfg.c1 * cfg.c1) * (cfg.c1 / cfg.c2).sqrt() * (2.0 * h).sqrt() * theta.cos()
}

/// Two-route check of the costate dynamics: direct integration of the top
/// image against the pendulum route.
pub fn pendulum_route(cfg: &ControlConfig, z0: &Costate, t_end: f64, spec: &IntegratorSpec) -> Result<ReductionCheck> {
    let (b, relabel) = to_mbtop(cfg)?;
    let ctx = make_context(&b)?;
    verify_reduction(&ctx, &relabel.z_to_y(&z0.reduced()), t_end, spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CostateEquilibrium {
    /// `(0, 0, 0)`.
    Origin,
    /// `(0, m, 0)`.
    E2,
    /// `(0, 0, m)`.
    E3,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct G4EquilibriumReport {
    pub equilibrium: CostateEquilibrium,
    pub m: f64,
    pub costate_point: Vec3,
    /// Classification of the image under the relabeling.
    pub top_report: EquilibriumReport,
}

/// Classifies `(0,0,0)`, `(0,m,0)` and `(0,0,m)` for every `m` in `ms` by
/// relabeling them as equilibria of the top.
pub fn classify_g4_equilibria(cfg: &ControlConfig, ms: &[f64]) -> Result<Vec<G4EquilibriumReport>> {
    cfg.validate()?;
    let (b, relabel) = to_mbtop(cfg)?;
    let report = |equilibrium, m: f64, point: Vec3| -> Result<G4EquilibriumReport> {
        let y = relabel.z_to_y(&point);
        let top = match equilibrium {
            CostateEquilibrium::Origin => Equilibrium::ORIGIN,
            // (0, m, 0) in z is (0, 0, m) in y
            CostateEquilibrium::E2 => Equilibrium::e3(y.x3)?,
            // (0, 0, m) in z is (m, 0, 0) in y
            CostateEquilibrium::E3 => Equilibrium::e1(y.x1)?,
        };
        Ok(G4EquilibriumReport { equilibrium, m, costate_point: point, top_report: nonlinear_classify(&b, &top) })
    };
    let mut out = vec![report(CostateEquilibrium::Origin, 0.0, [0.0; 3])?];
    for &m in ms {
        out.push(report(CostateEquilibrium::E2, m, [0.0, m, 0.0])?);
        out.push(report(CostateEquilibrium::E3, m, [0.0, 0.0, m])?);
    }
    Ok(out)
}

/// Direct sign rule for `(0, m, 0)`: stable iff `k m > 0`.
pub fn e2_sign_rule(cfg: &ControlConfig, m: f64) -> NonlinearVerdict {
    if cfg.k * m > 0.0 {
        NonlinearVerdict::Stable
    } else {
        NonlinearVerdict::Unstable
    }
}
