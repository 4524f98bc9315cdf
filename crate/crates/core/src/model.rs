//! The Maxwell-Bloch top family `x' = (b1 x2, b2 x1 x3, b3 x1 x2)`, its
//! first integrals and the SL(2,R) family of Hamilton-Poisson realizations.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

/// Parameter triple `b = (b1, b2, b3)` with `b1 b2 b3 != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Params {
    b1: f64,
    b2: f64,
    b3: f64,
}

impl Params {
    pub fn new(b1: f64, b2: f64, b3: f64) -> Result<Self> {
        if !(b1.is_finite() && b2.is_finite() && b3.is_finite()) {
            return Err(Error::InvalidInput(format!("parameters must be finite, got ({b1}, {b2}, {b3})")));
        }
        if b1 == 0.0 || b2 == 0.0 || b3 == 0.0 {
            return Err(Error::DegenerateParams(b1, b2, b3));
        }
        Ok(Self { b1, b2, b3 })
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn b3(&self) -> f64 {
        self.b3
    }

    pub fn as_array(&self) -> Vec3 {
        [self.b1, self.b2, self.b3]
    }

    /// True when some component is nonzero but small enough to make the
    /// ratios `b2/b3`, `b3/b1` ill-conditioned.
    pub fn is_ill_conditioned(&self) -> bool {
        self.as_array().iter().any(|b| b.abs() < 1e-9)
    }
}

impl TryFrom<[f64; 3]> for Params {
    type Error = Error;

    fn try_from(b: [f64; 3]) -> Result<Self> {
        Params::new(b[0], b[1], b[2])
    }
}

impl From<Params> for [f64; 3] {
    fn from(p: Params) -> Self {
        p.as_array()
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b = ({}, {}, {})", self.b1, self.b2, self.b3)
    }
}

/// Named members of the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Real-valued Maxwell-Bloch equations, `b = (1, 1, -1)`.
    MaxwellBloch,
    /// Lorenz-Hamilton system, `b = (1/2, -1, 1)`.
    LorenzHamilton,
}

impl Preset {
    pub fn params(self) -> Params {
        match self {
            Preset::MaxwellBloch => Params { b1: 1.0, b2: 1.0, b3: -1.0 },
            Preset::LorenzHamilton => Params { b1: 0.5, b2: -1.0, b3: 1.0 },
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().replace('_', "-").as_str() {
            "maxwell-bloch" => Ok(Preset::MaxwellBloch),
            "lorenz-hamilton" => Ok(Preset::LorenzHamilton),
            _ => Err(Error::UnknownPreset(name.to_string())),
        }
    }
}

/// Looks up a preset by name (`maxwell_bloch`, `lorenz-hamilton`, ...).
pub fn preset(name: &str) -> Result<Params> {
    name.parse::<Preset>().map(Preset::params)
}

/// A point of the phase space `R^3`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct State {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl State {
    pub const ORIGIN: State = State { x1: 0.0, x2: 0.0, x3: 0.0 };

    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    /// Like [`State::new`] but rejects non-finite components.
    pub fn checked(x1: f64, x2: f64, x3: f64) -> Result<Self> {
        if x1.is_finite() && x2.is_finite() && x3.is_finite() {
            Ok(Self { x1, x2, x3 })
        } else {
            Err(Error::InvalidInput(format!("state components must be finite, got ({x1}, {x2}, {x3})")))
        }
    }

    pub fn to_array(self) -> Vec3 {
        [self.x1, self.x2, self.x3]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &State) -> f64 {
        (self.x1 - other.x1).abs().max((self.x2 - other.x2).abs()).max((self.x3 - other.x3).abs())
    }
}

impl From<[f64; 3]> for State {
    fn from(x: [f64; 3]) -> Self {
        State::new(x[0], x[1], x[2])
    }
}

impl From<State> for [f64; 3] {
    fn from(x: State) -> Self {
        x.to_array()
    }
}

/// Quadratic function with diagonal Hessian:
/// `q(x) = sum_i square[i] x_i^2 + sum_i linear[i] x_i + constant`.
///
/// Every Hamiltonian and Casimir of the family has this shape, so gradients
/// and Hessians are available in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DiagQuadratic {
    pub square: Vec3,
    pub linear: Vec3,
    pub constant: f64,
}

impl DiagQuadratic {
    pub fn eval(&self, x: &State) -> f64 {
        let x = x.to_array();
        (0..3).map(|i| self.square[i] * x[i] * x[i] + self.linear[i] * x[i]).sum::<f64>() + self.constant
    }

    pub fn gradient(&self, x: &State) -> Vec3 {
        let x = x.to_array();
        std::array::from_fn(|i| 2.0 * self.square[i] * x[i] + self.linear[i])
    }

    /// Diagonal of the (constant) Hessian.
    pub fn hessian_diag(&self) -> Vec3 {
        self.square.map(|s| 2.0 * s)
    }
}

impl Add for DiagQuadratic {
    type Output = DiagQuadratic;

    fn add(self, rhs: DiagQuadratic) -> DiagQuadratic {
        DiagQuadratic {
            square: std::array::from_fn(|i| self.square[i] + rhs.square[i]),
            linear: std::array::from_fn(|i| self.linear[i] + rhs.linear[i]),
            constant: self.constant + rhs.constant,
        }
    }
}

impl Sub for DiagQuadratic {
    type Output = DiagQuadratic;

    fn sub(self, rhs: DiagQuadratic) -> DiagQuadratic {
        self + (-rhs)
    }
}

impl Neg for DiagQuadratic {
    type Output = DiagQuadratic;

    fn neg(self) -> DiagQuadratic {
        self * -1.0
    }
}

impl Mul<f64> for DiagQuadratic {
    type Output = DiagQuadratic;

    fn mul(self, s: f64) -> DiagQuadratic {
        DiagQuadratic {
            square: self.square.map(|v| v * s),
            linear: self.linear.map(|v| v * s),
            constant: self.constant * s,
        }
    }
}

pub fn vector_field(b: &Params, x: &State) -> Vec3 {
    [b.b1 * x.x2, b.b2 * x.x1 * x.x3, b.b3 * x.x1 * x.x2]
}

/// `H = (b1/2)(x2^2 - (b2/b3) x3^2)`.
pub fn hamiltonian(b: &Params) -> DiagQuadratic {
    reduced_hamiltonian(b) * b.b1
}

/// `H0 = (1/2)(x2^2 - (b2/b3) x3^2)`, so that `H = b1 H0`.
pub fn reduced_hamiltonian(b: &Params) -> DiagQuadratic {
    DiagQuadratic { square: [0.0, 0.5, -0.5 * b.b2 / b.b3], ..Default::default() }
}

/// `C = -(b3 / (2 b1)) x1^2 + x3`.
pub fn casimir(b: &Params) -> DiagQuadratic {
    DiagQuadratic { square: [-0.5 * b.b3 / b.b1, 0.0, 0.0], linear: [0.0, 0.0, 1.0], constant: 0.0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstIntegrals {
    pub h: f64,
    pub c: f64,
    pub h0: f64,
}

pub fn first_integrals(b: &Params, x: &State) -> FirstIntegrals {
    FirstIntegrals { h: hamiltonian(b).eval(x), c: casimir(b).eval(x), h0: reduced_hamiltonian(b).eval(x) }
}

/// SL(2,R) coefficients selecting `C_ab = alpha C + beta H` and
/// `H_gd = gamma C + delta H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Realization {
    pub const DETERMINANT_TOL: f64 = 1e-12;
    pub const BASE: Realization = Realization { alpha: 1.0, beta: 0.0, gamma: 0.0, delta: 1.0 };
    pub const BAR: Realization = Realization { alpha: 0.0, beta: -1.0, gamma: 1.0, delta: 0.0 };

    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let r = Self { alpha, beta, gamma, delta };
        r.validate()?;
        Ok(r)
    }

    pub fn determinant(&self) -> f64 {
        self.alpha * self.delta - self.beta * self.gamma
    }

    pub fn validate(&self) -> Result<()> {
        let det = self.determinant();
        if (det - 1.0).abs() <= Self::DETERMINANT_TOL {
            Ok(())
        } else {
            Err(Error::NotUnimodular(det))
        }
    }
}

/// Poisson matrix, Hamiltonian and Casimir of one realization of the system.
///
/// The Poisson matrix is `P_ab(x) v = v x grad C_ab(x)`; its entries are
/// affine in `x` and recomputed on demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationBundle {
    pub params: Params,
    /// Coefficients of the bracket `{.,.}_ab`.
    pub alpha: f64,
    pub beta: f64,
    pub hamiltonian: DiagQuadratic,
    pub casimir: DiagQuadratic,
    pub label: String,
}

impl RealizationBundle {
    pub fn poisson_matrix(&self, x: &State) -> Mat3 {
        let b = &self.params;
        let (a, be) = (self.alpha, self.beta);
        let p12 = a - be * b.b1 * b.b2 / b.b3 * x.x3;
        let p13 = -be * b.b1 * x.x2;
        let p23 = -a * b.b3 / b.b1 * x.x1;
        [[0.0, p12, p13], [-p12, 0.0, p23], [-p13, -p23, 0.0]]
    }

    pub fn hamiltonian_at(&self, x: &State) -> f64 {
        self.hamiltonian.eval(x)
    }

    pub fn casimir_at(&self, x: &State) -> f64 {
        self.casimir.eval(x)
    }

    /// The induced vector field `P(x) grad H(x)`.
    pub fn hamiltonian_vector_field(&self, x: &State) -> Vec3 {
        mat_vec(&self.poisson_matrix(x), &self.hamiltonian.gradient(x))
    }
}

pub fn realization(b: &Params, r: &Realization) -> Result<RealizationBundle> {
    r.validate()?;
    let (h, c) = (hamiltonian(b), casimir(b));
    Ok(RealizationBundle {
        params: *b,
        alpha: r.alpha,
        beta: r.beta,
        hamiltonian: c * r.gamma + h * r.delta,
        casimir: c * r.alpha + h * r.beta,
        label: format!("sl2(alpha={}, beta={}, gamma={}, delta={})", r.alpha, r.beta, r.gamma, r.delta),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedRealization {
    /// `(P, H, C)`.
    Base,
    /// `(P_bar, H_bar, C_bar)` with `H_bar = C` and `C_bar = H`.
    Bar,
}

pub fn named_realization(b: &Params, which: NamedRealization) -> RealizationBundle {
    match which {
        NamedRealization::Base => {
            let mut bundle = realization(b, &Realization::BASE).expect("identity is unimodular");
            bundle.label = "base".into();
            bundle
        }
        NamedRealization::Bar => {
            let mut bundle = realization(b, &Realization::BAR).expect("BAR is unimodular");
            // printed sign convention: C_bar = -C_{0,-1} = H
            bundle.casimir = -bundle.casimir;
            bundle.label = "bar".into();
            bundle
        }
    }
}

pub fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    std::array::from_fn(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
