//! Dense trivariate polynomials with a bounded total degree.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::model::{DiagQuadratic, State};

/// Polynomial in `x1, x2, x3` stored densely over exponent triples
/// `(i, j, k)` with `i + j + k <= max_degree`.
#[derive(Clone, PartialEq)]
pub struct Poly3 {
    max_degree: u32,
    // cube layout (d+1)^3; entries with i+j+k > d stay zero
    coeffs: Vec<f64>,
}

impl Poly3 {
    pub const DEFAULT_MAX_DEGREE: u32 = 8;

    pub fn zero() -> Self {
        Self::zero_with_degree(Self::DEFAULT_MAX_DEGREE)
    }

    pub fn zero_with_degree(max_degree: u32) -> Self {
        let side = (max_degree + 1) as usize;
        Self { max_degree, coeffs: vec![0.0; side * side * side] }
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial([0, 0, 0], c)
    }

    /// The coordinate function `x_{index+1}` (`index` in `0..3`).
    pub fn var(index: usize) -> Self {
        let mut e = [0; 3];
        e[index] = 1;
        Self::monomial(e, 1.0)
    }

    pub fn monomial(exponents: [u32; 3], coeff: f64) -> Self {
        let mut p = Self::zero();
        p.set(exponents, coeff).expect("monomial within the default degree budget");
        p
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    fn side(&self) -> usize {
        (self.max_degree + 1) as usize
    }

    fn index(&self, [i, j, k]: [u32; 3]) -> usize {
        let s = self.side();
        (i as usize * s + j as usize) * s + k as usize
    }

    pub fn coeff(&self, e: [u32; 3]) -> f64 {
        if e.iter().sum::<u32>() > self.max_degree {
            0.0
        } else {
            self.coeffs[self.index(e)]
        }
    }

    pub fn set(&mut self, e: [u32; 3], value: f64) -> Result<()> {
        let degree = e.iter().sum::<u32>();
        if degree > self.max_degree {
            return Err(Error::DegreeOverflow { degree, max: self.max_degree });
        }
        let idx = self.index(e);
        self.coeffs[idx] = value;
        Ok(())
    }

    /// Nonzero terms as `(exponents, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = ([u32; 3], f64)> + '_ {
        let s = self.side();
        self.coeffs.iter().enumerate().filter(|(_, c)| **c != 0.0).map(move |(idx, c)| {
            let k = idx % s;
            let j = (idx / s) % s;
            let i = idx / (s * s);
            ([i as u32, j as u32, k as u32], *c)
        })
    }

    /// Total degree of the highest nonzero term (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms().map(|(e, _)| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: &State) -> f64 {
        let x = x.to_array();
        self.terms().map(|(e, c)| c * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32)).sum()
    }

    pub fn derivative(&self, var: usize) -> Poly3 {
        let mut out = Poly3::zero_with_degree(self.max_degree);
        for (mut e, c) in self.terms() {
            if e[var] == 0 {
                continue;
            }
            let factor = e[var] as f64;
            e[var] -= 1;
            let idx = out.index(e);
            out.coeffs[idx] += factor * c;
        }
        out
    }

    pub fn gradient(&self) -> [Poly3; 3] {
        std::array::from_fn(|v| self.derivative(v))
    }

    /// Product, failing when the result would exceed the degree budget.
    pub fn try_mul(&self, other: &Poly3) -> Result<Poly3> {
        let max = self.max_degree.max(other.max_degree);
        let degree = if self.is_zero() || other.is_zero() { 0 } else { self.degree() + other.degree() };
        if degree > max {
            return Err(Error::DegreeOverflow { degree, max });
        }
        let mut out = Poly3::zero_with_degree(max);
        let rhs: Vec<_> = other.terms().collect();
        for (ea, ca) in self.terms() {
            for (eb, cb) in &rhs {
                let idx = out.index([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]]);
                out.coeffs[idx] += ca * cb;
            }
        }
        Ok(out)
    }

    fn with_degree(&self, max_degree: u32) -> Poly3 {
        if max_degree == self.max_degree {
            return self.clone();
        }
        let mut out = Poly3::zero_with_degree(max_degree);
        for (e, c) in self.terms() {
            out.set(e, c).expect("widening keeps every term");
        }
        out
    }

    fn zip_with(&self, other: &Poly3, f: impl Fn(f64, f64) -> f64) -> Poly3 {
        let max = self.max_degree.max(other.max_degree);
        let (a, b) = (self.with_degree(max), other.with_degree(max));
        Poly3 { max_degree: max, coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| f(*x, *y)).collect() }
    }

    pub fn scale(&self, s: f64) -> Poly3 {
        Poly3 { max_degree: self.max_degree, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }
}

impl Default for Poly3 {
    fn default() -> Self {
        Poly3::zero()
    }
}

impl fmt::Debug for Poly3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (v, p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "*x{}", v + 1)?,
                    _ => write!(f, "*x{}^{}", v + 1, p)?,
                }
            }
        }
        Ok(())
    }
}

impl From<&DiagQuadratic> for Poly3 {
    fn from(q: &DiagQuadratic) -> Self {
        let mut p = Poly3::constant(q.constant);
        for v in 0..3 {
            let mut e = [0; 3];
            e[v] = 1;
            p = p + Poly3::monomial(e, q.linear[v]);
            e[v] = 2;
            p = p + Poly3::monomial(e, q.square[v]);
        }
        p
    }
}

impl From<DiagQuadratic> for Poly3 {
    fn from(q: DiagQuadratic) -> Self {
        Poly3::from(&q)
    }
}

impl Add for &Poly3 {
    type Output = Poly3;

    fn add(self, rhs: &Poly3) -> Poly3 {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Add for Poly3 {
    type Output = Poly3;

    fn add(self, rhs: Poly3) -> Poly3 {
        &self + &rhs
    }
}

impl Sub for &Poly3 {
    type Output = Poly3;

    fn sub(self, rhs: &Poly3) -> Poly3 {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Sub for Poly3 {
    type Output = Poly3;

    fn sub(self, rhs: Poly3) -> Poly3 {
        &self - &rhs
    }
}

impl Neg for Poly3 {
    type Output = Poly3;

    fn neg(self) -> Poly3 {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Poly3 {
    type Output = Poly3;

    fn mul(self, s: f64) -> Poly3 {
        self.scale(s)
    }
}
