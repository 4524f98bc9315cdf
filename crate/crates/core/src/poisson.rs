//! Verification of the Poisson-structure axioms in exact polynomial
//! arithmetic, plus a sampled check of the Hamiltonian form `x' = P grad H`.
//!
//! All Poisson matrices of the family have entries affine in `x`, so probe
//! functions of degree at most two already decide the Jacobi identity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::model::{
    casimir, hamiltonian, named_realization, realization, vector_field, NamedRealization, Params, Realization,
    RealizationBundle, State,
};
use crate::poly::Poly3;

/// Skew-symmetric 3x3 matrix of polynomials. Only the upper triangle is
/// stored; the lower one is its negation by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyPoissonMatrix {
    upper: [Poly3; 3], // (1,2), (1,3), (2,3)
}

fn upper_slot(i: usize, j: usize) -> Option<(usize, bool)> {
    match (i, j) {
        (0, 1) => Some((0, false)),
        (0, 2) => Some((1, false)),
        (1, 2) => Some((2, false)),
        (1, 0) => Some((0, true)),
        (2, 0) => Some((1, true)),
        (2, 1) => Some((2, true)),
        _ => None,
    }
}

impl PolyPoissonMatrix {
    pub fn from_upper(p12: Poly3, p13: Poly3, p23: Poly3) -> Self {
        Self { upper: [p12, p13, p23] }
    }

    /// Matrix of the bracket `{f, g} = grad G . (grad f x grad g)`.
    pub fn from_generator(generator: &Poly3) -> Self {
        let [g1, g2, g3] = generator.gradient();
        Self::from_upper(g3, -g2, g1)
    }

    /// Polynomial form of a realization's Poisson matrix, built from its
    /// bracket generator `alpha C + beta H`.
    pub fn from_bundle(bundle: &RealizationBundle) -> Self {
        let b = &bundle.params;
        let generator = casimir(b) * bundle.alpha + hamiltonian(b) * bundle.beta;
        Self::from_generator(&Poly3::from(generator))
    }

    /// Replaces entry `(i, j)` (and `(j, i)` by skew-symmetry).
    pub fn with_entry(mut self, i: usize, j: usize, value: Poly3) -> Self {
        let (slot, negate) = upper_slot(i, j).expect("off-diagonal entry");
        self.upper[slot] = if negate { -value } else { value };
        self
    }

    pub fn entry(&self, i: usize, j: usize) -> Poly3 {
        match upper_slot(i, j) {
            None => Poly3::zero(),
            Some((slot, false)) => self.upper[slot].clone(),
            Some((slot, true)) => -self.upper[slot].clone(),
        }
    }

    pub fn eval(&self, x: &State) -> [[f64; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.entry(i, j).eval(x)))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.upper.iter().map(Poly3::max_abs_coeff).fold(0.0, f64::max)
    }
}

/// `{f, g} = sum_ij (df/dx_i) P_ij (dg/dx_j)`.
#[allow(clippy::needless_range_loop)]
pub fn bracket(p: &PolyPoissonMatrix, f: &Poly3, g: &Poly3) -> Result<Poly3> {
    let df = f.gradient();
    let dg = g.gradient();
    let mut out = Poly3::zero();
    for i in 0..3 {
        if df[i].is_zero() {
            continue;
        }
        for j in 0..3 {
            if i == j || dg[j].is_zero() {
                continue;
            }
            let pij = p.entry(i, j);
            if pij.is_zero() {
                continue;
            }
            out = out + df[i].try_mul(&pij)?.try_mul(&dg[j])?;
        }
    }
    Ok(out)
}

fn unit_floor(v: f64) -> f64 {
    v.max(1.0)
}

/// Largest coefficient of the Jacobiator `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}`,
/// divided by `max(1,|P|)^2 max(1,|f|) max(1,|g|) max(1,|h|)` where `|.|` is
/// the largest input coefficient.
pub fn jacobi_residual(p: &PolyPoissonMatrix, f: &Poly3, g: &Poly3, h: &Poly3) -> Result<f64> {
    let jacobiator =
        bracket(p, f, &bracket(p, g, h)?)? + bracket(p, g, &bracket(p, h, f)?)? + bracket(p, h, &bracket(p, f, g)?)?;
    let scale = unit_floor(p.max_abs_coeff()).powi(2)
        * unit_floor(f.max_abs_coeff())
        * unit_floor(g.max_abs_coeff())
        * unit_floor(h.max_abs_coeff());
    Ok(jacobiator.max_abs_coeff() / scale)
}

/// Largest coefficient of `{C, f}` over the probes, normalized by
/// `max(1,|P|) max(1,|C|) max(1,|f|)`.
pub fn casimir_residual(p: &PolyPoissonMatrix, c: &Poly3, probes: &[Poly3]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for f in probes {
        let scale = unit_floor(p.max_abs_coeff()) * unit_floor(c.max_abs_coeff()) * unit_floor(f.max_abs_coeff());
        worst = worst.max(bracket(p, c, f)?.max_abs_coeff() / scale);
    }
    Ok(worst)
}

/// `x1, x2, x3`.
pub fn coordinate_probes() -> Vec<Poly3> {
    (0..3).map(Poly3::var).collect()
}

/// The fixed Jacobi probe basis `{x1, x2, x3, x1^2, x2 x3}`.
pub fn jacobi_probe_basis() -> Vec<Poly3> {
    vec![Poly3::var(0), Poly3::var(1), Poly3::var(2), Poly3::monomial([2, 0, 0], 1.0), Poly3::monomial([0, 1, 1], 1.0)]
}

/// Worst Jacobi residual over all triples drawn from `probes`.
pub fn jacobi_residual_over(p: &PolyPoissonMatrix, probes: &[Poly3]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (a, f) in probes.iter().enumerate() {
        for (b, g) in probes.iter().enumerate().skip(a + 1) {
            for h in probes.iter().skip(b + 1) {
                worst = worst.max(jacobi_residual(p, f, g, h)?);
            }
        }
    }
    Ok(worst)
}

/// Max over seeded sample points `x` in `[-5, 5]^3` of
/// `|f(x) - P(x) grad H(x)|_inf / max(1, S(x))`, where
/// `S_i(x) = sum_j |P_ij(x)| |dH/dx_j(x)|` is the magnitude of the terms
/// that cancel in the product.
pub fn hamiltonian_form_residual(b: &Params, bundle: &RealizationBundle, samples: usize, rng_seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples.max(1) {
        let x = State::new(rng.random_range(-5.0..=5.0), rng.random_range(-5.0..=5.0), rng.random_range(-5.0..=5.0));
        worst = worst.max(hamiltonian_form_residual_at(b, bundle, &x));
    }
    worst
}

pub fn hamiltonian_form_residual_at(b: &Params, bundle: &RealizationBundle, x: &State) -> f64 {
    let p = bundle.poisson_matrix(x);
    let grad = bundle.hamiltonian.gradient(x);
    let f = vector_field(b, x);
    (0..3)
        .map(|i| {
            let terms = (0..3).map(|j| p[i][j] * grad[j]);
            let value: f64 = terms.clone().sum();
            let magnitude: f64 = terms.map(f64::abs).sum();
            (f[i] - value).abs() / magnitude.max(1.0)
        })
        .fold(0.0, f64::max)
}

/// Draws a unimodular `(alpha, beta, gamma, delta)` with `alpha, beta, gamma`
/// in `[-2, 2]`, `|alpha| >= 0.5`, and `delta = (1 + beta gamma) / alpha`.
pub fn random_unimodular<R: Rng>(rng: &mut R) -> Realization {
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let alpha = sign * rng.random_range(0.5..=2.0);
    let beta = rng.random_range(-2.0..=2.0);
    let gamma = rng.random_range(-2.0..=2.0);
    let delta = (1.0 + beta * gamma) / alpha;
    Realization { alpha, beta, gamma, delta }
}

/// One checked axiom in a [`StructureReport`].
#[derive(Debug, Clone, Serialize)]
pub struct AxiomCheck {
    pub realization: String,
    pub axiom: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub params: Params,
    pub checks: Vec<AxiomCheck>,
    pub all_pass: bool,
}

/// Runs every structure check on the base, bar and `n_random` random SL(2,R)
/// realizations of `b`.
pub fn verify_structure(b: &Params, n_random: usize, samples: usize, seed: u64) -> Result<StructureReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bundles = vec![named_realization(b, NamedRealization::Base), named_realization(b, NamedRealization::Bar)];
    for _ in 0..n_random {
        bundles.push(realization(b, &random_unimodular(&mut rng))?);
    }

    let mut checks = Vec::new();
    let mut push = |label: &str, axiom: &str, residual: f64, tolerance: f64| {
        checks.push(AxiomCheck {
            realization: label.to_string(),
            axiom: axiom.to_string(),
            residual,
            tolerance,
            pass: residual <= tolerance,
        });
    };

    let probes = jacobi_probe_basis();
    for (n, bundle) in bundles.iter().enumerate() {
        let pm = PolyPoissonMatrix::from_bundle(bundle);
        let skew = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| (&pm.entry(i, j) + &pm.entry(j, i)).max_abs_coeff())
            .fold(0.0, f64::max);
        push(&bundle.label, "skew-symmetry", skew, 0.0);
        push(&bundle.label, "jacobi", jacobi_residual_over(&pm, &probes)?, 1e-10);
        push(&bundle.label, "casimir", casimir_residual(&pm, &Poly3::from(&bundle.casimir), &probes)?, 1e-12);
        push(
            &bundle.label,
            "hamiltonian-form",
            hamiltonian_form_residual(b, bundle, samples, seed.wrapping_add(n as u64)),
            1e-12,
        );
    }
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(StructureReport { params: *b, checks, all_pass })
}
