//! Equilibria of the top, their linearizations and eigenvalues, and the
//! spectral and nonlinear stability verdicts together with the certificate
//! each verdict rests on. Perturbation probes give an empirical cross-check.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{solve_until, IntegratorSpec, TopSystem};
use crate::model::{casimir, hamiltonian, reduced_hamiltonian, DiagQuadratic, Mat3, Params, State};
use crate::poly::Poly3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumFamily {
    /// `(0, 0, 0)`.
    Origin,
    /// `(m, 0, 0)`.
    E1,
    /// `(0, 0, m)`.
    E3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub family: EquilibriumFamily,
    pub m: f64,
}

impl Equilibrium {
    pub const ORIGIN: Equilibrium = Equilibrium { family: EquilibriumFamily::Origin, m: 0.0 };

    pub fn new(family: EquilibriumFamily, m: f64) -> Result<Self> {
        match family {
            EquilibriumFamily::Origin => Ok(Self::ORIGIN),
            _ if m == 0.0 || !m.is_finite() => {
                Err(Error::InvalidInput(format!("family {family:?} needs a finite nonzero m, got {m}")))
            }
            _ => Ok(Self { family, m }),
        }
    }

    pub fn e1(m: f64) -> Result<Self> {
        Self::new(EquilibriumFamily::E1, m)
    }

    pub fn e3(m: f64) -> Result<Self> {
        Self::new(EquilibriumFamily::E3, m)
    }

    pub fn point(&self) -> State {
        match self.family {
            EquilibriumFamily::Origin => State::ORIGIN,
            EquilibriumFamily::E1 => State::new(self.m, 0.0, 0.0),
            EquilibriumFamily::E3 => State::new(0.0, 0.0, self.m),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyDescription {
    pub family: EquilibriumFamily,
    pub points: &'static str,
}

/// The equilibrium set is the same for every `b`: the origin and the two
/// punctured coordinate axes `x1` and `x3`.
pub fn equilibria(_b: &Params) -> [FamilyDescription; 3] {
    [
        FamilyDescription { family: EquilibriumFamily::Origin, points: "(0, 0, 0)" },
        FamilyDescription { family: EquilibriumFamily::E1, points: "(m, 0, 0), m != 0" },
        FamilyDescription { family: EquilibriumFamily::E3, points: "(0, 0, m), m != 0" },
    ]
}

pub fn is_equilibrium(_b: &Params, x: &State) -> bool {
    x.x2 == 0.0 && x.x1 * x.x3 == 0.0
}

/// Jacobian of the vector field at `x`.
pub fn linearization(b: &Params, x: &State) -> Mat3 {
    [[0.0, b.b1(), 0.0], [b.b2() * x.x3, 0.0, b.b2() * x.x1], [b.b3() * x.x2, b.b3() * x.x1, 0.0]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralVerdict {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearVerdict {
    Stable,
    Unstable,
    /// Asserted in the literature but without a definite conserved function.
    ClaimedStable,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub eigenvalues: [Complex64; 3],
    pub verdict: SpectralVerdict,
    /// Jordan block sizes of the zero eigenvalue when it is defective.
    pub jordan_blocks: Option<Vec<usize>>,
}

fn symmetric_pair(sq: f64) -> [Complex64; 3] {
    let zero = Complex64::new(0.0, 0.0);
    if sq >= 0.0 {
        let r = sq.sqrt();
        [zero, Complex64::new(r, 0.0), Complex64::new(-r, 0.0)]
    } else {
        let r = (-sq).sqrt();
        [zero, Complex64::new(0.0, r), Complex64::new(0.0, -r)]
    }
}

/// Closed-form spectrum: `{0, +-m sqrt(b2 b3)}` on `e1`, `{0, +-sqrt(m b1 b2)}`
/// on `e3` and the triple zero at the origin.
pub fn closed_form_eigenvalues(b: &Params, e: &Equilibrium) -> [Complex64; 3] {
    match e.family {
        EquilibriumFamily::Origin => [Complex64::new(0.0, 0.0); 3],
        EquilibriumFamily::E1 => symmetric_pair(b.b2() * b.b3()).map(|l| l * e.m.abs()),
        EquilibriumFamily::E3 => symmetric_pair(e.m * b.b1() * b.b2()),
    }
}

pub fn spectral_classify(b: &Params, e: &Equilibrium) -> SpectralReport {
    let eigenvalues = closed_form_eigenvalues(b, e);
    let stable = match e.family {
        EquilibriumFamily::Origin => true,
        EquilibriumFamily::E1 => b.b2() * b.b3() < 0.0,
        EquilibriumFamily::E3 => e.m * b.b1() * b.b2() < 0.0,
    };
    let jordan_blocks = match e.family {
        // A(0) = b1 E_12: rank one and nilpotent of index two
        EquilibriumFamily::Origin => Some(vec![2, 1]),
        _ => None,
    };
    SpectralReport {
        eigenvalues,
        verdict: if stable { SpectralVerdict::Stable } else { SpectralVerdict::Unstable },
        jordan_blocks,
    }
}

/// Monic characteristic polynomial `l^3 + c2 l^2 + c1 l + c0` of `a`.
pub fn characteristic_polynomial(a: &Mat3) -> [f64; 3] {
    let trace = a[0][0] + a[1][1] + a[2][2];
    let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0] + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    [-trace, minors, -det]
}

/// Roots of `l^3 + c2 l^2 + c1 l + c0` by Cardano's formulas (trigonometric
/// form for three real roots), polished with two Newton steps.
pub fn cubic_roots(c2: f64, c1: f64, c0: f64) -> [Complex64; 3] {
    let shift = -c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let roots: [Complex64; 3] = if p == 0.0 && q == 0.0 {
        [Complex64::new(0.0, 0.0); 3]
    } else if disc > 0.0 {
        let s = disc.sqrt();
        let u = (-q / 2.0 + s).cbrt();
        let v = (-q / 2.0 - s).cbrt();
        let re = -(u + v) / 2.0;
        let im = 3.0_f64.sqrt() / 2.0 * (u - v);
        [Complex64::new(u + v, 0.0), Complex64::new(re, im), Complex64::new(re, -im)]
    } else {
        let r = (-p / 3.0).sqrt();
        let phi = (3.0 * q / (2.0 * p * r)).clamp(-1.0, 1.0).acos() / 3.0;
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        std::array::from_fn(|k| Complex64::new(2.0 * r * (phi - tau * k as f64).cos(), 0.0))
    };
    roots.map(|t| {
        let mut z = t + shift;
        for _ in 0..2 {
            let f = ((z + c2) * z + c1) * z + c0;
            let df = (3.0 * z + 2.0 * c2) * z + c1;
            if df.norm() > 1e-300 {
                z -= f / df;
            }
        }
        z
    })
}

/// Eigenvalues of the linearization through the generic cubic solver.
pub fn numeric_eigenvalues(b: &Params, x: &State) -> [Complex64; 3] {
    let [c2, c1, c0] = characteristic_polynomial(&linearization(b, x));
    cubic_roots(c2, c1, c0)
}

/// Largest distance between two spectra after greedy nearest matching.
pub fn spectrum_distance(a: &[Complex64; 3], b: &[Complex64; 3]) -> f64 {
    let mut used = [false; 3];
    let mut worst = 0.0_f64;
    for x in a {
        let (j, d) = (0..3)
            .filter(|j| !used[*j])
            .map(|j| (j, (x - b[j]).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("three candidates");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LyapunovKind {
    /// `L = (1/2)(C + (b3/2b1) m^2)^2 + H0`, vanishing at `(m, 0, 0)`.
    LE1,
    /// `L0 = (1/4)(x2^2 - (b2/b3) x3^2)^2 = H0^2`.
    L0Origin,
    /// `F = H - lambda C`.
    FEc,
}

pub fn lyapunov_value(kind: LyapunovKind, b: &Params, m: f64, lambda: Option<f64>, x: &State) -> Result<f64> {
    let h0 = reduced_hamiltonian(b).eval(x);
    match kind {
        LyapunovKind::LE1 => {
            if m == 0.0 {
                return Err(Error::InvalidInput("L_e1 needs m != 0".into()));
            }
            let shifted = casimir(b).eval(x) + b.b3() / (2.0 * b.b1()) * m * m;
            Ok(0.5 * shifted * shifted + h0)
        }
        LyapunovKind::L0Origin => Ok(h0 * h0),
        LyapunovKind::FEc => {
            let lambda = lambda.ok_or(Error::MissingMultiplier)?;
            Ok(energy_casimir_function(b, lambda).eval(x))
        }
    }
}

/// Polynomial form of the functions of [`lyapunov_value`], for exact
/// time-derivative checks.
pub fn lyapunov_poly(kind: LyapunovKind, b: &Params, m: f64, lambda: Option<f64>) -> Result<Poly3> {
    let h0 = Poly3::from(reduced_hamiltonian(b));
    match kind {
        LyapunovKind::LE1 => {
            if m == 0.0 {
                return Err(Error::InvalidInput("L_e1 needs m != 0".into()));
            }
            let shifted = Poly3::from(casimir(b)) + Poly3::constant(b.b3() / (2.0 * b.b1()) * m * m);
            Ok(shifted.try_mul(&shifted)?.scale(0.5) + h0)
        }
        LyapunovKind::L0Origin => h0.try_mul(&h0),
        LyapunovKind::FEc => {
            let lambda = lambda.ok_or(Error::MissingMultiplier)?;
            Ok(Poly3::from(energy_casimir_function(b, lambda)))
        }
    }
}

/// `H - lambda C`.
pub fn energy_casimir_function(b: &Params, lambda: f64) -> DiagQuadratic {
    hamiltonian(b) - casimir(b) * lambda
}

/// The multiplier `lambda0 = -m b1 b2 / b3` making `e3^m` critical for `H - lambda C`.
pub fn ec_multiplier(b: &Params, m: f64) -> f64 {
    -m * b.b1() * b.b2() / b.b3()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    PositiveDefinite,
    NegativeDefinite,
    Indefinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RestrictedHessian {
    pub lambda0: f64,
    /// Diagonal of the Hessian of `H - lambda0 C` on `ker dC(e3^m) = span{e_1, e_2}`.
    pub diagonal: [f64; 2],
    pub definiteness: Definiteness,
}

pub fn ec_restricted_hessian(b: &Params, m: f64) -> Result<RestrictedHessian> {
    if m == 0.0 {
        return Err(Error::InvalidInput("energy-Casimir test needs m != 0".into()));
    }
    let lambda0 = ec_multiplier(b, m);
    let f = energy_casimir_function(b, lambda0);
    let x = State::new(0.0, 0.0, m);
    // dC at e3^m is (0, 0, 1), so its kernel is the (x1, x2) plane
    debug_assert_eq!(casimir(b).gradient(&x), [0.0, 0.0, 1.0]);
    let hess = f.hessian_diag();
    let diagonal = [hess[0], hess[1]];
    let definiteness = if diagonal.iter().all(|d| *d > 0.0) {
        Definiteness::PositiveDefinite
    } else if diagonal.iter().all(|d| *d < 0.0) {
        Definiteness::NegativeDefinite
    } else {
        Definiteness::Indefinite
    };
    Ok(RestrictedHessian { lambda0, diagonal, definiteness })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// A conserved function with a strict minimum at the equilibrium.
    Lyapunov,
    /// Definite second variation of `H - lambda0 C` on `ker dC`.
    EnergyCasimir,
    /// Conserved `L0 = H0^2`, only positive semidefinite.
    SemidefiniteLyapunov,
    /// A real eigenvalue pair of the linearization.
    SpectralInstability,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub equilibrium: Equilibrium,
    pub point: State,
    pub eigenvalues: [Complex64; 3],
    pub spectral: SpectralVerdict,
    pub jordan_blocks: Option<Vec<usize>>,
    pub nonlinear: NonlinearVerdict,
    pub certificate: Certificate,
    pub ec_lambda0: Option<f64>,
}

fn certificate(kind: CertificateKind, text: String) -> Certificate {
    Certificate { kind, text }
}

pub fn nonlinear_classify(b: &Params, e: &Equilibrium) -> EquilibriumReport {
    let spectral = spectral_classify(b, e);
    let b2b3 = b.b2() * b.b3();
    let mut ec_lambda0 = None;
    let (nonlinear, cert) = match (e.family, spectral.verdict) {
        (_, SpectralVerdict::Unstable) => (
            NonlinearVerdict::Unstable,
            certificate(CertificateKind::SpectralInstability, "linearization has a positive real eigenvalue".into()),
        ),
        (EquilibriumFamily::E1, SpectralVerdict::Stable) => (
            NonlinearVerdict::Stable,
            certificate(
                CertificateKind::Lyapunov,
                format!(
                    "L = (C + (b3/2b1) m^2)^2 / 2 + H0 is conserved, vanishes at (m,0,0) and has a \
                     positive definite Hessian there since b2*b3 = {b2b3} < 0"
                ),
            ),
        ),
        (EquilibriumFamily::E3, SpectralVerdict::Stable) => {
            let rh = ec_restricted_hessian(b, e.m).expect("m != 0 for e3");
            ec_lambda0 = Some(rh.lambda0);
            match rh.definiteness {
                Definiteness::Indefinite => (
                    NonlinearVerdict::Inconclusive,
                    certificate(
                        CertificateKind::EnergyCasimir,
                        format!("H - lambda0 C restricted to ker dC is indefinite (lambda0 = {})", rh.lambda0),
                    ),
                ),
                d => (
                    NonlinearVerdict::Stable,
                    certificate(
                        CertificateKind::EnergyCasimir,
                        format!(
                            "energy-Casimir: H - lambda0 C with lambda0 = -m b1 b2 / b3 = {} is critical \
                             at (0,0,m) and {:?} on ker dC = span(e1, e2), diag = {:?}",
                            rh.lambda0, d, rh.diagonal
                        ),
                    ),
                ),
            }
        }
        (EquilibriumFamily::Origin, SpectralVerdict::Stable) if b2b3 < 0.0 => (
            NonlinearVerdict::Stable,
            certificate(
                CertificateKind::Lyapunov,
                format!(
                    "L0 = H0^2 is only semidefinite, but with the Casimir constraint \
                     V = C^2/2 + H0 is conserved and vanishes only at the origin (b2*b3 = {b2b3} < 0)"
                ),
            ),
        ),
        (EquilibriumFamily::Origin, SpectralVerdict::Stable) => (
            NonlinearVerdict::ClaimedStable,
            certificate(
                CertificateKind::SemidefiniteLyapunov,
                format!(
                    "L0 = H0^2 is conserved but vanishes on the whole x1-axis and H0 is indefinite \
                     (b2*b3 = {b2b3} > 0); no definite certificate, see the perturbation probe"
                ),
            ),
        ),
    };
    EquilibriumReport {
        equilibrium: *e,
        point: e.point(),
        eigenvalues: spectral.eigenvalues,
        spectral: spectral.verdict,
        jordan_blocks: spectral.jordan_blocks,
        nonlinear,
        certificate: cert,
        ec_lambda0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeResult {
    pub eps: f64,
    pub t_end: f64,
    pub directions: usize,
    pub max_excursion: f64,
    /// `max_excursion > 100 eps`.
    pub escaped: bool,
    /// `10 eps < max_excursion <= 100 eps`: close to the escape threshold.
    pub near_threshold: bool,
}

pub const ESCAPE_FACTOR: f64 = 100.0;
pub const WARN_FACTOR: f64 = 10.0;

/// Integrates from `n_directions` seeded random points at Euclidean
/// distance `eps` from the equilibrium and records the largest distance
/// reached. Runs stop as soon as they escape.
pub fn perturbation_probe(
    b: &Params,
    e: &Equilibrium,
    eps: f64,
    t_end: f64,
    n_directions: usize,
    rng_seed: u64,
) -> Result<ProbeResult> {
    perturbation_probe_with(b, e, eps, t_end, n_directions, rng_seed, &IntegratorSpec::default())
}

pub fn perturbation_probe_with(
    b: &Params,
    e: &Equilibrium,
    eps: f64,
    t_end: f64,
    n_directions: usize,
    rng_seed: u64,
    spec: &IntegratorSpec,
) -> Result<ProbeResult> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("probe radius must be positive, got {eps}")));
    }
    if n_directions == 0 {
        return Err(Error::InvalidInput("probe needs at least one direction".into()));
    }
    let center = e.point().to_array();
    let threshold = ESCAPE_FACTOR * eps;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let sys = TopSystem::new(*b);
    let mut max_excursion = 0.0_f64;
    for _ in 0..n_directions {
        let dir: [f64; 3] = loop {
            let d: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
            let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 1e-8 {
                break d.map(|v| v / n);
            }
        };
        let y0: [f64; 3] = std::array::from_fn(|i| center[i] + eps * dir[i]);
        let mut run_max = 0.0_f64;
        solve_until(&sys, y0, t_end, spec, |_, y| {
            let d = (0..3).map(|i| (y[i] - center[i]).powi(2)).sum::<f64>().sqrt();
            run_max = run_max.max(d);
            run_max <= threshold
        })?;
        max_excursion = max_excursion.max(run_max);
        if max_excursion > threshold {
            break;
        }
    }
    Ok(ProbeResult {
        eps,
        t_end,
        directions: n_directions,
        max_excursion,
        escaped: max_excursion > threshold,
        near_threshold: max_excursion > WARN_FACTOR * eps && max_excursion <= threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Preset;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn equilibrium_membership() {
        let b = Preset::LorenzHamilton.params();
        assert!(is_equilibrium(&b, &State::new(3.0, 0.0, 0.0)));
        assert!(!is_equilibrium(&b, &State::new(0.0, 1.0, 0.0)));
        assert!(is_equilibrium(&b, &State::new(0.0, 0.0, -2.0)));
        assert!(Equilibrium::e1(0.0).is_err());
    }

    #[test]
    fn linearization_at_family_points() {
        let b = Params::new(1.5, -0.5, 2.0).unwrap();
        let m = 3.0;
        assert_eq!(
            linearization(&b, &State::new(m, 0.0, 0.0)),
            [[0.0, 1.5, 0.0], [0.0, 0.0, m * -0.5], [0.0, m * 2.0, 0.0]]
        );
        assert_eq!(
            linearization(&b, &State::new(0.0, 0.0, m)),
            [[0.0, 1.5, 0.0], [m * -0.5, 0.0, 0.0], [0.0, 0.0, 0.0]]
        );
        assert_eq!(linearization(&b, &State::ORIGIN), [[0.0, 1.5, 0.0], [0.0; 3], [0.0; 3]]);
    }

    #[test]
    fn spectral_examples() {
        let mb = Preset::MaxwellBloch.params();
        let r = spectral_classify(&mb, &Equilibrium::e1(2.0).unwrap());
        assert_eq!(r.verdict, SpectralVerdict::Stable);
        assert!(spectrum_distance(&r.eigenvalues, &[c(0.0, 0.0), c(0.0, 2.0), c(0.0, -2.0)]) < 1e-15);

        let lh = Preset::LorenzHamilton.params();
        let r = spectral_classify(&lh, &Equilibrium::e3(-1.0).unwrap());
        assert_eq!(r.verdict, SpectralVerdict::Unstable);
        let s = 0.5_f64.sqrt();
        assert!(spectrum_distance(&r.eigenvalues, &[c(0.0, 0.0), c(s, 0.0), c(-s, 0.0)]) < 1e-15);

        let r = spectral_classify(&lh, &Equilibrium::ORIGIN);
        assert_eq!(r.verdict, SpectralVerdict::Stable);
        assert_eq!(r.eigenvalues, [c(0.0, 0.0); 3]);
        assert_eq!(r.jordan_blocks, Some(vec![2, 1]));
    }

    #[test]
    fn cubic_solver_on_known_polynomials() {
        // (l - 1)(l - 2)(l + 3) = l^3 - 7 l + 6
        let r = cubic_roots(0.0, -7.0, 6.0);
        assert!(spectrum_distance(&r, &[c(1.0, 0.0), c(2.0, 0.0), c(-3.0, 0.0)]) < 1e-12);
        // (l - 1)(l^2 + 4) = l^3 - l^2 + 4 l - 4
        let r = cubic_roots(-1.0, 4.0, -4.0);
        assert!(spectrum_distance(&r, &[c(1.0, 0.0), c(0.0, 2.0), c(0.0, -2.0)]) < 1e-12);
        assert_eq!(cubic_roots(0.0, 0.0, 0.0), [c(0.0, 0.0); 3]);
    }

    #[test]
    fn lyapunov_values_vanish_at_their_equilibria() {
        let b = Params::new(0.7, -1.2, 2.5).unwrap();
        let m = -1.3;
        assert_eq!(lyapunov_value(LyapunovKind::LE1, &b, m, None, &State::new(m, 0.0, 0.0)).unwrap(), 0.0);
        assert_eq!(lyapunov_value(LyapunovKind::L0Origin, &b, 0.0, None, &State::ORIGIN).unwrap(), 0.0);
        assert_eq!(
            lyapunov_value(LyapunovKind::FEc, &b, m, None, &State::ORIGIN).unwrap_err(),
            Error::MissingMultiplier
        );
    }

    #[test]
    fn energy_casimir_gradient_vanishes_at_lorenz_hamilton_e3() {
        let lh = Preset::LorenzHamilton.params();
        let m = 1.7;
        let lambda0 = ec_multiplier(&lh, m);
        assert!((lambda0 - m / 2.0).abs() < 1e-15);
        let f = lyapunov_value(LyapunovKind::FEc, &lh, m, Some(lambda0), &State::new(0.0, 0.0, m)).unwrap();
        assert!(f.is_finite());
        let g = energy_casimir_function(&lh, lambda0).gradient(&State::new(0.0, 0.0, m));
        assert!(g.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn restricted_hessian_examples() {
        let lh = Preset::LorenzHamilton.params();
        let rh = ec_restricted_hessian(&lh, 1.0).unwrap();
        assert_eq!(rh.diagonal, [1.0, 0.5]);
        assert_eq!(rh.definiteness, Definiteness::PositiveDefinite);
        let rh = ec_restricted_hessian(&lh, -1.0).unwrap();
        assert_eq!(rh.diagonal, [-1.0, 0.5]);
        assert_eq!(rh.definiteness, Definiteness::Indefinite);
        let rh = ec_restricted_hessian(&Params::new(-1.0, 1.0, 1.0).unwrap(), 1.0).unwrap();
        assert_eq!(rh.diagonal, [-1.0, -1.0]);
        assert_eq!(rh.definiteness, Definiteness::NegativeDefinite);
    }

    #[test]
    fn lorenz_hamilton_verdict_table() {
        let lh = Preset::LorenzHamilton.params();
        for m in [-2.0, -0.5, 0.5, 2.0] {
            assert_eq!(nonlinear_classify(&lh, &Equilibrium::e1(m).unwrap()).nonlinear, NonlinearVerdict::Stable);
            let e3 = nonlinear_classify(&lh, &Equilibrium::e3(m).unwrap());
            let expected = if m > 0.0 { NonlinearVerdict::Stable } else { NonlinearVerdict::Unstable };
            assert_eq!(e3.nonlinear, expected, "m = {m}");
            assert_eq!(e3.ec_lambda0.is_some(), m > 0.0);
        }
        assert_eq!(nonlinear_classify(&lh, &Equilibrium::ORIGIN).nonlinear, NonlinearVerdict::Stable);
    }

    #[test]
    fn e1_verdicts_follow_sign_of_b2_b3() {
        let stable = nonlinear_classify(&Preset::MaxwellBloch.params(), &Equilibrium::e1(1.0).unwrap());
        assert_eq!(stable.nonlinear, NonlinearVerdict::Stable);
        assert_eq!(stable.certificate.kind, CertificateKind::Lyapunov);
        let unstable = nonlinear_classify(&Params::new(1.0, 1.0, 1.0).unwrap(), &Equilibrium::e1(1.0).unwrap());
        assert_eq!(unstable.nonlinear, NonlinearVerdict::Unstable);
    }

    #[test]
    fn origin_with_indefinite_h0_is_only_claimed() {
        let r = nonlinear_classify(&Params::new(1.0, 1.0, 1.0).unwrap(), &Equilibrium::ORIGIN);
        assert_eq!(r.nonlinear, NonlinearVerdict::ClaimedStable);
        assert_eq!(r.certificate.kind, CertificateKind::SemidefiniteLyapunov);
    }

    #[test]
    fn probes_separate_stable_from_unstable() {
        let lh = Preset::LorenzHamilton.params();
        let stable = perturbation_probe(&lh, &Equilibrium::e3(1.0).unwrap(), 1e-3, 100.0, 4, 1).unwrap();
        assert!(!stable.escaped, "{stable:?}");
        let unstable = perturbation_probe(&lh, &Equilibrium::e3(-1.0).unwrap(), 1e-3, 100.0, 4, 1).unwrap();
        assert!(unstable.escaped, "{unstable:?}");
        assert!(perturbation_probe(&lh, &Equilibrium::ORIGIN, 0.0, 1.0, 1, 1).is_err());
    }
}
