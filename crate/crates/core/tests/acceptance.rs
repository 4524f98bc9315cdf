//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use mbtop::g4::{
    classify_g4_equilibria, e2_sign_rule, g4_invariants, reconstruct, reduced_costate_rhs, to_mbtop, ControlConfig,
    Costate, CostateEquilibrium, G4State,
};
use mbtop::integrate::{integrate, IntegratorSpec, Trajectory};
use mbtop::model::{named_realization, realization, vector_field, NamedRealization, Params, State};
use mbtop::pendulum::{make_context, verify_reduction};
use mbtop::poisson::{
    casimir_residual, coordinate_probes, hamiltonian_form_residual, jacobi_probe_basis, jacobi_residual,
    jacobi_residual_over, random_unimodular, PolyPoissonMatrix,
};
use mbtop::poly::Poly3;
use mbtop::stability::{
    closed_form_eigenvalues, ec_restricted_hessian, energy_casimir_function, nonlinear_classify, perturbation_probe,
    spectral_classify, CertificateKind, Definiteness, Equilibrium, EquilibriumFamily, NonlinearVerdict,
    SpectralVerdict,
};
use mbtop::Error;
use nalgebra::Matrix3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn nonzero(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    loop {
        let v: f64 = rng.random_range(-hi..=hi);
        if v.abs() >= lo && v != 0.0 {
            return v;
        }
    }
}

fn random_params(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Params {
    Params::new(nonzero(rng, lo, hi), nonzero(rng, lo, hi), nonzero(rng, lo, hi)).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `|H(t) - H(0)|` relative to the size of the individual terms of `H`,
/// which stays meaningful when `H(0)` is close to zero by cancellation.
fn relative_drifts(b: &Params, traj: &Trajectory) -> (f64, f64) {
    let (b1, b2, b3) = (b.b1(), b.b2(), b.b3());
    let h_scale = |x: &State| 0.5 * b1.abs() * (x.x2 * x.x2 + (b2 / b3).abs() * x.x3 * x.x3);
    let c_scale = |x: &State| (b3 / (2.0 * b1)).abs() * x.x1 * x.x1 + x.x3.abs();
    let (h0, c0) = (traj.h_series[0], traj.c_series[0]);
    let hs = traj.states.iter().map(h_scale).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let cs = traj.states.iter().map(c_scale).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let dh = traj.h_series.iter().map(|h| (h - h0).abs()).fold(0.0, f64::max);
    let dc = traj.c_series.iter().map(|c| (c - c0).abs()).fold(0.0, f64::max);
    (dh / hs, dc / cs)
}

fn absolute_drifts(traj: &Trajectory) -> (f64, f64) {
    let (h0, c0) = (traj.h_series[0], traj.c_series[0]);
    (
        traj.h_series.iter().map(|h| (h - h0).abs()).fold(0.0, f64::max),
        traj.c_series.iter().map(|c| (c - c0).abs()).fold(0.0, f64::max),
    )
}

fn conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rk45 = IntegratorSpec::rk45(1e-10, 1e-12);
    let midpoint = IntegratorSpec::midpoint(0.1);
    let (mut accepted, mut blowups) = (0, 0);
    let (mut worst_rel, mut worst_abs) = (0.0_f64, 0.0_f64);
    while accepted < 100 {
        let b = random_params(&mut rng, 0.0, 3.0);
        let x0 = State::new(nonzero(&mut rng, 0.0, 3.0), nonzero(&mut rng, 0.0, 3.0), nonzero(&mut rng, 0.0, 3.0));
        // solutions that leave every bounded set before t = 100 have nothing to conserve
        match integrate(&b, &x0, 100.0, &rk45) {
            Err(Error::StepFailure { .. }) => {
                ensure(b.b2() * b.b3() > 0.0, || format!("step failure with b2*b3 < 0 for {b}, x0 = {x0:?}"))?;
                blowups += 1;
                continue;
            }
            Err(e) => return Err(format!("{b}, x0 = {x0:?}: {e}")),
            Ok(_) => {}
        }
        accepted += 1;
        let traj = integrate(&b, &x0, 50.0, &rk45).map_err(|e| e.to_string())?;
        let (dh, dc) = relative_drifts(&b, &traj);
        worst_rel = worst_rel.max(dh).max(dc);
        ensure(dh <= 1e-6 && dc <= 1e-6, || format!("rk45 relative drift H {dh:e}, C {dc:e} for {b}, x0 = {x0:?}"))?;
        let traj = integrate(&b, &x0, 100.0, &midpoint).map_err(|e| format!("midpoint {b}, x0 = {x0:?}: {e}"))?;
        let (dh, dc) = absolute_drifts(&traj);
        worst_abs = worst_abs.max(dh).max(dc);
        ensure(dh <= 1e-9 && dc <= 1e-9, || format!("midpoint drift H {dh:e}, C {dc:e} for {b}, x0 = {x0:?}"))?;
    }
    Ok(format!(
        "100 cases ({blowups} finite-time blow-ups with b2*b3 > 0 redrawn); rk45 rel drift <= {worst_rel:.2e}, midpoint abs drift <= {worst_abs:.2e}"
    ))
}

fn hamiltonian_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0_f64;
    let mut seed = 1000;
    for _ in 0..20 {
        let b = random_params(&mut rng, 0.0, 3.0);
        let mut bundles =
            vec![named_realization(&b, NamedRealization::Base), named_realization(&b, NamedRealization::Bar)];
        for _ in 0..20 {
            bundles.push(realization(&b, &random_unimodular(&mut rng)).map_err(|e| e.to_string())?);
        }
        for bundle in &bundles {
            seed += 1;
            let r = hamiltonian_form_residual(&b, bundle, 1000, seed);
            worst = worst.max(r);
            ensure(r <= 1e-12, || format!("residual {r:e} for {b}, realization {}", bundle.label))?;
        }
    }
    Ok(format!("20 b x 22 realizations x 1000 points, max residual {worst:.2e}"))
}

fn poisson_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let probes = jacobi_probe_basis();
    let (mut worst_j, mut worst_c, mut checked) = (0.0_f64, 0.0_f64, 0);
    for _ in 0..20 {
        let b = random_params(&mut rng, 0.0, 3.0);
        let mut bundles =
            vec![named_realization(&b, NamedRealization::Base), named_realization(&b, NamedRealization::Bar)];
        for _ in 0..20 {
            bundles.push(realization(&b, &random_unimodular(&mut rng)).map_err(|e| e.to_string())?);
        }
        for bundle in &bundles {
            let pm = PolyPoissonMatrix::from_bundle(bundle);
            for i in 0..3 {
                for j in 0..3 {
                    ensure(pm.entry(i, j) == -pm.entry(j, i), || format!("P not skew for {}", bundle.label))?;
                }
            }
            let j = jacobi_residual_over(&pm, &probes).map_err(|e| e.to_string())?;
            let casimir = Poly3::from(&bundle.casimir);
            let c = casimir_residual(&pm, &casimir, &coordinate_probes()).map_err(|e| e.to_string())?;
            worst_j = worst_j.max(j);
            worst_c = worst_c.max(c);
            checked += 1;
            ensure(j <= 1e-10 && c <= 1e-12, || {
                format!("jacobi {j:e}, casimir {c:e} for {b}, realization {}", bundle.label)
            })?;
        }
    }
    let mut broken_j = f64::INFINITY;
    for _ in 0..20 {
        let b = random_params(&mut rng, 0.0, 3.0);
        let broken = PolyPoissonMatrix::from_bundle(&named_realization(&b, NamedRealization::Base)).with_entry(
            0,
            1,
            Poly3::monomial([1, 1, 0], 1.0),
        );
        let x = [Poly3::var(0), Poly3::var(1), Poly3::var(2)];
        let r = jacobi_residual(&broken, &x[0], &x[1], &x[2]).map_err(|e| e.to_string())?;
        broken_j = broken_j.min(r);
        ensure(r >= 1e-3, || format!("broken matrix passes Jacobi for {b}: {r:e}"))?;
    }
    Ok(format!(
        "{checked} matrices, jacobi <= {worst_j:.2e}, casimir <= {worst_c:.2e}; broken control residual >= {broken_j:.2e}"
    ))
}

fn pendulum_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let spec = IntegratorSpec::rk45(1e-12, 1e-14).sampled_every(0.05);
    let (mut worst_d, mut worst_l) = (0.0_f64, 0.0_f64);
    for _ in 0..20 {
        let mut b = random_params(&mut rng, 0.0, 3.0);
        if b.b2() * b.b3() > 0.0 {
            b = Params::new(b.b1(), b.b2(), -b.b3()).unwrap();
        }
        let x0 = loop {
            let x =
                State::new(rng.random_range(-3.0..=3.0), rng.random_range(-3.0..=3.0), rng.random_range(-3.0..=3.0));
            if mbtop::model::first_integrals(&b, &x).h0 > 0.1 {
                break x;
            }
        };
        let ctx = make_context(&b).map_err(|e| e.to_string())?;
        let check = verify_reduction(&ctx, &x0, 10.0, &spec).map_err(|e| e.to_string())?;
        worst_d = worst_d.max(check.max_discrepancy);
        worst_l = worst_l.max(check.max_level_residual);
        ensure(check.max_discrepancy <= 1e-6 && check.max_level_residual <= 1e-8, || {
            format!(
                "discrepancy {:e}, level {:e} for {b}, x0 = {x0:?}",
                check.max_discrepancy, check.max_level_residual
            )
        })?;
    }
    Ok(format!("20 cases, discrepancy <= {worst_d:.2e}, level identity <= {worst_l:.2e}"))
}

fn random_equilibrium(rng: &mut ChaCha8Rng, with_origin: bool) -> Equilibrium {
    let pick = rng.random_range(0..if with_origin { 3 } else { 2 });
    let m = nonzero(rng, 0.25, 3.0);
    match pick {
        0 => Equilibrium::e1(m).unwrap(),
        1 => Equilibrium::e3(m).unwrap(),
        _ => Equilibrium::ORIGIN,
    }
}

/// Distance between two spectra under the best matching of their entries.
fn matched_distance(a: &[Complex64], b: &[Complex64; 3]) -> f64 {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS.iter().map(|p| (0..3).map(|i| (a[i] - b[p[i]]).norm()).fold(0.0, f64::max)).fold(f64::INFINITY, f64::min)
}

fn stability_classification() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let b = random_params(&mut rng, 0.0, 3.0);
        let e = random_equilibrium(&mut rng, true);
        let j = mbtop::stability::linearization(&b, &e.point());
        let numeric = Matrix3::from_fn(|r, c| j[r][c]).complex_eigenvalues();
        let d = matched_distance(numeric.as_slice(), &closed_form_eigenvalues(&b, &e));
        worst = worst.max(d);
        ensure(d <= 1e-10, || format!("eigenvalue mismatch {d:e} for {b}, {e:?}"))?;
    }

    let b = Params::new(0.5, -1.0, 1.0).unwrap();
    let verdict = |e: Equilibrium| nonlinear_classify(&b, &e).nonlinear;
    ensure(verdict(Equilibrium::ORIGIN) == NonlinearVerdict::Stable, || "origin not stable".into())?;
    for m in [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0] {
        ensure(verdict(Equilibrium::e1(m).unwrap()) == NonlinearVerdict::Stable, || format!("e1({m}) not stable"))?;
        let expected = if m > 0.0 { NonlinearVerdict::Stable } else { NonlinearVerdict::Unstable };
        ensure(verdict(Equilibrium::e3(m).unwrap()) == expected, || format!("e3({m}) verdict wrong"))?;
    }

    // certified cases come from the m != 0 families; see the README for the origin
    let (mut stable, mut unstable) = (0, 0);
    let (mut stable_max, mut unstable_min) = (0.0_f64, f64::INFINITY);
    let mut seed = 500;
    while stable < 10 || unstable < 10 {
        let b = random_params(&mut rng, 0.25, 3.0);
        let e = random_equilibrium(&mut rng, false);
        let report = nonlinear_classify(&b, &e);
        let certified = report.nonlinear == NonlinearVerdict::Stable
            && matches!(report.certificate.kind, CertificateKind::Lyapunov | CertificateKind::EnergyCasimir);
        let spectrally_unstable = spectral_classify(&b, &e).verdict == SpectralVerdict::Unstable;
        if (certified && stable >= 10) || (spectrally_unstable && unstable >= 10) || !(certified || spectrally_unstable)
        {
            continue;
        }
        seed += 1;
        let probe = perturbation_probe(&b, &e, 1e-3, 100.0, 10, seed).map_err(|err| err.to_string())?;
        if certified {
            stable += 1;
            stable_max = stable_max.max(probe.max_excursion);
            ensure(!probe.escaped, || format!("certified-stable {e:?} escaped for {b}: {probe:?}"))?;
        } else {
            unstable += 1;
            unstable_min = unstable_min.min(probe.max_excursion);
            ensure(probe.escaped, || format!("unstable {e:?} did not escape for {b}: {probe:?}"))?;
        }
    }
    Ok(format!(
        "200 spectra within {worst:.2e}; verdict table reproduced; probes: stable max excursion {stable_max:.2e}, unstable min {unstable_min:.2e}"
    ))
}

fn energy_casimir() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0_f64;
    let mut counted = 0;
    for _ in 0..100 {
        let b = random_params(&mut rng, 0.0, 3.0);
        let m = nonzero(&mut rng, 0.0, 3.0);
        let rh = ec_restricted_hessian(&b, m).map_err(|e| e.to_string())?;
        let f = energy_casimir_function(&b, rh.lambda0);
        let x = State::new(0.0, 0.0, m);
        let g = f.gradient(&x).iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        worst = worst.max(g);
        ensure(g <= 1e-13, || format!("gradient {g:e} at e3({m}) for {b}"))?;

        // second differences of F along e1 and e2 (exact for quadratics up to rounding)
        let second = |i: usize| {
            let h = 0.5;
            let mut plus = x.to_array();
            let mut minus = x.to_array();
            plus[i] += h;
            minus[i] -= h;
            (f.eval(&State::from(plus)) - 2.0 * f.eval(&x) + f.eval(&State::from(minus))) / (h * h)
        };
        let (d1, d2) = (second(0), second(1));
        let oracle = if d1 > 0.0 && d2 > 0.0 {
            Definiteness::PositiveDefinite
        } else if d1 < 0.0 && d2 < 0.0 {
            Definiteness::NegativeDefinite
        } else {
            Definiteness::Indefinite
        };
        ensure(rh.definiteness == oracle, || {
            format!("definiteness {:?} vs {oracle:?} for {b}, m = {m}", rh.definiteness)
        })?;
        if m * b.b1() * b.b2() < 0.0 {
            counted += 1;
            let expected = if b.b1() > 0.0 { Definiteness::PositiveDefinite } else { Definiteness::NegativeDefinite };
            ensure(rh.definiteness == expected, || format!("sign rule violated for {b}, m = {m}"))?;
        }
    }
    Ok(format!("100 cases ({counted} with m*b1*b2 < 0), gradient <= {worst:.2e}, definiteness matches"))
}

fn random_control(rng: &mut ChaCha8Rng) -> ControlConfig {
    let k = nonzero(rng, 0.5, 2.0);
    ControlConfig::new(rng.random_range(0.5..=2.0), rng.random_range(0.5..=2.0), k, 50.0).unwrap()
}

fn g4_pipeline() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_conj = 0.0_f64;
    for _ in 0..1000 {
        let cfg = random_control(&mut rng);
        let (b, relabel) = to_mbtop(&cfg).map_err(|e| e.to_string())?;
        let z = [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
        let pushed = relabel.z_to_y(&reduced_costate_rhs(&cfg, &z));
        let top = State::from(vector_field(&b, &relabel.z_to_y(&z)));
        let d = pushed.max_abs_diff(&top);
        worst_conj = worst_conj.max(d);
        ensure(d <= 1e-15, || format!("conjugation defect {d:e} for {cfg:?}, z = {z:?}"))?;
    }

    let spec = IntegratorSpec::rk45(1e-10, 1e-12).sampled_every(0.1);
    let (mut z4, mut inv, mut res, mut uni) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..10 {
        let cfg = random_control(&mut rng);
        let z0 = Costate::new(
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            cfg.k,
        );
        let x0 = G4State::new(
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        );
        let r = reconstruct(&cfg, &x0, &z0, 50.0, &spec).map_err(|e| e.to_string())?;
        let i0 = g4_invariants(&cfg, &z0);
        let h_c = r
            .costate
            .iter()
            .map(|z| {
                let i = g4_invariants(&cfg, z);
                (i.h - i0.h).abs().max((i.c - i0.c).abs())
            })
            .fold(0.0, f64::max);
        z4 = z4.max(r.z4_drift);
        inv = inv.max(h_c);
        res = res.max(r.residual);
        uni = uni.max(r.unipotent_residual);
        ensure(r.z4_drift <= 1e-13 && h_c <= 1e-8 && r.residual <= 1e-6 && r.unipotent_residual <= 1e-8, || {
            format!(
                "{cfg:?}, z0 = {z0:?}: z4 {:e}, invariants {h_c:e}, residual {:e}, unipotent {:e}",
                r.z4_drift, r.residual, r.unipotent_residual
            )
        })?;
    }

    let mut compared = 0;
    for _ in 0..50 {
        let cfg = random_control(&mut rng);
        let ms: Vec<f64> = (0..4).map(|_| nonzero(&mut rng, 0.1, 3.0)).collect();
        let reports = classify_g4_equilibria(&cfg, &ms).map_err(|e| e.to_string())?;
        for r in reports.iter().filter(|r| r.equilibrium == CostateEquilibrium::E2) {
            compared += 1;
            let rule = e2_sign_rule(&cfg, r.m);
            ensure(r.top_report.nonlinear == rule, || {
                format!("(0,{},0) for {cfg:?}: relabeled {:?}, sign rule {rule:?}", r.m, r.top_report.nonlinear)
            })?;
            ensure(r.top_report.equilibrium.family == EquilibriumFamily::E3, || "wrong relabeled family".into())?;
        }
    }
    Ok(format!(
        "conjugation <= {worst_conj:.1e}; z4 drift <= {z4:.1e}; H~,C~ drift <= {inv:.2e}; matrix residual <= {res:.2e}; unipotent <= {uni:.2e}; {compared} e2 verdicts agree"
    ))
}

fn sha256_file(path: &Path) -> Result<String, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_mbtop");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path().to_str().unwrap();
    let runs: Vec<(Vec<String>, Vec<&str>)> = vec![
        (
            format!("simulate --preset lorenz-hamilton --x0 0,1,0 --t-end 10 --method midpoint --step 0.1 --out {d}/sim.csv")
                .split(' ')
                .map(String::from)
                .collect(),
            vec!["sim.csv"],
        ),
        (
            format!("verify-structure --b 0.5,-1,1 --realizations 5 --samples 200 --seed 7 --out {d}/structure.json")
                .split(' ')
                .map(String::from)
                .collect(),
            vec!["structure.json"],
        ),
        (
            format!("reduce-pendulum --preset lorenz-hamilton --x0 0.5,1,0.2 --t-end 10 --dt 0.1 --out {d}/pend.csv --report {d}/pend.json")
                .split(' ')
                .map(String::from)
                .collect(),
            vec!["pend.csv", "pend.json"],
        ),
        (
            format!("analyze-equilibria --b 0.5,-1,1 --m 1,-1 --probe-t-end 20 --seed 3 --out {d}/eq.json")
                .split(' ')
                .map(String::from)
                .collect(),
            vec!["eq.json"],
        ),
        (
            format!("control-g4 --c1 1 --c2 2 --k -1 --t-f 10 --z0 0.3,-0.4,0.5 --dt 0.1 --out {d}/g4.csv --report {d}/g4.json")
                .split(' ')
                .map(String::from)
                .collect(),
            vec!["g4.csv", "g4.json"],
        ),
        (
            format!("plot {d}/sim.csv --out {d}/sim.svg").split(' ').map(String::from).collect(),
            vec!["sim.svg"],
        ),
    ];
    let mut digests = Vec::new();
    for round in 0..2 {
        let mut this_round = Vec::new();
        for (args, outputs) in &runs {
            let status = Command::new(exe).args(args).env("MBTOP_SEED", "42").output().map_err(|e| e.to_string())?;
            ensure(status.status.success(), || {
                format!("`mbtop {}` failed: {}", args.join(" "), String::from_utf8_lossy(&status.stderr))
            })?;
            for out in outputs {
                this_round.push((out.to_string(), sha256_file(&Path::new(d).join(out))?));
            }
        }
        if round == 1 {
            for ((name, a), (_, b)) in digests.iter().zip(&this_round) {
                ensure(a == b, || format!("{name} differs between runs"))?;
            }
        }
        digests = this_round;
    }
    Ok(format!("{} outputs byte-identical across two runs", digests.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("conservation", conservation),
        ("hamiltonian form", hamiltonian_form),
        ("poisson axioms", poisson_axioms),
        ("pendulum equivalence", pendulum_equivalence),
        ("stability classification", stability_classification),
        ("energy-casimir certificate", energy_casimir),
        ("g4 pipeline", g4_pipeline),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({secs:.1}s) {detail}", n + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({secs:.1}s) {detail}", n + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
