//! Classifies the equilibria of a top, prints the certificate behind each
//! verdict and runs perturbation probes.
//!
//! ```text
//! cargo run --example stability_analysis -- 0.5 -1 1
//! ```

use mbtop::model::Params;
use mbtop::stability::{ec_restricted_hessian, nonlinear_classify, perturbation_probe, Equilibrium};

fn main() -> mbtop::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let b = match args.as_slice() {
        [b1, b2, b3] => Params::new(*b1, *b2, *b3)?,
        _ => Params::new(0.5, -1.0, 1.0)?,
    };
    println!("{b}\n");

    let mut targets = vec![Equilibrium::ORIGIN];
    for m in [1.0, -1.0] {
        targets.push(Equilibrium::e1(m)?);
        targets.push(Equilibrium::e3(m)?);
    }
    for (i, e) in targets.iter().enumerate() {
        let r = nonlinear_classify(&b, e);
        let probe = perturbation_probe(&b, e, 1e-3, 100.0, 10, 42 + i as u64)?;
        let eig: Vec<String> = r.eigenvalues.iter().map(|z| format!("{:.3}{:+.3}i", z.re, z.im)).collect();
        println!("{:?} m = {}: {:?}", e.family, e.m, r.nonlinear);
        println!("  eigenvalues [{}]", eig.join(", "));
        println!("  certificate: {}", r.certificate.text);
        println!("  probe: max excursion {:.3e} (escaped: {})", probe.max_excursion, probe.escaped);
    }

    println!("\nenergy-Casimir data along (0, 0, m):");
    for m in [-2.0, -0.5, 0.5, 2.0] {
        let rh = ec_restricted_hessian(&b, m)?;
        println!("  m = {m:>4}: lambda0 = {:>7.3}, diag = {:?}, {:?}", rh.lambda0, rh.diagonal, rh.definiteness);
    }
    Ok(())
}
