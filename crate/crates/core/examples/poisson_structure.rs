//! Checks the Poisson axioms exactly in polynomial arithmetic for the base,
//! bar and random SL(2,R) realizations, and shows a matrix that fails.
//!
//! ```text
//! cargo run --example poisson_structure -- 0.5 -1 1
//! ```

use mbtop::model::{named_realization, NamedRealization, Params};
use mbtop::poisson::{bracket, coordinate_probes, jacobi_residual_over, verify_structure, PolyPoissonMatrix};
use mbtop::poly::Poly3;

fn main() -> mbtop::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let b = match args.as_slice() {
        [b1, b2, b3] => Params::new(*b1, *b2, *b3)?,
        _ => Params::new(0.5, -1.0, 1.0)?,
    };

    let p = PolyPoissonMatrix::from_bundle(&named_realization(&b, NamedRealization::Base));
    let x = coordinate_probes();
    println!("coordinate brackets for {b}:");
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        println!("  {{x{}, x{}}} = {:?}", i + 1, j + 1, bracket(&p, &x[i], &x[j])?);
    }

    let report = verify_structure(&b, 5, 500, 42)?;
    println!("\n{:<12} {:<18} {:>10}", "realization", "axiom", "residual");
    let mut labels: Vec<&str> = Vec::new();
    for c in &report.checks {
        if !labels.contains(&c.realization.as_str()) {
            labels.push(&c.realization);
        }
        // random realizations carry their full coefficients in the label
        let short =
            if c.realization.len() > 12 { format!("random #{}", labels.len() - 2) } else { c.realization.clone() };
        println!("{short:<12} {:<18} {:>10.2e} {}", c.axiom, c.residual, if c.pass { "ok" } else { "FAIL" });
    }
    println!("random realizations: {}", labels[2..].join("; "));
    println!("all pass: {}", report.all_pass);

    let broken = p.with_entry(0, 1, Poly3::monomial([1, 1, 0], 1.0));
    println!("\nwith P12 replaced by x1 x2 the Jacobi residual is {:.3e}", jacobi_residual_over(&broken, &x)?);
    Ok(())
}
