//! Optimal control on the nilpotent group G4: builds the Lie algebra,
//! integrates an extremal from an initial costate and classifies the
//! costate equilibria through the top.
//!
//! ```text
//! cargo run --example g4_control
//! ```

use mbtop::g4::{
    classify_g4_equilibria, g4_invariants, lie_basis, pendulum_route, reconstruct, to_mbtop, ControlConfig, Costate,
    G4State,
};
use mbtop::integrate::IntegratorSpec;

fn main() -> mbtop::Result<()> {
    let basis = lie_basis();
    println!(
        "[A2, A1] - A3: {:.1e}, [A3, A1] - A4: {:.1e}, A4 central: {:.1e}",
        basis.a3_residual, basis.a4_residual, basis.center_residual
    );

    let cfg = ControlConfig::new(1.0, 2.0, 1.5, 20.0)?;
    let (b, _) = to_mbtop(&cfg)?;
    println!("costate system is the top with {b}");

    let z0 = Costate::new(0.6, -0.4, 0.3, cfg.k);
    let inv = g4_invariants(&cfg, &z0);
    println!("z0 = {:?}: H~ = {:.6}, C~ = {:.6}", z0.to_array(), inv.h, inv.c);

    let spec = IntegratorSpec::rk45(1e-10, 1e-12).sampled_every(2.0);
    let r = reconstruct(&cfg, &G4State::default(), &z0, cfg.t_f, &spec)?;
    println!("\n{:>5} {:>10} {:>10} {:>10} {:>10} {:>8} {:>8}", "t", "x1", "x2", "x3", "x4", "u1", "u2");
    for i in 0..r.times.len() {
        let (x, (u1, u2)) = (r.g4[i], r.controls[i]);
        println!(
            "{:>5.1} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>8.4} {:>8.4}",
            r.times[i], x.x1, x.x2, x.x3, x.x4, u1, u2
        );
    }
    println!(
        "cost {:.6}; matrix-equation residual {:.2e}; unipotent entry {:.2e}; invariant drift {:.2e} / {:.2e}",
        r.cost, r.residual, r.unipotent_residual, r.h_drift, r.c_drift
    );

    let route = pendulum_route(&cfg, &z0, 10.0, &IntegratorSpec::rk45(1e-12, 1e-14).sampled_every(0.1))?;
    println!("pendulum route agrees with direct costate integration to {:.2e}", route.max_discrepancy);

    println!("\ncostate equilibria:");
    for e in classify_g4_equilibria(&cfg, &[1.0, -1.0])? {
        println!("  {:?} {:?}: {:?}", e.equilibrium, e.costate_point, e.top_report.nonlinear);
    }
    Ok(())
}
