//! Integrates both presets with each method and reports how well `H` and
//! `C` are conserved.
//!
//! ```text
//! cargo run --example conservation
//! ```

use mbtop::integrate::{drift_report, integrate, IntegratorSpec};
use mbtop::model::{first_integrals, Preset, State};

fn main() -> mbtop::Result<()> {
    let x0 = State::new(0.4, 1.0, -0.3);
    let methods = [
        ("rk4, h = 0.05", IntegratorSpec::rk4(0.05)),
        ("rk45, rtol = 1e-10", IntegratorSpec::rk45(1e-10, 1e-12)),
        ("midpoint, h = 0.1", IntegratorSpec::midpoint(0.1)),
    ];
    for preset in [Preset::MaxwellBloch, Preset::LorenzHamilton] {
        let b = preset.params();
        let fi = first_integrals(&b, &x0);
        println!("{preset:?} {b}: H = {:.6}, C = {:.6}", fi.h, fi.c);
        for (name, spec) in &methods {
            let traj = integrate(&b, &x0, 100.0, spec)?;
            let d = drift_report(&traj)?;
            println!("  {name:<20} steps {:>6}  max|dH| {:.2e}  max|dC| {:.2e}", traj.len() - 1, d.dh_max, d.dc_max);
        }
    }
    Ok(())
}
