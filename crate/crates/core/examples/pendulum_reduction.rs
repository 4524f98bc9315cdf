//! Maps a trajectory of the top onto the pendulum on its level set of `H0`
//! and compares the two routes.
//!
//! ```text
//! cargo run --example pendulum_reduction
//! ```

use mbtop::integrate::IntegratorSpec;
use mbtop::model::{Preset, State};
use mbtop::pendulum::{make_context, pendulum_energy, to_pendulum, verify_reduction};

fn main() -> mbtop::Result<()> {
    let b = Preset::LorenzHamilton.params();
    let ctx = make_context(&b)?;
    let x0 = State::new(0.8, 1.0, 0.3);
    let p0 = to_pendulum(&ctx, &x0)?;
    println!("{b}, gamma = {}, gain K = {:.6}", ctx.gamma, ctx.gain());
    println!(
        "x0 = {:?} -> theta = {:.6}, theta' = {:.6}, H0 = {:.6}, E = {:.6}",
        x0.to_array(),
        p0.theta,
        p0.theta_dot,
        p0.h,
        pendulum_energy(&ctx, &p0)
    );

    let spec = IntegratorSpec::rk45(1e-12, 1e-14).sampled_every(1.0);
    let check = verify_reduction(&ctx, &x0, 10.0, &spec)?;
    println!("\n{:>5} {:>10} {:>10} {:>10}", "t", "theta", "theta'", "residual");
    for s in &check.samples {
        println!("{:>5.1} {:>10.5} {:>10.5} {:>10.2e}", s.t, s.theta, s.theta_dot, s.residual);
    }
    println!(
        "\nmax discrepancy {:.2e}, level identity {:.2e}, pendulum energy drift {:.2e}",
        check.max_discrepancy, check.max_level_residual, check.energy_drift
    );
    Ok(())
}
