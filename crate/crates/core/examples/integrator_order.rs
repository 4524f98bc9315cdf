//! Measures the global convergence order of the fixed-step methods
//! against a tight adaptive reference.
//!
//! ```text
//! cargo run --example integrator_order
//! ```

use mbtop::integrate::{solve, IntegratorSpec, TopSystem};
use mbtop::model::Params;

fn main() -> mbtop::Result<()> {
    let b = Params::new(1.0, -2.0, 0.5)?;
    let sys = TopSystem::new(b);
    let x0 = [0.3, 1.0, -0.4];
    let t = 2.0;
    let exact = solve(&sys, x0, t, &IntegratorSpec::rk45(1e-13, 1e-15))?.last().1;
    let err = |y: [f64; 3]| (0..3).map(|i| (y[i] - exact[i]).abs()).fold(0.0, f64::max);

    for (name, make) in
        [("rk4", IntegratorSpec::rk4 as fn(f64) -> IntegratorSpec), ("midpoint", IntegratorSpec::midpoint)]
    {
        println!("{name}");
        let mut prev: Option<f64> = None;
        for h in [0.2, 0.1, 0.05, 0.025, 0.0125] {
            let e = err(solve(&sys, x0, t, &make(h))?.last().1);
            let order = prev.map(|p| (p / e).log2());
            println!("  h = {h:<7} error {e:.3e}  observed order {}", order.map_or("-".into(), |o| format!("{o:.2}")));
            prev = Some(e);
        }
    }
    Ok(())
}
