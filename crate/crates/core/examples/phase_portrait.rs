//! Writes a trajectory CSV and its SVG rendering (coordinate-plane
//! projections plus the drift of `H` and `C`).
//!
//! ```text
//! cargo run --example phase_portrait -- /tmp/portrait
//! ```

use std::path::PathBuf;

use mbtop::cli::{render_plot, trajectory_csv};
use mbtop::integrate::{integrate, IntegratorSpec};
use mbtop::model::{Preset, State};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&dir)?;
    let b = Preset::LorenzHamilton.params();
    let traj = integrate(&b, &State::new(0.0, 1.0, 0.0), 30.0, &IntegratorSpec::midpoint(0.05).sampled_every(0.05))?;
    let csv = trajectory_csv(&traj);
    let (csv_path, svg_path) = (dir.join("portrait.csv"), dir.join("portrait.svg"));
    std::fs::write(&csv_path, &csv)?;
    std::fs::write(&svg_path, render_plot(&csv)?)?;
    println!("wrote {} and {}", csv_path.display(), svg_path.display());
    Ok(())
}
