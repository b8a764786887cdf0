//! Steps a trajectory through a pentagon tiling and writes the SVG and CSV.
//!
//! cargo run --example simulate_trajectory -- [steps] [out_dir]

use std::path::PathBuf;

use tiling_billiards::geometry::{build_polygon, chord_parameter, render_svg, simulate_from_coordinates, trajectory_csv};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let steps: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "simulate-out".into()));

    let polygon = build_polygon(&[0.15, 0.2, 0.25, 0.4, 1.8])?;
    let (x0, tau) = (0.0731, 1.3);
    let traj = simulate_from_coordinates(&polygon, x0, tau, steps)?;

    let drift = traj.states.iter().map(|s| (chord_parameter(s, &polygon) - tau).abs()).fold(0.0, f64::max);
    println!("radius {:.6}, {} steps", polygon.radius(), traj.n_steps());
    if let Some(i) = traj.terminated_at_corner {
        println!("stopped at a corner on step {i}");
    }
    println!("max |tau drift| = {drift:.2e}");
    println!("first sides crossed: {:?}", &traj.sides_crossed[..traj.n_steps().min(12)]);

    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("trajectory.svg"), render_svg(&traj, &polygon))?;
    std::fs::write(out.join("trajectory.csv"), trajectory_csv(&traj))?;
    println!("wrote {}", out.display());
    Ok(())
}
