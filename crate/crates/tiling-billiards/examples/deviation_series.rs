//! Birkhoff sums of the deviation function along one orbit and the fitted
//! growth exponent of their running maximum.
//!
//! cargo run --release --example deviation_series -- [n_max]

use tiling_billiards::geometry::build_polygon;
use tiling_billiards::deviations::deviation_series;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n_max: u64 = std::env::args().nth(1).map(|s| s.parse::<f64>()).transpose()?.map_or(1_000_000, |x| x as u64);
    let polygon = build_polygon(&[0.21, 0.26, 0.19, 0.34, 1.6])?;
    let report = deviation_series(&polygon, 0.377, 1.25, n_max)?;
    for (i, n) in report.checkpoints.iter().enumerate().step_by(6) {
        println!("n = {n:>9}  |S_n h| = {:.4e}  max = {:.4e}", report.dev_abs[i], report.running_max[i]);
    }
    println!("{}", report.summary_line());
    Ok(())
}
