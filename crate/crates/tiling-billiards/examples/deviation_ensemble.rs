//! Fitted exponents over random pentagons, run in parallel.
//!
//! cargo run --release --example deviation_ensemble -- [members] [n_max]

use tiling_billiards::deviations::deviation_ensemble;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let count: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(16);
    let n_max = args.next().map(|s| s.parse::<f64>()).transpose()?.map_or(100_000, |x| x as u64);
    let report = deviation_ensemble(5, count, n_max, 2024)?;
    for m in &report.members {
        println!("#{:<3} tau {:.3} exponent {:.3} +- {:.3}", m.index, m.tau, m.fitted_exponent, m.ci);
    }
    println!("{}", report.summary_line());
    Ok(())
}
