//! Lyapunov exponents of the Zorich cocycle on the reversal class.
//!
//! cargo run --release --example lyapunov_ratios -- [d] [blocks]

use tiling_billiards::deviations::estimate_lyapunov_ratios;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let d: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4);
    let n = args.next().map(|s| s.parse::<f64>()).transpose()?.map_or(100_000, |x| x as u64);
    let spec = estimate_lyapunov_ratios(d, n, 7)?;
    println!("full spectrum {:.4?}", spec.full_spectrum);
    for (i, (r, w)) in spec.ratios.iter().zip(&spec.ratio_half_widths).enumerate() {
        println!("theta_{}/theta_1 = {r:.4} +- {w:.4}", i + 2);
    }
    Ok(())
}
