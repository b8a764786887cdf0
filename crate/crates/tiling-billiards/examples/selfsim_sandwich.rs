//! Searches short Rauzy loops for self-similar systems and checks the
//! two-sided power bound on the first one.
//!
//! cargo run --release --example selfsim_sandwich -- [a_N] [n_max]

use tiling_billiards::selfsim::{search_loops, verify_sandwich};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let a_n: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1.02);
    let n_max = args.next().map(|s| s.parse::<f64>()).transpose()?.map_or(1_000_000, |x| x as u64);

    let systems = search_loops(4, 10)?;
    println!("{} systems with loops of length <= 10", systems.len());
    let sys = &systems[0];
    println!("{}", sys.summary_line());
    println!("V = {:.6?}", sys.v);

    let report = verify_sandwich(sys, a_n, 0.5 * (1.0 + a_n), 0.5, n_max)?;
    println!("alpha = {:.4e}, certified lower constants: {:?}", report.alpha, report.certified);
    for p in report.lower_points.iter().take(8) {
        println!("  level {:>2}: n = {:>8}  |S|/n^rho = {:.4}", p.l, p.n_l, p.ratio);
    }
    println!("{}", report.summary_line());
    Ok(())
}
