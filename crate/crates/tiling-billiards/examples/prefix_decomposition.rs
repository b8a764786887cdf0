//! Splits an orbit prefix into images of the loop substitution.

use rand::Rng;
use tiling_billiards::rng::seeded;
use tiling_billiards::selfsim::{prefix_decompose, search_loops};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = search_loops(4, 8)?.into_iter().next().ok_or("no system")?;
    let t = sys.iet();
    let mut rng = seeded(5);
    for _ in 0..5 {
        let x: f64 = rng.gen();
        let n = rng.gen_range(10..5000);
        let dec = prefix_decompose(&sys, x, n)?;
        let coding = t.symbolic_coding(x, n)?;
        let sizes: Vec<usize> = dec.s_words.iter().map(Vec::len).collect();
        println!(
            "x = {x:.5} n = {n:>4}: level {}, |s_k| = {sizes:?}, |m| = {}, matches coding: {}",
            dec.l,
            dec.m_word.len(),
            dec.expand(&sys) == coding
        );
    }
    Ok(())
}
