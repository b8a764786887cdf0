//! Rauzy classes of the reversal permutations and one loop's cocycle.

use tiling_billiards::iet::{Permutation, StepKind};
use tiling_billiards::selfsim::{enumerate_rauzy_class, loop_matrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for d in 2..=6 {
        let class = enumerate_rauzy_class(&Permutation::reversal(d))?;
        println!(
            "d = {d}: {} labelled, {} reduced permutations, {} edges",
            class.nodes.len(),
            class.reduced_size,
            class.edges.len()
        );
    }

    use StepKind::{Bottom as B, Top as T};
    let lp = loop_matrix(&Permutation::reversal(4), &[T, T, B, T, B, B, T, B])?;
    println!("loop {} matrix:", lp.steps_string());
    for row in lp.matrix.rows() {
        println!("  {row:?}");
    }
    for a in 0..4 {
        println!("  sigma({a}) = {:?}", lp.substitution.image(a));
    }
    Ok(())
}
