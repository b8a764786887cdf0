//! Rauzy and Zorich induction on a four-interval exchange, and the Rokhlin
//! towers the induction builds.

use tiling_billiards::iet::{rauzy_step_renormalized, rokhlin_towers, zorich_step, Iet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let iet = Iet::reversal(vec![0.31, 0.17, 0.29, 0.23])?;

    let mut cur = iet.clone();
    for _ in 0..6 {
        let (next, rec) = rauzy_step_renormalized(&cur)?;
        println!("{:?}  -> {}  lengths {:.4?}", rec.step, rec.resulting_perm, next.lengths());
        cur = next;
    }

    let (_, block) = zorich_step(&iet)?;
    println!("first Zorich block: {} steps of type {:?}", block.count, block.step);
    println!("matrix {:?}", block.matrix.rows());

    let towers = rokhlin_towers(&iet, 12)?;
    println!("after 12 steps: heights {:?}", towers.heights);
    println!("visit counts {:?}", towers.visit_counts.rows());
    // Heights times base lengths tile the interval.
    let area: f64 = towers.heights.iter().zip(&towers.base_lengths).map(|(h, b)| *h as f64 * b).sum();
    println!("tower area {area:.12}");
    Ok(())
}
