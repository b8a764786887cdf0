//! The deviation vector of a pentagon and its linear description by Q.

use tiling_billiards::deviations::{build_q, deviation_vector, displacement_vectors};
use tiling_billiards::geometry::build_polygon;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let polygon = build_polygon(&[0.15, 0.2, 0.25, 0.4, 1.8])?;
    let data = displacement_vectors(&polygon, 0.0);
    let dv = deviation_vector(&data)?;
    println!("|m| = {:.6}", data.m.norm());
    println!("H = {:.6?}", dv.h);
    let orth: f64 = dv.h.iter().zip(polygon.short_arcs()).map(|(h, a)| h * a).sum();
    println!("<H, arcs> = {orth:.2e}");

    let q = build_q(&polygon);
    println!("Q is {}x{} of rank {}", q.matrix.len(), q.basis.len(), q.rank);
    for row in q.transposed() {
        println!("  {:>9.5?}", row);
    }
    let s = 1.0 / polygon.radius();
    println!("reconstruction error at the polygon's scale: {:.2e}", q.reconstruction_error(s).unwrap());
    println!(
        "odd minor {:.6e} vs product formula {:.6e}",
        q.odd_minor_determinant(),
        q.odd_minor_prediction()
    );
    Ok(())
}
