use std::fmt::Write as _;
use std::path::Path;

use super::{CyclicPolygon, Point, Trajectory};
use crate::{Error, Result};

const PALETTE: [&str; 6] = ["#8ecae6", "#ffb703", "#90be6d", "#f28482", "#b8b8ff", "#f6bd60"];

/// Standalone SVG: one filled path per visited tile, the trajectory as a
/// polyline. The tile of segment `i` is the one the trajectory travels
/// through between points `i` and `i + 1`; a trajectory that has not moved
/// shows its starting tile only.
pub fn render_svg(traj: &Trajectory, polygon: &CyclicPolygon) -> String {
    let verts = polygon.vertices();
    let n_tiles = traj.n_steps().max(1);
    let tiles: Vec<Vec<Point>> = traj.states[..n_tiles]
        .iter()
        .map(|s| verts.iter().map(|&v| s.placement.apply(v)).collect())
        .collect();

    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in tiles.iter().flatten().chain(traj.points.iter()) {
        lo = Point::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = Point::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    let margin = 0.05 * (hi.re - lo.re).max(hi.im - lo.im).max(1e-9);
    let (x0, y0) = (lo.re - margin, -hi.im - margin);
    let (w, h) = (hi.re - lo.re + 2.0 * margin, hi.im - lo.im + 2.0 * margin);
    let stroke = 0.002 * w.max(h);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0:.6} {y0:.6} {w:.6} {h:.6}">"#
    );
    for (i, tile) in tiles.iter().enumerate() {
        let mut d = String::new();
        for (k, p) in tile.iter().enumerate() {
            let _ = write!(d, "{}{:.6},{:.6} ", if k == 0 { "M" } else { "L" }, p.re, -p.im);
        }
        d.push('Z');
        let _ = writeln!(
            out,
            r#"<path d="{d}" fill="{}" fill-opacity="0.35" stroke="black" stroke-width="{:.6}"/>"#,
            PALETTE[i % PALETTE.len()],
            stroke / 2.0
        );
    }
    if traj.n_steps() > 0 {
        let pts: Vec<String> = traj.points.iter().map(|p| format!("{:.6},{:.6}", p.re, -p.im)).collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="crimson" stroke-width="{stroke:.6}"/>"#,
            pts.join(" ")
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn write_svg(traj: &Trajectory, polygon: &CyclicPolygon, out: &Path) -> Result<()> {
    std::fs::write(out, render_svg(traj, polygon)).map_err(|e| Error::InvalidArgument(format!("{}: {e}", out.display())))
}

/// Columns `step,side,px,py,x,tau`; the starting row has side 0.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("step,side,px,py,x,tau\n");
    for (i, s) in traj.states.iter().enumerate() {
        let side = if i == 0 { 0 } else { traj.sides_crossed[i - 1] };
        let _ = writeln!(out, "{i},{side},{:e},{:e},{:e},{:e}", s.position.re, s.position.im, s.x, s.tau);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_polygon, initial_state_from_coordinates, simulate_from_coordinates};

    #[test]
    fn element_counts() {
        let p = build_polygon(&[0.15, 0.2, 0.25, 0.4, 1.8]).unwrap();
        let t = simulate_from_coordinates(&p, 0.0731, 1.3, 200).unwrap();
        let svg = render_svg(&t, &p);
        assert_eq!(svg.matches("<path").count(), 200);
        let poly = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        assert_eq!(poly.matches(',').count(), 201);

        let rest = Trajectory::at_rest(initial_state_from_coordinates(&p, 0.05, 1.3).unwrap());
        let svg = render_svg(&rest, &p);
        assert_eq!(svg.matches("<path").count(), 1);
        assert!(!svg.contains("<polyline"));
    }
}
