//! The exchange maps attached to a cyclic polygon: the flipped map `Phi`
//! on the whole circle and its square `T` on the short sides.

use super::{FlippedIet, Iet, Permutation};
use crate::geometry::CyclicPolygon;
use crate::{Error, Result, EPS_BOUNDARY};

/// Closed form of `Phi` for a polygon and chord parameter.
///
/// `x` is the clockwise arc from the first vertex to the forward end of the
/// chord. On the arc of side `k`, `Phi(x) = tau + A_{k-1} + A_k - x` taken
/// modulo the circumference, where `A_k` are the cumulative arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct BilliardMap {
    cumulative: Vec<f64>,
    a_n: f64,
    tau: f64,
    circumference: f64,
}

impl BilliardMap {
    pub fn new(polygon: &CyclicPolygon, tau: f64) -> Result<Self> {
        let a_n = polygon.longest_arc();
        if !(tau > 1.0 && tau < a_n) {
            return Err(Error::TauOutOfRange { tau, a_n });
        }
        let n = polygon.n_sides();
        let mut cumulative: Vec<f64> = (0..n).map(|k| polygon.cumulative(k)).collect();
        cumulative.push(polygon.circumference());
        Ok(BilliardMap { cumulative, a_n, tau, circumference: polygon.circumference() })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn circumference(&self) -> f64 {
        self.circumference
    }

    /// Side (1-based) whose arc contains `x`.
    pub fn side_of(&self, x: f64) -> Result<usize> {
        if !(0.0..self.circumference).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        let n = self.cumulative.len() - 1;
        let eps = EPS_BOUNDARY * self.circumference;
        let k = (1..=n).find(|&k| x < self.cumulative[k]).unwrap_or(n);
        let near = |b: f64| (x - b).abs() < eps;
        let split = self.cumulative[n - 1] + self.tau;
        if (k > 1 && near(self.cumulative[k - 1])) || (k < n && near(self.cumulative[k])) || near(split) {
            return Err(Error::HitDiscontinuity(0));
        }
        Ok(k)
    }

    pub fn phi(&self, x: f64) -> Result<f64> {
        let k = self.side_of(x)?;
        let y = self.tau + self.cumulative[k - 1] + self.cumulative[k] - x;
        Ok(if y >= self.circumference { y - self.circumference } else { y })
    }

    /// `Phi^2` on the short sides.
    pub fn t(&self, x: f64) -> Result<f64> {
        self.phi(self.phi(x)?)
    }

    /// Whether `x` is a possible position: a short-side arc, or the image
    /// of one.
    pub fn is_physical(&self, x: f64) -> bool {
        let one = self.cumulative[self.cumulative.len() - 2];
        (x > 0.0 && x < one) || (x > self.tau && x < self.tau + one)
    }

    /// The flipped exchange on `N + 1` labels: the short sides `0..N-1`,
    /// then the piece of the long arc of length `tau` (label `N-1`) and the
    /// rest of the long arc (label `N`).
    pub fn as_flipped(&self) -> FlippedIet {
        let n = self.cumulative.len() - 1;
        let mut lengths: Vec<f64> = (1..n).map(|k| self.cumulative[k] - self.cumulative[k - 1]).collect();
        lengths.push(self.tau);
        lengths.push(self.a_n - self.tau);
        let top: Vec<usize> = (0..=n).collect();
        let mut bottom = vec![n - 1];
        bottom.extend(0..n - 1);
        bottom.push(n);
        FlippedIet::new(lengths, Permutation { top, bottom }, vec![true; n + 1])
            .expect("billiard exchange is well formed")
    }

    /// The reversal exchange `T` on the short sides.
    pub fn t_iet(&self) -> Iet {
        let n = self.cumulative.len() - 1;
        Iet::reversal((1..n).map(|k| self.cumulative[k] - self.cumulative[k - 1]).collect())
            .expect("positive arcs")
    }
}

/// `Phi` as a flipped exchange.
pub fn make_phi(polygon: &CyclicPolygon, tau: f64) -> Result<FlippedIet> {
    Ok(BilliardMap::new(polygon, tau)?.as_flipped())
}

/// The square of a billiard exchange restricted to its leading intervals
/// (all but the two pieces of the long arc), computed by composing
/// branches.
pub fn square_restrict(phi: &FlippedIet) -> Result<Iet> {
    let d = phi.perm.len();
    if d < 4 {
        return Err(Error::InvalidArgument("a billiard exchange has at least four labels".into()));
    }
    let keep = &phi.perm.top[..d - 2];
    let end: f64 = keep.iter().map(|&l| phi.lengths[l]).sum();
    let top_start = super::starts(&phi.lengths, &phi.perm.top);
    let bottom_start = super::starts(&phi.lengths, &phi.perm.bottom);

    let mut targets = phi.breakpoints();
    targets.push(end);
    let mut cuts: Vec<f64> = targets.iter().cloned().filter(|&b| b < end).collect();
    for &l in keep {
        let (s, b, len) = (top_start[l], bottom_start[l], phi.lengths[l]);
        for &y in &targets {
            if y > b && y < b + len {
                cuts.push(if phi.flips[l] { s + (b + len - y) } else { s + (y - b) });
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = 1e3 * f64::EPSILON;
    let mut edges = vec![0.0];
    for c in cuts {
        if c > tol && end - c > tol && c - edges.last().unwrap() > tol {
            edges.push(c);
        }
    }
    edges.push(end);

    let mut lengths = Vec::new();
    let mut image_starts = Vec::new();
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let q1 = lo + 0.25 * (hi - lo);
        let q3 = lo + 0.75 * (hi - lo);
        let sq = |x: f64| phi.eval(x).and_then(|y| phi.eval(y));
        let (y1, y3) = (sq(q1)?, sq(q3)?);
        let slope = (y3 - y1) / (q3 - q1);
        if (slope - 1.0).abs() > 1e-6 {
            return Err(Error::ConditionC1Violated);
        }
        let start = y1 - (q1 - lo);
        if start < -tol || start + (hi - lo) > end + tol {
            return Err(Error::ConditionC1Violated);
        }
        lengths.push(hi - lo);
        image_starts.push(start);
    }
    let p = lengths.len();
    let mut bottom: Vec<usize> = (0..p).collect();
    bottom.sort_by(|&a, &b| image_starts[a].partial_cmp(&image_starts[b]).unwrap());
    let t = Iet::new(lengths, Permutation::new((0..p).collect(), bottom)?)?;

    // pointwise check against the composition
    let samples = 4096;
    for i in 0..samples {
        let x = (i as f64 + 0.5) / samples as f64 * end;
        let (Ok(direct), Ok(y)) = (t.eval(x), phi.eval(x)) else { continue };
        let Ok(composed) = phi.eval(y) else { continue };
        if (direct - composed).abs() > 1e-12 {
            return Err(Error::ConditionC1Violated);
        }
    }
    Ok(t)
}
