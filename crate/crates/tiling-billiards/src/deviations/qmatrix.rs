//! The matrix `Q` expressing `|m|^2 H` as combinations of sines of arc
//! sums.
//!
//! With `u_j = e^{-i s A_j}`, every `f_k / r` is a signed sum of the `u_j`
//! (times the common phase `e^{-i s x_0}`), so
//! `Im(conj(m) f_k) / r^2` expands into terms `± a_j sin((A_q - A_p) s)`.
//! Coefficients are kept as integer linear forms in the arcs.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::displacement_vectors_at_scale;
use super::deviation_vector;
use crate::geometry::CyclicPolygon;
use crate::linalg::numerical_rank;

/// The arc sum `a_first + ... + a_last` (1-based, inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcSum {
    pub first: usize,
    pub last: usize,
}

impl ArcSum {
    pub fn value(&self, arcs: &[f64]) -> f64 {
        arcs[self.first - 1..self.last].iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QDecomposition {
    pub n_sides: usize,
    /// Arc sums ordered by number of terms, then by first index.
    pub basis: Vec<ArcSum>,
    /// `coefficients[k][i][j]`: coefficient of `a_{j+1}` in the entry of
    /// row `k` (component `H_{k+1}`) and basis element `i`.
    pub coefficients: Vec<Vec<Vec<i64>>>,
    pub arcs: Vec<f64>,
    /// `Q` evaluated at `arcs`, one row per component of `H`.
    pub matrix: Vec<Vec<f64>>,
    pub rank: usize,
}

/// Signed combination of the `u_j` making up `f_k / r`.
fn f_terms(k: usize, d: usize) -> [(i64, usize); 4] {
    [(1, k), (1, k - 1), (-1, d), (-1, 0)]
}

fn symbolic(d: usize) -> (Vec<ArcSum>, Vec<Vec<Vec<i64>>>) {
    let mut pairs: Vec<(usize, usize)> = (0..d).flat_map(|p| (p + 1..=d).map(move |q| (p, q))).collect();
    pairs.sort_by_key(|&(p, q)| (q - p, p));
    let index = |p: usize, q: usize| pairs.iter().position(|&x| x == (p, q)).unwrap();
    let mut coeffs = vec![vec![vec![0i64; d]; pairs.len()]; d];
    for k in 1..=d {
        for j in 1..=d {
            for (cp, p) in f_terms(j, d) {
                for (cq, q) in f_terms(k, d) {
                    if p == q {
                        continue;
                    }
                    // Im(conj(u_p) u_q) = -sin((A_q - A_p) s)
                    let sign = if q > p { -1 } else { 1 };
                    let i = index(p.min(q), p.max(q));
                    coeffs[k - 1][i][j - 1] += cp * cq * sign;
                }
            }
        }
    }
    let basis = pairs.iter().map(|&(p, q)| ArcSum { first: p + 1, last: q }).collect();
    (basis, coeffs)
}

pub fn build_q(polygon: &CyclicPolygon) -> QDecomposition {
    build_q_for_arcs(polygon.short_arcs())
}

/// `Q` for the short arcs alone (the long arc only enters through `s`).
pub fn build_q_for_arcs(arcs: &[f64]) -> QDecomposition {
    let d = arcs.len();
    let (basis, coefficients) = symbolic(d);
    let matrix: Vec<Vec<f64>> = coefficients
        .iter()
        .map(|row| row.iter().map(|form| form.iter().zip(arcs).map(|(&c, a)| c as f64 * a).sum()).collect())
        .collect();
    let mut q = QDecomposition { n_sides: d + 1, basis, coefficients, arcs: arcs.to_vec(), matrix, rank: 0 };
    q.rank = rank_q(&q);
    q
}

pub fn rank_q(q: &QDecomposition) -> usize {
    numerical_rank(&q.to_dmatrix(), 1e-9)
}

impl QDecomposition {
    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let rows = self.matrix.len();
        let cols = self.basis.len();
        DMatrix::from_fn(rows, cols, |i, j| self.matrix[i][j])
    }

    /// Rows of the transpose: one per basis element.
    pub fn transposed(&self) -> Vec<Vec<f64>> {
        (0..self.basis.len()).map(|i| self.matrix.iter().map(|row| row[i]).collect()).collect()
    }

    /// `Theta(s)`: the sines of the basis arc sums.
    pub fn theta(&self, s: f64) -> Vec<f64> {
        self.basis.iter().map(|b| (b.value(&self.arcs) * s).sin()).collect()
    }

    pub fn q_theta(&self, s: f64) -> Vec<f64> {
        let th = self.theta(s);
        self.matrix.iter().map(|row| row.iter().zip(&th).map(|(a, b)| a * b).sum()).collect()
    }

    /// Largest gap between `Q Theta(s)` and `|s m|^2 H` at scale `s`
    /// (`None` when the mean vanishes there).
    pub fn reconstruction_error(&self, s: f64) -> Option<f64> {
        let data = displacement_vectors_at_scale(&self.arcs, s, 0.0);
        let h = deviation_vector(&data).ok()?.h;
        let scale = data.unit_mean().norm_sqr();
        let qt = self.q_theta(s);
        Some(h.iter().zip(&qt).map(|(hk, q)| (scale * hk - q).abs()).fold(0.0, f64::max))
    }

    /// Determinant of the minor of `ᵗQ` on the single arcs `a_2..a_{N-1}`
    /// and the components `H_1..H_{N-2}`.
    pub fn odd_minor_determinant(&self) -> f64 {
        let d = self.arcs.len();
        let t = self.transposed();
        DMatrix::from_fn(d - 1, d - 1, |i, j| t[i + 1][j]).determinant()
    }

    /// `a_{N-1} * prod_{k=2}^{N-2} (a_k + a_{k+1})`.
    pub fn odd_minor_prediction(&self) -> f64 {
        let a = &self.arcs;
        let d = a.len();
        a[d - 1] * (2..=d - 1).map(|k| a[k - 1] + a[k]).product::<f64>()
    }
}
