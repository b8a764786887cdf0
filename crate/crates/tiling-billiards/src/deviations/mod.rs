//! Displacements of the billiard, the deviation vector and its growth.
//!
//! Two consecutive crossings (side `k`, then the long side) translate the
//! tile by `f_k = r (e^{X_k} + e^{X_{k-1}} - e^{X_{N-1}} - e^{X_0})` with
//! `X_k = -i (x_0 + A_k) / r`. The mean displacement is
//! `m = sum a_k f_k`, and `G = f / m - 1`, `H = Im G` measure how far a
//! single double-step strays from it.

mod ensemble;
mod lyapunov;
mod qmatrix;
mod series;

pub use ensemble::{deviation_ensemble, EnsembleMember, EnsembleReport};
pub use lyapunov::{estimate_lyapunov_ratios, estimate_lyapunov_with, EstimatedSpectrum};
pub use qmatrix::{build_q, rank_q, ArcSum, QDecomposition};
pub use series::{
    birkhoff_sum, checkpoints, deviation_series, deviation_series_with_weights, fit_envelope_exponent,
    running_max, DeviationParams, DeviationReport, ExponentFit,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::CyclicPolygon;
use crate::{Error, Result, EPS_MEAN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementData {
    /// `f_1, ..., f_{N-1}`.
    pub f: Vec<Complex64>,
    /// `X_0, ..., X_{N-1}`.
    pub x_exp: Vec<Complex64>,
    pub m: Complex64,
    pub x0: f64,
    /// `1 / r`.
    pub s: f64,
    /// The short arcs the vectors were built from.
    pub arcs: Vec<f64>,
}

impl DisplacementData {
    /// Mean displacement of the unit-radius picture, `m / r`.
    pub fn unit_mean(&self) -> Complex64 {
        self.m * self.s
    }
}

pub fn displacement_vectors(polygon: &CyclicPolygon, x0: f64) -> DisplacementData {
    displacement_vectors_at_scale(polygon.short_arcs(), 1.0 / polygon.radius(), x0)
}

/// Displacement vectors for short arcs `arcs` and an arbitrary `s = 1/r`.
pub fn displacement_vectors_at_scale(arcs: &[f64], s: f64, x0: f64) -> DisplacementData {
    let d = arcs.len();
    let r = 1.0 / s;
    let mut x_exp = Vec::with_capacity(d + 1);
    let mut acc = 0.0;
    x_exp.push(Complex64::new(0.0, -s * x0));
    for a in arcs {
        acc += a;
        x_exp.push(Complex64::new(0.0, -s * (x0 + acc)));
    }
    // only X_0..X_{N-1} are used; X_{N-1} closes the short arcs
    let e: Vec<Complex64> = x_exp.iter().map(|x| x.exp()).collect();
    let f: Vec<Complex64> = (1..=d).map(|k| (e[k] + e[k - 1] - e[d] - e[0]) * r).collect();
    let m = f.iter().zip(arcs).map(|(fk, a)| fk * a).sum();
    DisplacementData { f, x_exp, m, x0, s, arcs: arcs.to_vec() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCheck {
    pub nonzero: bool,
    pub modulus: f64,
}

pub fn mean_is_nonzero(polygon: &CyclicPolygon, x0: f64) -> MeanCheck {
    let modulus = displacement_vectors(polygon, x0).m.norm();
    MeanCheck { nonzero: modulus > EPS_MEAN, modulus }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationVector {
    pub g: Vec<Complex64>,
    /// `H = Im G`, the values of the step function `h`.
    pub h: Vec<f64>,
    /// Right ends `A_1, ..., A_{N-1}` of the steps of `h`.
    pub breakpoints: Vec<f64>,
}

impl DeviationVector {
    /// `h(x)` for `x` in `[0, 1)`.
    pub fn h_at(&self, x: f64) -> f64 {
        let k = self.breakpoints.iter().position(|&b| x < b).unwrap_or(self.h.len() - 1);
        self.h[k]
    }
}

pub fn deviation_vector(data: &DisplacementData) -> Result<DeviationVector> {
    let modulus = data.m.norm();
    if modulus <= EPS_MEAN {
        return Err(Error::MeanDegenerate { modulus });
    }
    let g: Vec<Complex64> = data.f.iter().map(|fk| fk / data.m - 1.0).collect();
    let h = g.iter().map(|z| z.im).collect();
    let mut acc = 0.0;
    let breakpoints = data.arcs.iter().map(|a| {
        acc += a;
        acc
    });
    Ok(DeviationVector { g, h, breakpoints: breakpoints.collect() })
}
