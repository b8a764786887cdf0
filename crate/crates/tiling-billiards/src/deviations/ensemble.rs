//! Deviation exponents over many random polygons.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::deviation_series;
use super::series::nan_as_null;
use crate::geometry::random_billiard;
use crate::rng::{member_seed, seeded};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub index: u64,
    pub seed: u64,
    pub arcs: Vec<f64>,
    pub tau: f64,
    pub x0: f64,
    #[serde(with = "nan_as_null")]
    pub fitted_exponent: f64,
    #[serde(with = "nan_as_null")]
    pub ci: f64,
    pub m_modulus: f64,
    /// `|m|` too small for a deviation vector; no exponent.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub format_version: u32,
    pub n_sides: usize,
    pub n_max: u64,
    pub seed: u64,
    pub members: Vec<EnsembleMember>,
    #[serde(with = "nan_as_null")]
    pub median_exponent: f64,
    #[serde(with = "nan_as_null")]
    pub max_exponent: f64,
}

impl EnsembleReport {
    pub fn summary_line(&self) -> String {
        format!(
            "members={} degenerate={} median_exponent={:.6} max_exponent={:.6} n_max={}",
            self.members.len(),
            self.members.iter().filter(|m| m.degenerate).count(),
            self.median_exponent,
            self.max_exponent,
            self.n_max
        )
    }
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Member `i` draws its polygon from `member_seed(seed, i)`; members run
/// in parallel and are reported in index order.
pub fn deviation_ensemble(n_sides: usize, count: u64, n_max: u64, seed: u64) -> Result<EnsembleReport> {
    if count == 0 {
        return Err(Error::InvalidArgument("ensemble needs at least one member".into()));
    }
    let members: Vec<EnsembleMember> = (0..count)
        .into_par_iter()
        .map(|i| -> Result<EnsembleMember> {
            let s = member_seed(seed, i);
            let b = random_billiard(&mut seeded(s), n_sides)?;
            let base = EnsembleMember {
                index: i,
                seed: s,
                arcs: b.polygon.arcs().to_vec(),
                tau: b.tau,
                x0: b.x0,
                fitted_exponent: f64::NAN,
                ci: f64::NAN,
                m_modulus: 0.0,
                degenerate: false,
            };
            match deviation_series(&b.polygon, b.x0, b.tau, n_max) {
                Ok(r) => Ok(EnsembleMember { fitted_exponent: r.fitted_exponent, ci: r.ci, m_modulus: r.m_modulus(), ..base }),
                Err(Error::MeanDegenerate { modulus }) => Ok(EnsembleMember { m_modulus: modulus, degenerate: true, ..base }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let mut ex: Vec<f64> = members.iter().map(|m| m.fitted_exponent).filter(|e| e.is_finite()).collect();
    let max_exponent = ex.iter().cloned().fold(f64::NAN, f64::max);
    let median_exponent = median(&mut ex);
    Ok(EnsembleReport { format_version: 1, n_sides, n_max, seed, members, median_exponent, max_exponent })
}
