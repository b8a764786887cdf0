//! Lyapunov exponents of the Zorich cocycle over the reversal permutation.
//!
//! Blocks act on a frame by `Y <- B^T Y`; the frame is re-orthonormalized
//! by QR and the logs of `|R_ii|` accumulate. Exponents are per block.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::iet::{zorich_block_fast, Permutation};
use crate::rng::{seeded, uniform_simplex};
use crate::{Error, Result};

const BATCHES: usize = 100;
const BOOTSTRAP: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatedSpectrum {
    pub d: usize,
    pub n_matrices: u64,
    pub seed: u64,
    /// Top three exponents.
    pub theta_hat: Vec<f64>,
    pub half_widths: Vec<f64>,
    /// `theta_2 / theta_1`, `theta_3 / theta_1`.
    pub ratios: Vec<f64>,
    pub ratio_half_widths: Vec<f64>,
    pub full_spectrum: Vec<f64>,
    /// Fresh length vectors drawn after degenerate steps.
    pub resamples: u64,
}

impl EstimatedSpectrum {
    pub fn summary_line(&self) -> String {
        format!(
            "theta={:?} ratios={:?} blocks={}",
            self.theta_hat.iter().map(|t| format!("{t:.5}")).collect::<Vec<_>>(),
            self.ratios.iter().map(|t| format!("{t:.5}")).collect::<Vec<_>>(),
            self.n_matrices
        )
    }
}

/// Re-orthonormalizes `y` in place and returns `ln |R_ii|`.
fn reorthonormalize(y: &mut DMatrix<f64>) -> Vec<f64> {
    let qr = y.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    let mut logs = Vec::with_capacity(r.nrows());
    for i in 0..r.nrows() {
        let rii = r[(i, i)];
        logs.push(rii.abs().ln());
        if rii < 0.0 {
            q.column_mut(i).neg_mut();
        }
    }
    *y = q;
    logs
}

pub fn estimate_lyapunov_ratios(d: usize, n_matrices: u64, seed: u64) -> Result<EstimatedSpectrum> {
    estimate_lyapunov_with(d, n_matrices, seed, 1)
}

/// As [`estimate_lyapunov_ratios`], with QR every `qr_interval` blocks.
pub fn estimate_lyapunov_with(d: usize, n_matrices: u64, seed: u64, qr_interval: u64) -> Result<EstimatedSpectrum> {
    if d < 4 {
        return Err(Error::InvalidArgument(format!("d = {d}, need at least 4")));
    }
    if n_matrices < BATCHES as u64 {
        return Err(Error::InvalidArgument(format!("need at least {BATCHES} blocks")));
    }
    if qr_interval == 0 {
        return Err(Error::InvalidArgument("qr_interval must be positive".into()));
    }
    let mut rng = seeded(seed);
    let base = Permutation::reversal(d);
    let mut perm = base.clone();
    let mut lengths = uniform_simplex(&mut rng, d);
    let mut y = DMatrix::<f64>::identity(d, d);
    let mut resamples = 0u64;

    let per_batch = n_matrices / BATCHES as u64;
    let mut batch_sums = vec![vec![0.0; d]; BATCHES];
    let mut pending = 0u64;
    let mut done = 0u64;
    while done < n_matrices {
        let (_, w, losses) = match zorich_block_fast(&mut lengths, &mut perm) {
            Ok(b) => b,
            Err(Error::DegenerateStep) => {
                lengths = uniform_simplex(&mut rng, d);
                perm = base.clone();
                resamples += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let total: f64 = lengths.iter().sum();
        lengths.iter_mut().for_each(|l| *l /= total);
        for (c, &k) in losses.iter().enumerate() {
            if k > 0 {
                for j in 0..d {
                    y[(c, j)] += k as f64 * y[(w, j)];
                }
            }
        }
        done += 1;
        pending += 1;
        if pending == qr_interval || done == n_matrices {
            let logs = reorthonormalize(&mut y);
            let b = ((done - 1) / per_batch).min(BATCHES as u64 - 1) as usize;
            for (s, l) in batch_sums[b].iter_mut().zip(logs) {
                *s += l;
            }
            pending = 0;
        }
    }

    let n = n_matrices as f64;
    let mut full: Vec<f64> = (0..d).map(|i| batch_sums.iter().map(|b| b[i]).sum::<f64>() / n).collect();
    full.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let top = |sums: &[Vec<f64>], count: f64| -> Vec<f64> {
        let mut v: Vec<f64> = (0..d).map(|i| sums.iter().map(|b| b[i]).sum::<f64>() / count).collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v.truncate(3);
        v
    };

    let mut boot_rng = seeded(seed ^ 0xB007_57A9);
    let mut boot_theta = Vec::with_capacity(BOOTSTRAP);
    let batch_len: Vec<f64> = (0..BATCHES)
        .map(|b| if b + 1 == BATCHES { (n_matrices - per_batch * (BATCHES as u64 - 1)) as f64 } else { per_batch as f64 })
        .collect();
    let idx: Vec<usize> = (0..BATCHES).collect();
    for _ in 0..BOOTSTRAP {
        let pick: Vec<usize> = (0..BATCHES).map(|_| *idx.choose(&mut boot_rng).unwrap()).collect();
        let sums: Vec<Vec<f64>> = pick.iter().map(|&b| batch_sums[b].clone()).collect();
        let count: f64 = pick.iter().map(|&b| batch_len[b]).sum();
        boot_theta.push(top(&sums, count));
    }
    let spread = |f: &dyn Fn(&[f64]) -> f64| -> f64 {
        let vals: Vec<f64> = boot_theta.iter().map(|t| f(t)).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
        1.96 * var.sqrt()
    };
    let theta_hat: Vec<f64> = full[..3].to_vec();
    let half_widths = (0..3).map(|i| spread(&|t| t[i])).collect();
    let ratios = vec![theta_hat[1] / theta_hat[0], theta_hat[2] / theta_hat[0]];
    let ratio_half_widths = vec![spread(&|t| t[1] / t[0]), spread(&|t| t[2] / t[0])];
    Ok(EstimatedSpectrum {
        d,
        n_matrices,
        seed,
        theta_hat,
        half_widths,
        ratios,
        ratio_half_widths,
        full_spectrum: full,
        resamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_spectrum_for_four_letters() {
        let s = estimate_lyapunov_ratios(4, 20_000, 1).unwrap();
        let f = &s.full_spectrum;
        assert!(f[0] > 0.0 && f[1] > 0.0);
        assert!((f[0] + f[3]).abs() < 0.05 * f[0]);
        assert!((f[1] + f[2]).abs() < 0.05 * f[0]);
    }

    #[test]
    fn same_seed_same_numbers() {
        let a = estimate_lyapunov_ratios(5, 2_000, 9).unwrap();
        let b = estimate_lyapunov_ratios(5, 2_000, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_small_d() {
        assert!(estimate_lyapunov_ratios(3, 1000, 0).is_err());
    }
}
