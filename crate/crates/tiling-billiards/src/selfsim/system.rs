use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::RauzyLoop;
use crate::error::SpectralFailure;
use crate::iet::{rauzy_step, Iet, StepKind, Substitution};
use crate::linalg::{dot, kernel_vector, sup_norm};
use crate::{Error, Result};

const GROWTH_HORIZON: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstants {
    /// `A lambda1^n < |sigma^n(x)|` for every letter and every `n`.
    pub a: f64,
    /// `|sigma^n(x)| < B lambda1^n`.
    pub b: f64,
    /// `max(A, (2K-2) B lambda1 / (lambda1 - 1))`.
    pub c: f64,
    /// Limits of `|sigma^n(x)| / lambda1^n`.
    pub limits: Vec<f64>,
    /// Horizon of the direct search; beyond it the limits, widened by the
    /// last observed gap, are used.
    pub horizon: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilarSystem {
    #[serde(rename = "loop")]
    pub rauzy_loop: RauzyLoop,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Moduli of the eigenvalues, largest first.
    pub spectrum_moduli: Vec<f64>,
    /// Perron vector of `M`, coordinates summing to one.
    pub v: Vec<f64>,
    /// Eigenvector of `M` for `lambda2`.
    pub v2: Vec<f64>,
    /// Perron vector of `M^T`, coordinates summing to one.
    pub w1: Vec<f64>,
    /// Eigenvector of `M^T` for `lambda2`, sup norm one.
    pub w2: Vec<f64>,
    pub k: usize,
    pub rho: f64,
    pub kappa: f64,
    pub constants: GrowthConstants,
    /// Smallest power of `M` with positive entries.
    pub primitivity_reach: usize,
    /// Distance between the lengths after one renormalized loop and `V`.
    pub self_similarity_residual: f64,
}

fn perron(m: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let d = m.nrows();
    let mut v = nalgebra::DVector::from_element(d, 1.0 / d as f64);
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let w = m * &v;
        let s = w.sum();
        let next = w / s;
        let delta = (&next - &v).amax();
        v = next;
        lambda = s;
        if delta < 1e-16 {
            break;
        }
    }
    (lambda, v.iter().cloned().collect())
}

fn eigvec(m: &DMatrix<f64>, lambda: f64) -> Vec<f64> {
    let d = m.nrows();
    kernel_vector(&(m - DMatrix::identity(d, d) * lambda))
}

fn growth_constants(sigma_m: &DMatrix<f64>, lambda1: f64, limits: &[f64], k: usize) -> GrowthConstants {
    let d = sigma_m.nrows();
    // lens[a] = |sigma^n(a)| / lambda1^n
    let mut lens = vec![1.0; d];
    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    for _ in 0..GROWTH_HORIZON {
        lens = (0..d).map(|a| (0..d).map(|b| sigma_m[(b, a)] * lens[b]).sum::<f64>() / lambda1).collect();
        for &r in &lens {
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    for (r, c) in lens.iter().zip(limits) {
        let gap = (r - c).abs();
        lo = lo.min(c - gap);
        hi = hi.max(c + gap);
    }
    let (a, b) = (lo * (1.0 - 1e-9), hi * (1.0 + 1e-9));
    let c = a.max((2 * k - 2) as f64 * b * lambda1 / (lambda1 - 1.0));
    GrowthConstants { a, b, c, limits: limits.to_vec(), horizon: GROWTH_HORIZON }
}

/// Runs Rauzy induction on the exchange with lengths `v` along `steps`
/// and returns the renormalized lengths, or `NotALoop` when the lengths do
/// not follow the path.
pub(crate) fn follow_loop(v: &[f64], lp: &RauzyLoop) -> Result<Iet> {
    let mut t = Iet::new(v.to_vec(), lp.base_perm.clone())?;
    for &kind in &lp.steps {
        let (next, rec) = rauzy_step(&t)?;
        if rec.step != kind {
            return Err(Error::NotALoop);
        }
        t = next;
    }
    Ok(t)
}

pub fn build_selfsim(lp: &RauzyLoop) -> Result<SelfSimilarSystem> {
    let d = lp.base_perm.len();
    let reach = lp.matrix.primitivity_exponent().ok_or(Error::NotPrimitive)?;
    let m = lp.matrix.to_f64();
    let mt = m.transpose();
    let (lambda1, v) = perron(&m);
    let residual = sup_norm(&(&m * nalgebra::DVector::from_vec(v.clone()) - nalgebra::DVector::from_vec(v.clone()) * lambda1).iter().cloned().collect::<Vec<_>>());
    if residual > 1e-10 || v.iter().any(|&x| x <= 0.0) {
        return Err(Error::SpectralHypothesisFailed(SpectralFailure::PerronFailed));
    }

    let mut eig: Vec<nalgebra::Complex<f64>> = m.complex_eigenvalues().iter().cloned().collect();
    eig.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
    let moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
    if d < 2 {
        return Err(Error::SpectralHypothesisFailed(SpectralFailure::SecondEigenvalueNotExpanding));
    }
    let l2 = eig[1];
    // An eigenvalue of modulus one shows up in floating point as a pair
    // split by ~1e-8; detect +-1 exactly before trusting the moduli.
    let unit_root = [1i64, -1].iter().any(|&z| {
        let mut shifted = lp.matrix.clone();
        for i in 0..d {
            shifted.set(i, i, shifted.get(i, i) - z);
        }
        shifted.determinant() == 0
    });
    if moduli[1] <= 1.0 + 1e-6 || (unit_root && moduli[1] <= 1.0 + 1e-3) {
        return Err(Error::SpectralHypothesisFailed(SpectralFailure::SecondEigenvalueNotExpanding));
    }
    if l2.im.abs() > 1e-9 * moduli[1] {
        return Err(Error::SpectralHypothesisFailed(SpectralFailure::SecondEigenvalueComplex));
    }
    if d > 2 && moduli[1] - moduli[2] <= 1e-8 {
        let failure = if (eig[2] - l2).norm() <= 1e-8 {
            SpectralFailure::SecondEigenvalueNotSimple
        } else {
            SpectralFailure::ModulusTie
        };
        return Err(Error::SpectralHypothesisFailed(failure));
    }
    let lambda2 = l2.re;

    let mut w1 = eigvec(&mt, lambda1);
    let s: f64 = w1.iter().sum();
    w1.iter_mut().for_each(|x| *x /= s);
    let mut w2 = eigvec(&mt, lambda2);
    let big = w2.iter().cloned().fold(0.0, |a: f64, x| if x.abs() > a.abs() { x } else { a });
    w2.iter_mut().for_each(|x| *x /= big);
    let v2 = eigvec(&m, lambda2);

    let induced = follow_loop(&v, lp)?;
    let total = induced.total();
    let self_similarity_residual =
        induced.lengths().iter().zip(&v).map(|(l, x)| (l / total - x).abs()).fold(0.0, f64::max);

    let k = lp.substitution.max_len();
    let wv = dot(&w1, &v);
    let limits: Vec<f64> = w1.iter().map(|x| x / wv).collect();
    let constants = growth_constants(&m, lambda1, &limits, k);
    let rho = lambda2.abs().ln() / lambda1.ln();
    let kappa = constants.c.ln() / lambda1.ln();
    Ok(SelfSimilarSystem {
        rauzy_loop: lp.clone(),
        lambda1,
        lambda2,
        spectrum_moduli: moduli,
        v,
        v2,
        w1,
        w2,
        k,
        rho,
        kappa,
        constants,
        primitivity_reach: reach,
        self_similarity_residual,
    })
}

impl SelfSimilarSystem {
    pub fn d(&self) -> usize {
        self.v.len()
    }

    pub fn substitution(&self) -> &Substitution {
        &self.rauzy_loop.substitution
    }

    pub fn steps(&self) -> &[StepKind] {
        &self.rauzy_loop.steps
    }

    pub fn iet(&self) -> Iet {
        Iet::new(self.v.clone(), self.rauzy_loop.base_perm.clone()).expect("positive Perron vector")
    }

    /// `|sigma^k(a)|` for `k = 0..=levels`, saturating.
    pub fn image_lengths(&self, levels: usize) -> Vec<Vec<u64>> {
        let d = self.d();
        let m = &self.rauzy_loop.matrix;
        let mut out = vec![vec![1u64; d]];
        for _ in 0..levels {
            let prev = out.last().unwrap();
            let next = (0..d)
                .map(|a| {
                    (0..d).fold(0u64, |acc, b| acc.saturating_add((m.get(b, a) as u64).saturating_mul(prev[b])))
                })
                .collect();
            out.push(next);
        }
        out
    }

    /// `||(M^T)^l u||_inf` for `l = 0..=levels`.
    pub fn transposed_orbit_norms(&self, u: &[f64], levels: usize) -> Vec<f64> {
        let mt = self.rauzy_loop.matrix.to_f64().transpose();
        let mut x = nalgebra::DVector::from_vec(u.to_vec());
        let mut out = Vec::with_capacity(levels + 1);
        for _ in 0..=levels {
            out.push(x.amax());
            x = &mt * x;
        }
        out
    }

    pub fn summary_line(&self) -> String {
        format!(
            "loop={} lambda1={:.6} lambda2={:.6} rho={:.6} K={} kappa={:.4}",
            self.rauzy_loop.steps_string(),
            self.lambda1,
            self.lambda2,
            self.rho,
            self.k,
            self.kappa
        )
    }
}
