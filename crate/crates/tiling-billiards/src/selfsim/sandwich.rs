//! Two-sided power bounds on `S_n h` for a billiard over a self-similar
//! exchange.
//!
//! Upper bound: with `H = alpha W2 + U` (no `W1` part since `h` has mean
//! zero), the decomposition of a prefix gives
//! `|S_n h| <= D_rig |lambda2|^l` where
//! `D_rig = 2(K-1) (|alpha| ||W2|| |lambda2| / (|lambda2| - 1) + sup_l u_l)`
//! and `u_l = sum_{k<=l} ||(M^T)^k U|| / |lambda2|^l`. Since
//! `n >= A lambda1^l`, this yields `C1 = D_rig A^(-rho)`.
//!
//! Lower bound: at level `l` let `L_l` be the length of the partial tower
//! read before the orbit reaches the base of a tower of order `l`, and `w`
//! the coding of the point reached. If `|S_{L_l} h| > eps |lambda2|^l` the
//! checkpoint is `n_l = L_l`; otherwise it is `L_l + |sigma^l(w_0..w_i)|`
//! with `w_i` the first letter where `W2` does not vanish. Here
//! `eps = |alpha| mu / 2`, `mu` the smallest nonzero `|W2_a|`.

use serde::{Deserialize, Serialize};

use super::decompose::TowerData;
use super::SelfSimilarSystem;
use crate::deviations::{checkpoints, deviation_vector, displacement_vectors, fit_envelope_exponent, running_max};
use crate::geometry::build_polygon;
use crate::iet::BilliardMap;
use crate::linalg::{dot, sup_norm};
use crate::{Error, Result, ALPHA_THRESHOLD};

const W2_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundPoint {
    pub l: usize,
    /// Length of the partial tower, `m_l` in the lower-bound construction.
    pub partial: u64,
    /// `true` when the partial tower alone already deviates enough.
    pub first_case: bool,
    /// Index of the first letter of `w` with `W2` nonzero (second case).
    pub letter_index: Option<usize>,
    pub n_l: u64,
    pub s_abs: f64,
    /// `|S_{n_l} h| / n_l^rho`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub format_version: u32,
    pub a_n: f64,
    pub tau: f64,
    pub x0: f64,
    pub n_max: u64,
    pub rho: f64,
    pub m_re: f64,
    pub m_im: f64,
    pub h: Vec<f64>,
    pub alpha: f64,
    /// Component of `H` along `W1`; zero up to rounding.
    pub c1: f64,
    pub u: Vec<f64>,
    /// `|alpha| |lambda2| / (|lambda2| - 1) 2(K-1) ||W2|| + 1`.
    pub d_tower: f64,
    /// `D exp(rho log A)`.
    pub d_prime_tower: f64,
    pub d_rigorous: f64,
    pub c1_bound: f64,
    /// `C1 / D'`.
    pub margin: f64,
    pub upper_max_ratio: f64,
    pub upper_holds: bool,
    pub mu: f64,
    pub letter_index_bound: usize,
    pub l0: usize,
    /// `(|alpha| / 2) exp(-C / log lambda1)`.
    pub c2_half: f64,
    /// `(|alpha| / 4) exp(-C / log lambda1)`.
    pub c2_quarter: f64,
    /// `(|alpha| / 2) C^(-rho)`.
    pub c2_power: f64,
    /// `(|alpha| mu / 4) B'^(-rho)`, the constant the construction proves.
    pub c2_rigorous: f64,
    pub lower_points: Vec<LowerBoundPoint>,
    pub lower_min_ratio: f64,
    /// Names of the `C2` candidates that hold at every `n_l` with `l >= l0`.
    pub certified: Vec<String>,
    pub lower_holds: bool,
    pub envelope_exponent: f64,
    pub envelope_half_width: f64,
    pub slope_ok: bool,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.upper_holds && self.lower_holds && self.slope_ok
    }

    pub fn summary_line(&self) -> String {
        format!(
            "alpha={:.6e} C1={:.6e} C2={:.6e} rho={:.6} slope={:.6} upper={} lower={}",
            self.alpha, self.c1_bound, self.c2_quarter, self.rho, self.envelope_exponent, self.upper_holds, self.lower_holds
        )
    }
}

pub fn verify_sandwich(sys: &SelfSimilarSystem, a_n: f64, tau: f64, x0: f64, n_max: u64) -> Result<SandwichReport> {
    if n_max < 16 {
        return Err(Error::InvalidArgument("n_max must be at least 16".into()));
    }
    let mut arcs = sys.v.clone();
    arcs.push(a_n);
    let polygon = build_polygon(&arcs)?;
    let map = BilliardMap::new(&polygon, tau)?;
    let data = displacement_vectors(&polygon, 0.0);
    let h = deviation_vector(&data)?.h;

    let alpha = dot(&h, &sys.v2) / dot(&sys.w2, &sys.v2);
    if alpha.abs() <= ALPHA_THRESHOLD {
        return Err(Error::HInE3 { alpha });
    }
    let c1 = dot(&h, &sys.v) / dot(&sys.w1, &sys.v);
    let u: Vec<f64> = (0..sys.d()).map(|i| h[i] - c1 * sys.w1[i] - alpha * sys.w2[i]).collect();

    let (l1, l2) = (sys.lambda1, sys.lambda2.abs());
    let k1 = (sys.k - 1) as f64;
    let w2n = sup_norm(&sys.w2);
    let a = sys.constants.a;
    let rho = sys.rho;

    // Birkhoff sums of h along the orbit of x0.
    let t = map.t_iet();
    let mut sums = Vec::with_capacity(n_max as usize + 1);
    sums.push(0.0);
    let mut y = x0;
    for i in 0..n_max {
        let (z, label) = t.eval_labelled(y).map_err(|e| crate::iet::at_step(e, i as usize))?;
        sums.push(sums.last().unwrap() + h[label]);
        y = z;
    }

    // upper bound
    let l_max = ((n_max as f64 / a).ln() / l1.ln()).floor().max(0.0) as usize + 2;
    let unorms = sys.transposed_orbit_norms(&u, l_max + 1);
    let mut u_sup: f64 = 0.0;
    let mut acc = 0.0;
    for &un in &unorms {
        acc = acc / l2 + un;
        u_sup = u_sup.max(acc);
    }
    let d_rigorous = 2.0 * k1 * (alpha.abs() * w2n * l2 / (l2 - 1.0) + u_sup);
    let c1_bound = d_rigorous * a.powf(-rho);
    let d_tower = alpha.abs() * l2 / (l2 - 1.0) * 2.0 * k1 * w2n + 1.0;
    let d_prime_tower = d_tower * (rho * a.ln()).exp();
    let ns = checkpoints(n_max);
    let dev: Vec<f64> = ns.iter().map(|&n| sums[n as usize].abs()).collect();
    let upper_max_ratio = ns.iter().zip(&dev).map(|(&n, d)| d / (n as f64).powf(rho)).fold(0.0, f64::max);
    let upper_holds = ns.iter().zip(&dev).all(|(&n, &d)| d <= c1_bound * (n as f64).powf(rho));

    // lower bound
    let mu = sys.w2.iter().map(|x| x.abs()).filter(|&x| x > W2_ZERO).fold(f64::INFINITY, f64::min);
    let letter_index_bound = if sys.w2.iter().any(|x| x.abs() <= W2_ZERO) { sys.primitivity_reach } else { 0 };
    let eps = alpha.abs() * mu / 2.0;
    let v: Vec<f64> = unorms.iter().enumerate().map(|(l, un)| (letter_index_bound + 1) as f64 * un / l2.powi(l as i32)).collect();
    let target = alpha.abs() * mu / 4.0;
    let l0 = (0..v.len()).find(|&l| v[l..].iter().all(|&x| x <= target)).unwrap_or(v.len());
    let c = sys.constants.c;
    let damp = (-c / l1.ln()).exp();
    let c2_half = alpha.abs() / 2.0 * damp;
    let c2_quarter = alpha.abs() / 4.0 * damp;
    let c2_power = alpha.abs() / 2.0 * c.powf(-rho);
    let b_prime = sys.constants.b * (k1 / (l1 - 1.0) + (letter_index_bound + 1) as f64);
    let c2_rigorous = alpha.abs() * mu / 4.0 * b_prime.powf(-rho);

    let towers = TowerData::new(sys)?;
    let lens = sys.image_lengths(l_max + 2);
    let mut lower_points = Vec::new();
    let mut cur = x0;
    let mut partial = 0u64;
    for (l, len_l) in lens.iter().enumerate().take(l_max + 2) {
        if partial > n_max {
            break;
        }
        let s_part = sums[partial as usize];
        let (lv, next) = towers.level(sys, cur)?;
        let point = if s_part.abs() > eps * l2.powi(l as i32) {
            Some((true, None, partial))
        } else {
            let w = towers.t.symbolic_coding(cur, letter_index_bound + sys.d() + 1)?;
            let i = w.iter().position(|&b| sys.w2[b].abs() > W2_ZERO).ok_or(Error::InvalidArgument("no letter charges W2".into()))?;
            let extra = w[..=i].iter().fold(0u64, |acc, &b| acc.saturating_add(len_l[b]));
            Some((false, Some(i), partial.saturating_add(extra)))
        };
        if let Some((first_case, letter_index, n_l)) = point {
            if n_l >= 1 && n_l <= n_max {
                let s_abs = sums[n_l as usize].abs();
                lower_points.push(LowerBoundPoint {
                    l,
                    partial,
                    first_case,
                    letter_index,
                    n_l,
                    s_abs,
                    ratio: s_abs / (n_l as f64).powf(rho),
                });
            }
        }
        partial = partial.saturating_add(lv.s.iter().fold(0u64, |acc, &b| acc.saturating_add(len_l[b])));
        cur = next;
    }
    let tail: Vec<&LowerBoundPoint> = lower_points.iter().filter(|p| p.l >= l0).collect();
    let lower_min_ratio = tail.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min);
    let mut certified = Vec::new();
    for (name, c2) in [("c2_rigorous", c2_rigorous), ("c2_power", c2_power), ("c2_half", c2_half), ("c2_quarter", c2_quarter)] {
        if !tail.is_empty() && tail.iter().all(|p| p.ratio >= c2) {
            certified.push(name.to_string());
        }
    }
    let lower_holds = certified.iter().any(|n| n == "c2_quarter");

    let env = running_max(&dev);
    let fit = fit_envelope_exponent(&ns, &env);
    let slope_ok = (fit.exponent - rho).abs() <= 0.05;

    Ok(SandwichReport {
        format_version: 1,
        a_n,
        tau,
        x0,
        n_max,
        rho,
        m_re: data.m.re,
        m_im: data.m.im,
        h,
        alpha,
        c1,
        u,
        d_tower,
        d_prime_tower,
        d_rigorous,
        c1_bound,
        margin: c1_bound / d_prime_tower,
        upper_max_ratio,
        upper_holds,
        mu,
        letter_index_bound,
        l0,
        c2_half,
        c2_quarter,
        c2_power,
        c2_rigorous,
        lower_points,
        lower_min_ratio,
        certified,
        lower_holds,
        envelope_exponent: fit.exponent,
        envelope_half_width: fit.half_width,
        slope_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selfsim::search_loops;

    #[test]
    fn short_runs_rejected() {
        let sys = search_loops(4, 8).unwrap().remove(0);
        assert!(matches!(verify_sandwich(&sys, 1.02, 1.01, 0.5, 10), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn upper_constant_carries_tower_factor() {
        let sys = search_loops(4, 8).unwrap().remove(0);
        let r = verify_sandwich(&sys, 1.3, 1.15, 0.5, 20_000).unwrap();
        let l2 = sys.lambda2.abs();
        let w2n = sup_norm(&sys.w2);
        let expected = 2.0 * (sys.k - 1) as f64 * w2n * r.alpha.abs() * l2 / (l2 - 1.0) + 1.0;
        assert!((r.d_tower - expected).abs() < 1e-12 * expected);
        assert!(r.upper_holds, "max ratio {} vs C1 {}", r.upper_max_ratio, r.c1_bound);
        // the decomposition of h is exact
        let rebuilt: Vec<f64> = (0..sys.d()).map(|i| r.c1 * sys.w1[i] + r.alpha * sys.w2[i] + r.u[i]).collect();
        for (a, b) in rebuilt.iter().zip(&r.h) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
