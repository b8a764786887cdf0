//! Birkhoff sums of the deviation function and the growth exponent of
//! their envelope.
//!
//! The exponent is a finite-scale stand-in for a limsup: the slope of
//! `log(running max of |S_n h|)` against `log n`, fitted by least squares
//! over the checkpoints in the upper half of the logarithmic range.

use serde::{Deserialize, Serialize};
use std::ops::Add;

use super::{deviation_vector, displacement_vectors};
use crate::geometry::CyclicPolygon;
use crate::iet::{at_step, BilliardMap, Iet};
use crate::{Error, Result};

/// `sum_{k<n} w(T^k x0)` where `w` is constant on each interval.
pub fn birkhoff_sum<W>(iet: &Iet, weights: &[W], x0: f64, n: u64) -> Result<W>
where
    W: Copy + Default + Add<Output = W>,
{
    if weights.len() != iet.d() {
        return Err(Error::InvalidArgument("one weight per interval".into()));
    }
    let mut acc = W::default();
    let mut x = x0;
    for i in 0..n {
        let (y, label) = iet.eval_labelled(x).map_err(|e| at_step(e, i as usize))?;
        acc = acc + weights[label];
        x = y;
    }
    Ok(acc)
}

/// `round(2^{j/2})` for `j = 0, 1, ...` up to `n_max`, without repeats,
/// closed by `n_max` itself.
pub fn checkpoints(n_max: u64) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    for j in 0.. {
        let n = 2f64.powf(j as f64 / 2.0).round() as u64;
        if n > n_max {
            break;
        }
        if out.last() != Some(&n) {
            out.push(n);
        }
    }
    if out.last() != Some(&n_max) {
        out.push(n_max);
    }
    out
}

pub fn running_max(values: &[f64]) -> Vec<f64> {
    let mut m = f64::NEG_INFINITY;
    values
        .iter()
        .map(|&v| {
            m = m.max(v);
            m
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    #[serde(with = "nan_as_null")]
    pub exponent: f64,
    /// 95% half-width from the slope's standard error.
    #[serde(with = "nan_as_null")]
    pub half_width: f64,
    pub n_points: usize,
}

pub fn fit_envelope_exponent(ns: &[u64], envelope: &[f64]) -> ExponentFit {
    let nan = ExponentFit { exponent: f64::NAN, half_width: f64::NAN, n_points: 0 };
    if ns.len() < 2 {
        return nan;
    }
    let lo = (ns[0] as f64).ln();
    let hi = (*ns.last().unwrap() as f64).ln();
    let mid = 0.5 * (lo + hi);
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(envelope)
        .filter(|(&n, _)| (n as f64).ln() >= mid)
        .map(|(&n, &v)| ((n as f64).ln(), v))
        .collect();
    if pts.len() < 3 || pts.iter().any(|&(_, v)| v.is_nan() || v <= 0.0) {
        return ExponentFit { n_points: pts.len(), ..nan };
    }
    let k = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, v)| (a + x / k, b + v.ln() / k));
    let sxx: f64 = pts.iter().map(|&(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|&(x, v)| (x - mx) * (v.ln() - my)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = pts.iter().map(|&(x, v)| (v.ln() - my - slope * (x - mx)).powi(2)).sum();
    let se = (ssr / (k - 2.0) / sxx).sqrt();
    ExponentFit { exponent: slope, half_width: 1.96 * se, n_points: pts.len() }
}

/// `|S_n h(x0)|` at the checkpoints for step values `h` on the intervals
/// of `iet`.
pub fn deviation_series_with_weights(iet: &Iet, h: &[f64], x0: f64, ns: &[u64]) -> Result<Vec<f64>> {
    if h.len() != iet.d() {
        return Err(Error::InvalidArgument("one weight per interval".into()));
    }
    let mut out = Vec::with_capacity(ns.len());
    let mut acc = 0.0;
    let mut x = x0;
    let mut n = 0u64;
    for &target in ns {
        while n < target {
            let (y, label) = iet.eval_labelled(x).map_err(|e| at_step(e, n as usize))?;
            acc += h[label];
            x = y;
            n += 1;
        }
        out.push(acc.abs());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationParams {
    pub arcs: Vec<f64>,
    pub tau: f64,
    pub x0: f64,
    pub n_max: u64,
    /// Start actually used when the requested one ran into a breakpoint.
    pub perturbed_x0: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub format_version: u32,
    pub params: DeviationParams,
    pub m_re: f64,
    pub m_im: f64,
    pub h: Vec<f64>,
    #[serde(with = "nan_as_null")]
    pub fitted_exponent: f64,
    #[serde(with = "nan_as_null")]
    pub ci: f64,
    pub checkpoints: Vec<u64>,
    pub dev_abs: Vec<f64>,
    pub running_max: Vec<f64>,
}

impl DeviationReport {
    pub fn m_modulus(&self) -> f64 {
        self.m_re.hypot(self.m_im)
    }

    pub fn summary_line(&self) -> String {
        format!(
            "fitted_exponent={:.6} ci={:.6} |m|={:.6e} n_max={}",
            self.fitted_exponent,
            self.ci,
            self.m_modulus(),
            self.params.n_max
        )
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("n,dev_abs,running_max\n");
        for ((n, d), r) in self.checkpoints.iter().zip(&self.dev_abs).zip(&self.running_max) {
            out.push_str(&format!("{n},{d:e},{r:e}\n"));
        }
        out
    }
}

/// Deviation series of the billiard with the given polygon and chord
/// parameter, started from `x0` in `(0, 1)`.
pub fn deviation_series(polygon: &CyclicPolygon, x0: f64, tau: f64, n_max: u64) -> Result<DeviationReport> {
    let map = BilliardMap::new(polygon, tau)?;
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(Error::InvalidArgument(format!("x0 = {x0} must lie in (0, 1)")));
    }
    let data = displacement_vectors(polygon, x0);
    let h = deviation_vector(&data)?.h;
    let iet = map.t_iet();
    let ns = checkpoints(n_max);
    let mut start = x0;
    let mut perturbed = None;
    let dev = loop {
        match deviation_series_with_weights(&iet, &h, start, &ns) {
            Ok(v) => break v,
            Err(Error::HitDiscontinuity(_)) if perturbed.is_none_or(|p: f64| (p - x0).abs() < 1e-6) => {
                start = (start + 1e-9).rem_euclid(1.0);
                perturbed = Some(start);
            }
            Err(e) => return Err(e),
        }
    };
    let env = running_max(&dev);
    let fit = fit_envelope_exponent(&ns, &env);
    Ok(DeviationReport {
        format_version: 1,
        params: DeviationParams { arcs: polygon.arcs().to_vec(), tau, x0, n_max, perturbed_x0: perturbed, seed: None },
        m_re: data.m.re,
        m_im: data.m.im,
        h,
        fitted_exponent: fit.exponent,
        ci: fit.half_width,
        checkpoints: ns,
        dev_abs: dev,
        running_max: env,
    })
}

pub(crate) mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_schedule() {
        assert_eq!(checkpoints(10), vec![1, 2, 3, 4, 6, 8, 10]);
        let c = checkpoints(1_000_000);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*c.last().unwrap(), 1_000_000);
    }

    #[test]
    fn constant_weights_count_steps() {
        let t = Iet::reversal(vec![0.3, 0.3, 0.4]).unwrap();
        assert_eq!(birkhoff_sum(&t, &[1u64, 1, 1], 0.123, 1000).unwrap(), 1000);
    }

    #[test]
    fn zero_weights_give_nan_exponent() {
        let t = Iet::reversal(vec![0.3, 0.3, 0.4]).unwrap();
        let ns = checkpoints(10_000);
        let dev = deviation_series_with_weights(&t, &[0.0; 3], 0.123, &ns).unwrap();
        assert!(dev.iter().all(|&v| v == 0.0));
        assert!(fit_envelope_exponent(&ns, &running_max(&dev)).exponent.is_nan());
    }

    #[test]
    fn synthetic_power_laws() {
        let ns = checkpoints(10_000_000_000);
        for rho in [0.2, 1.0 / 3.0, 0.5, 0.8] {
            let v: Vec<f64> = ns.iter().map(|&n| 2.5 * (n as f64).powf(rho) * (1.0 + 0.1 * (n as f64).ln().sin())).collect();
            let fit = fit_envelope_exponent(&ns, &running_max(&v));
            assert!((fit.exponent - rho).abs() < 0.02, "{rho}: {}", fit.exponent);
        }
    }

    #[test]
    fn report_json_has_null_for_nan() {
        let fit = ExponentFit { exponent: f64::NAN, half_width: 0.1, n_points: 0 };
        let s = serde_json::to_string(&fit).unwrap();
        assert!(s.contains("\"exponent\":null"));
        let back: ExponentFit = serde_json::from_str(&s).unwrap();
        assert!(back.exponent.is_nan());
    }
}
