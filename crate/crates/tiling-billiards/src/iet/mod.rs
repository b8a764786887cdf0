//! Interval exchange transformations, with and without flips.
//!
//! Intervals are half-open `[left, right)`. Orbit points closer than
//! [`EPS_BOUNDARY`](crate::EPS_BOUNDARY) (scaled by the total length) to an
//! interior breakpoint raise [`Error::HitDiscontinuity`].

mod billiard;
mod induction;
mod permutation;

pub use billiard::{make_phi, square_restrict, BilliardMap};
pub use induction::{
    rauzy_step, rauzy_step_renormalized, rokhlin_towers, zorich_step, zorich_step_renormalized,
    InductionRecord, RecordKind, RokhlinTowers, Substitution,
};
pub(crate) use induction::zorich_block_fast;
pub use permutation::{Permutation, StepKind};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, EPS_BOUNDARY};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct IetData {
    lengths: Vec<f64>,
    top: Vec<usize>,
    bottom: Vec<usize>,
}

/// Interval exchange without flips. `lengths` is indexed by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IetData", into = "IetData")]
pub struct Iet {
    lengths: Vec<f64>,
    perm: Permutation,
    // right endpoints of the intervals in top order
    ends: Vec<f64>,
    // translation applied on the interval at each top position
    shifts: Vec<f64>,
}

impl TryFrom<IetData> for Iet {
    type Error = Error;
    fn try_from(d: IetData) -> Result<Self> {
        Iet::new(d.lengths, Permutation::new(d.top, d.bottom)?)
    }
}

impl From<Iet> for IetData {
    fn from(t: Iet) -> Self {
        IetData { lengths: t.lengths, top: t.perm.top, bottom: t.perm.bottom }
    }
}

fn check_lengths(lengths: &[f64], d: usize) -> Result<()> {
    if lengths.len() != d {
        return Err(Error::InvalidLengths(format!("expected {d} lengths, got {}", lengths.len())));
    }
    if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(Error::InvalidLengths(format!("length {l} is not positive")));
    }
    Ok(())
}

/// Left endpoint of every label when laid out in `row` order.
fn starts(lengths: &[f64], row: &[usize]) -> Vec<f64> {
    let mut s = vec![0.0; lengths.len()];
    let mut acc = 0.0;
    for &l in row {
        s[l] = acc;
        acc += lengths[l];
    }
    s
}

impl Iet {
    pub fn new(lengths: Vec<f64>, perm: Permutation) -> Result<Self> {
        check_lengths(&lengths, perm.len())?;
        let top_start = starts(&lengths, &perm.top);
        let bottom_start = starts(&lengths, &perm.bottom);
        let ends = perm.top.iter().map(|&l| top_start[l] + lengths[l]).collect();
        let shifts = perm.top.iter().map(|&l| bottom_start[l] - top_start[l]).collect();
        Ok(Iet { lengths, perm, ends, shifts })
    }

    /// Reversal permutation with the given lengths.
    pub fn reversal(lengths: Vec<f64>) -> Result<Self> {
        let d = lengths.len();
        Iet::new(lengths, Permutation::reversal(d))
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn permutation(&self) -> &Permutation {
        &self.perm
    }

    pub fn d(&self) -> usize {
        self.lengths.len()
    }

    pub fn total(&self) -> f64 {
        *self.ends.last().unwrap()
    }

    /// Left endpoint of the interval labelled `label` before the exchange.
    pub fn top_start(&self, label: usize) -> f64 {
        starts(&self.lengths, &self.perm.top)[label]
    }

    /// Left endpoint of the image of the interval labelled `label`.
    pub fn bottom_start(&self, label: usize) -> f64 {
        starts(&self.lengths, &self.perm.bottom)[label]
    }

    /// Top position of the interval containing `x`.
    #[inline]
    fn locate(&self, x: f64) -> Result<usize> {
        let total = self.total();
        if !(0.0..total).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        let eps = EPS_BOUNDARY * total;
        let last = self.ends.len() - 1;
        let mut j = 0;
        while j < last && x >= self.ends[j] {
            j += 1;
        }
        if (j > 0 && x - self.ends[j - 1] < eps) || (j < last && self.ends[j] - x < eps) {
            return Err(Error::HitDiscontinuity(0));
        }
        Ok(j)
    }

    /// Label of the interval containing `x`.
    pub fn label_at(&self, x: f64) -> Result<usize> {
        Ok(self.perm.top[self.locate(x)?])
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let j = self.locate(x)?;
        Ok(x + self.shifts[j])
    }

    /// `T(x)` together with the label of the interval containing `x`.
    #[inline]
    pub fn eval_labelled(&self, x: f64) -> Result<(f64, usize)> {
        let j = self.locate(x)?;
        Ok((x + self.shifts[j], self.perm.top[j]))
    }

    /// `x, T(x), ..., T^n(x)`.
    pub fn orbit(&self, x: f64, n: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(x);
        let mut y = x;
        for i in 0..n {
            y = self.eval(y).map_err(|e| at_step(e, i))?;
            out.push(y);
        }
        Ok(out)
    }

    /// Labels of the intervals visited by `x, T(x), ..., T^{n-1}(x)`.
    pub fn symbolic_coding(&self, x: f64, n: usize) -> Result<Vec<usize>> {
        let mut word = Vec::with_capacity(n);
        let mut y = x;
        for i in 0..n {
            let (next, label) = self.eval_labelled(y).map_err(|e| at_step(e, i))?;
            word.push(label);
            y = next;
        }
        Ok(word)
    }

    pub fn inverse(&self) -> Iet {
        let perm = Permutation { top: self.perm.bottom.clone(), bottom: self.perm.top.clone() };
        Iet::new(self.lengths.clone(), perm).expect("inverse of a valid exchange")
    }

    /// Same exchange rescaled to total length one.
    pub fn renormalized(&self) -> Iet {
        let t = self.total();
        Iet::new(self.lengths.iter().map(|l| l / t).collect(), self.perm.clone())
            .expect("rescaling keeps lengths positive")
    }
}

pub(crate) fn at_step(e: Error, step: usize) -> Error {
    match e {
        Error::HitDiscontinuity(_) => Error::HitDiscontinuity(step),
        other => other,
    }
}

/// Interval exchange with flips; lengths and flips are indexed by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlippedIet {
    pub lengths: Vec<f64>,
    pub perm: Permutation,
    pub flips: Vec<bool>,
}

impl FlippedIet {
    pub fn new(lengths: Vec<f64>, perm: Permutation, flips: Vec<bool>) -> Result<Self> {
        check_lengths(&lengths, perm.len())?;
        if flips.len() != perm.len() {
            return Err(Error::InvalidArgument("one flip flag per label".into()));
        }
        Ok(FlippedIet { lengths, perm, flips })
    }

    pub fn total(&self) -> f64 {
        self.lengths.iter().sum()
    }

    /// Breakpoints between consecutive intervals of the domain.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::new();
        for &l in &self.perm.top[..self.perm.len() - 1] {
            acc += self.lengths[l];
            out.push(acc);
        }
        out
    }

    pub fn label_at(&self, x: f64) -> Result<usize> {
        let total = self.total();
        if !(0.0..total).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        let eps = EPS_BOUNDARY * total;
        let mut left = 0.0;
        for (pos, &l) in self.perm.top.iter().enumerate() {
            let right = left + self.lengths[l];
            if x < right || pos + 1 == self.perm.len() {
                let near_left = pos > 0 && x - left < eps;
                let near_right = pos + 1 < self.perm.len() && right - x < eps;
                if near_left || near_right {
                    return Err(Error::HitDiscontinuity(0));
                }
                return Ok(l);
            }
            left = right;
        }
        unreachable!()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let l = self.label_at(x)?;
        let offset = x - starts(&self.lengths, &self.perm.top)[l];
        let b = starts(&self.lengths, &self.perm.bottom)[l];
        Ok(if self.flips[l] { b + self.lengths[l] - offset } else { b + offset })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_letter_rotation() {
        let t = Iet::reversal(vec![0.5, 0.5]).unwrap();
        let o = t.orbit(0.1, 3).unwrap();
        for (a, b) in o.iter().zip([0.1, 0.6, 0.1, 0.6]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn breakpoint_is_rejected() {
        let t = Iet::reversal(vec![0.3, 0.7]).unwrap();
        assert_eq!(t.eval(0.3), Err(Error::HitDiscontinuity(0)));
        assert_eq!(t.eval(1.0), Err(Error::OutOfDomain(1.0)));
        assert!(t.eval(0.0).is_ok());
    }

    #[test]
    fn inverse_undoes() {
        let t = Iet::reversal(vec![0.2, 0.3, 0.1, 0.4]).unwrap();
        let inv = t.inverse();
        for x in [0.05, 0.27, 0.55, 0.93] {
            assert!((inv.eval(t.eval(x).unwrap()).unwrap() - x).abs() < 1e-15);
        }
    }

    #[test]
    fn json_round_trip() {
        let t = Iet::reversal(vec![0.2, 0.3, 0.5]).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        let back: Iet = serde_json::from_str(&s).unwrap();
        assert_eq!(t, back);
        assert!(serde_json::from_str::<Iet>(r#"{"lengths":[1.0],"top":[0],"bottom":[1]}"#).is_err());
    }

    #[test]
    fn flipped_isometry() {
        let f = FlippedIet::new(vec![0.4, 0.6], Permutation::reversal(2), vec![true, false]).unwrap();
        assert!((f.eval(0.1).unwrap() - 0.9).abs() < 1e-15);
        assert!((f.eval(0.5).unwrap() - 0.1).abs() < 1e-15);
    }
}
