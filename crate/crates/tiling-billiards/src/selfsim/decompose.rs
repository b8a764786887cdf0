use serde::{Deserialize, Serialize};

use super::system::{follow_loop, SelfSimilarSystem};
use crate::iet::Iet;
use crate::{Error, Result};

/// One level of the tower descent: the point `x^(k)`, the suffix `s_k`
/// read before the orbit reaches the base of a tower, and the first
/// letter of the coding of `x^(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub x: f64,
    pub s: Vec<usize>,
    pub first: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixDecomposition {
    pub n: usize,
    pub l: usize,
    /// `s_0, ..., s_{l-1}`.
    pub s_words: Vec<Vec<usize>>,
    pub m_word: Vec<usize>,
    /// `p_{l-1}, ..., p_0`.
    pub p_words: Vec<Vec<usize>>,
}

impl PrefixDecomposition {
    /// `s_0 sigma(s_1) ... sigma^l(m_l) sigma^{l-1}(p_{l-1}) ... p_0`.
    pub fn expand(&self, sys: &SelfSimilarSystem) -> Vec<usize> {
        let sigma = sys.substitution();
        let mut out = Vec::with_capacity(self.n);
        for (i, s) in self.s_words.iter().enumerate() {
            out.extend(sigma.apply_power(s, i));
        }
        out.extend(sigma.apply_power(&self.m_word, self.l));
        for (j, p) in self.p_words.iter().enumerate() {
            out.extend(sigma.apply_power(p, self.l - 1 - j));
        }
        out
    }
}

/// The exchange, its inverse and the exchange induced on the base of the
/// towers of order one.
pub(crate) struct TowerData {
    pub t: Iet,
    pub inv: Iet,
    pub induced: Iet,
    pub base_end: f64,
}

impl TowerData {
    pub fn new(sys: &SelfSimilarSystem) -> Result<Self> {
        let t = sys.iet();
        let induced = follow_loop(&sys.v, &sys.rauzy_loop)?;
        Ok(TowerData { inv: t.inverse(), base_end: induced.total(), induced, t })
    }

    /// Descends from `x^(k)` to `x^(k+1)`.
    pub fn level(&self, sys: &SelfSimilarSystem, x: f64) -> Result<(Level, f64)> {
        let first = self.t.label_at(x)?;
        if x < self.base_end {
            return Ok((Level { x, s: Vec::new(), first }, (x * sys.lambda1).min(next_below(1.0))));
        }
        let mut y = x;
        let mut h = 0;
        while y >= self.base_end {
            y = self.inv.eval(y)?;
            h += 1;
            if h > sys.k {
                return Err(Error::InvalidArgument("tower height exceeds K".into()));
            }
        }
        let a = self.induced.label_at(y)?;
        let word = sys.substitution().image(a);
        if h >= word.len() {
            return Err(Error::InvalidArgument("tower height exceeds its image".into()));
        }
        let s = word[h..].to_vec();
        let mut z = x;
        for _ in 0..s.len() {
            z = self.t.eval(z)?;
        }
        Ok((Level { x, s, first }, (z * sys.lambda1).min(next_below(1.0))))
    }
}

fn next_below(x: f64) -> f64 {
    f64::from_bits(x.to_bits() - 1)
}

fn word_len(lens: &[u64], w: &[usize]) -> u64 {
    w.iter().fold(0u64, |acc, &a| acc.saturating_add(lens[a]))
}

/// Longest prefix of `w` whose image under `sigma^k` fits in `budget`.
fn fit_prefix(lens: &[u64], w: &[usize], budget: u64) -> (usize, u64) {
    let mut used = 0u64;
    for (i, &a) in w.iter().enumerate() {
        if used + lens[a] > budget {
            return (i, used);
        }
        used += lens[a];
    }
    (w.len(), used)
}

pub fn prefix_decompose(sys: &SelfSimilarSystem, x: f64, n: usize) -> Result<PrefixDecomposition> {
    let data = TowerData::new(sys)?;
    decompose_with(sys, &data, x, n)
}

pub(crate) fn decompose_with(sys: &SelfSimilarSystem, data: &TowerData, x: f64, n: usize) -> Result<PrefixDecomposition> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&x) {
        return Err(Error::OutOfDomain(x));
    }
    let n64 = n as u64;
    let sigma = sys.substitution();
    let mut levels: Vec<Level> = Vec::new();
    let mut lens_by_level: Vec<Vec<u64>> = vec![vec![1; sys.d()]];
    let mut cur = x;
    // offsets[k] = |s_0 sigma(s_1) ... sigma^{k-1}(s_{k-1})|
    let mut offsets = vec![0u64];
    let mut l = 0;
    loop {
        let (lv, next) = data.level(sys, cur)?;
        let k = levels.len();
        if k + 1 >= lens_by_level.len() {
            let prev = lens_by_level.last().unwrap().clone();
            let m = &sys.rauzy_loop.matrix;
            lens_by_level.push(
                (0..sys.d())
                    .map(|a| (0..sys.d()).fold(0u64, |acc, b| acc.saturating_add((m.get(b, a) as u64).saturating_mul(prev[b]))))
                    .collect(),
            );
        }
        let q = offsets[k].saturating_add(lens_by_level[k][lv.first]);
        offsets.push(offsets[k].saturating_add(word_len(&lens_by_level[k], &lv.s)));
        levels.push(lv);
        cur = next;
        if q > n64 {
            break;
        }
        l = k;
    }
    // levels now reaches l + 1
    let mut candidates = levels[l].s.clone();
    candidates.extend_from_slice(sigma.image(levels[l + 1].first));
    let budget = n64 - offsets[l];
    let (mlen, used) = fit_prefix(&lens_by_level[l], &candidates, budget);
    let m_word = candidates[..mlen].to_vec();
    let mut rest = budget - used;
    let mut p_words = Vec::with_capacity(l);
    let mut next = candidates.get(mlen).copied();
    for j in (0..l).rev() {
        if rest == 0 {
            p_words.push(Vec::new());
            continue;
        }
        let b = next.expect("a partial block follows");
        let img = sigma.image(b);
        let (plen, used) = fit_prefix(&lens_by_level[j], img, rest);
        p_words.push(img[..plen].to_vec());
        rest -= used;
        next = img.get(plen).copied();
    }
    debug_assert_eq!(rest, 0);
    Ok(PrefixDecomposition {
        n,
        l,
        s_words: levels[..l].iter().map(|lv| lv.s.clone()).collect(),
        m_word,
        p_words,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selfsim::search_loops;

    fn first_system() -> SelfSimilarSystem {
        search_loops(4, 8).unwrap().remove(0)
    }

    #[test]
    fn origin_has_empty_suffixes() {
        let sys = first_system();
        let dec = prefix_decompose(&sys, 0.0, 5000).unwrap();
        assert!(dec.l >= 3);
        assert!(dec.s_words.iter().all(Vec::is_empty));
        assert_eq!(dec.expand(&sys), sys.iet().symbolic_coding(0.0, 5000).unwrap());
    }

    #[test]
    fn single_letter_prefix() {
        let sys = first_system();
        let x = 0.61;
        let dec = prefix_decompose(&sys, x, 1).unwrap();
        assert_eq!(dec.l, 0);
        assert_eq!(dec.expand(&sys), vec![sys.iet().label_at(x).unwrap()]);
    }

    #[test]
    fn rejects_empty_prefix() {
        assert!(prefix_decompose(&first_system(), 0.3, 0).is_err());
    }
}
