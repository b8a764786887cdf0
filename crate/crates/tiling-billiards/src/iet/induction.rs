//! Rauzy–Veech induction, its Zorich acceleration, and Rokhlin towers.
//!
//! Conventions: a step of kind `Top` (last top interval longer) shortens
//! the top-last interval, the winner `w`, by the bottom-last one, the loser
//! `l`. Its cocycle matrix is `I + E_{w,l}` and its substitution sends
//! `l` to the coding of the new interval: `l w` for `Top`, `w l` for
//! `Bottom`. Lengths before and after a path satisfy
//! `lengths_before = A * lengths_after` with `A` the ordered product of the
//! step matrices.

use serde::{Deserialize, Serialize};

use super::{Iet, Permutation, StepKind};
use crate::linalg::IntMatrix;
use crate::{Error, Result, EPS_BOUNDARY};

/// Substitution on the labels `0..d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    images: Vec<Vec<usize>>,
}

impl Substitution {
    pub fn identity(d: usize) -> Self {
        Substitution { images: (0..d).map(|a| vec![a]).collect() }
    }

    pub fn from_images(images: Vec<Vec<usize>>) -> Result<Self> {
        let d = images.len();
        if images.iter().any(|w| w.is_empty() || w.iter().any(|&a| a >= d)) {
            return Err(Error::InvalidArgument("substitution images must be nonempty words over 0..d".into()));
        }
        Ok(Substitution { images })
    }

    pub fn d(&self) -> usize {
        self.images.len()
    }

    pub fn image(&self, a: usize) -> &[usize] {
        &self.images[a]
    }

    pub fn images(&self) -> &[Vec<usize>] {
        &self.images
    }

    /// Longest image length.
    pub fn max_len(&self) -> usize {
        self.images.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        Substitution { images: other.images.iter().map(|w| self.apply(w)).collect() }
    }

    pub fn apply(&self, word: &[usize]) -> Vec<usize> {
        let mut out = Vec::with_capacity(word.len() * 2);
        for &a in word {
            out.extend_from_slice(&self.images[a]);
        }
        out
    }

    /// Applies the substitution `k` times.
    pub fn apply_power(&self, word: &[usize], k: usize) -> Vec<usize> {
        let mut w = word.to_vec();
        for _ in 0..k {
            w = self.apply(&w);
        }
        w
    }

    /// Incidence matrix: entry `(i, j)` counts `i` in the image of `j`.
    pub fn matrix(&self) -> IntMatrix {
        let d = self.d();
        let mut m = IntMatrix::zeros(d);
        for (j, w) in self.images.iter().enumerate() {
            for &i in w {
                m.set(i, j, m.get(i, j) + 1);
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    RauzyTop,
    RauzyBottom,
    ZorichBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InductionRecord {
    pub kind: RecordKind,
    /// Type of the underlying Rauzy steps.
    pub step: StepKind,
    /// Number of Rauzy steps (1 unless this is a Zorich block).
    pub count: u64,
    pub matrix: IntMatrix,
    pub substitution: Substitution,
    pub resulting_perm: Permutation,
}

pub(crate) fn step_kind(lengths: &[f64], perm: &Permutation) -> Result<StepKind> {
    let a = *perm.top.last().unwrap();
    let b = *perm.bottom.last().unwrap();
    let total: f64 = lengths.iter().sum();
    let diff = lengths[a] - lengths[b];
    if diff.abs() < EPS_BOUNDARY * total {
        return Err(Error::DegenerateStep);
    }
    Ok(if diff > 0.0 { StepKind::Top } else { StepKind::Bottom })
}

pub fn rauzy_step(iet: &Iet) -> Result<(Iet, InductionRecord)> {
    let perm = iet.permutation();
    let kind = step_kind(iet.lengths(), perm)?;
    let (w, l) = perm.winner_loser(kind);
    let mut lengths = iet.lengths().to_vec();
    lengths[w] -= lengths[l];
    let next = perm.rauzy_move(kind);
    let d = lengths.len();
    let mut subst = Substitution::identity(d);
    subst.images[l] = match kind {
        StepKind::Top => vec![l, w],
        StepKind::Bottom => vec![w, l],
    };
    let record = InductionRecord {
        kind: match kind {
            StepKind::Top => RecordKind::RauzyTop,
            StepKind::Bottom => RecordKind::RauzyBottom,
        },
        step: kind,
        count: 1,
        matrix: IntMatrix::transvection(d, w, l),
        substitution: subst,
        resulting_perm: next.clone(),
    };
    Ok((Iet::new(lengths, next)?, record))
}

pub fn rauzy_step_renormalized(iet: &Iet) -> Result<(Iet, InductionRecord)> {
    let (t, r) = rauzy_step(iet)?;
    Ok((t.renormalized(), r))
}

/// One Zorich block on raw data: the kind, the common winner and the number
/// of times each label lost. Long blocks are shortened by removing whole
/// cycles of losers at once.
pub(crate) fn zorich_block_fast(
    lengths: &mut [f64],
    perm: &mut Permutation,
) -> Result<(StepKind, usize, Vec<u64>)> {
    let kind = step_kind(lengths, perm)?;
    let (w, _) = perm.winner_loser(kind);
    let mut losses = vec![0u64; lengths.len()];

    let row = match kind {
        StepKind::Top => &perm.bottom,
        StepKind::Bottom => &perm.top,
    };
    let at = row.iter().position(|&l| l == w).unwrap();
    let cycle: Vec<usize> = row[at + 1..].to_vec();
    let sum: f64 = cycle.iter().map(|&c| lengths[c]).sum();
    let mut done = false;
    if lengths[w] > sum {
        let q = (lengths[w] / sum).ceil() - 1.0;
        if q >= 1.0 {
            lengths[w] -= q * sum;
            for &c in &cycle {
                losses[c] += q as u64;
            }
            done = true;
        }
    }
    loop {
        if done && !matches!(step_kind(lengths, perm), Ok(k) if k == kind) {
            break;
        }
        let (_, l) = perm.winner_loser(kind);
        lengths[w] -= lengths[l];
        losses[l] += 1;
        *perm = perm.rauzy_move(kind);
        done = true;
    }
    Ok((kind, w, losses))
}

fn block_record(kind: StepKind, w: usize, losses: &[u64], perm: &Permutation) -> Result<InductionRecord> {
    let d = losses.len();
    let mut matrix = IntMatrix::identity(d);
    let mut images: Vec<Vec<usize>> = (0..d).map(|a| vec![a]).collect();
    for (c, &k) in losses.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let k64 = i64::try_from(k).map_err(|_| Error::CocycleOverflow)?;
        matrix.set(w, c, k64);
        let run = vec![w; k as usize];
        images[c] = match kind {
            StepKind::Top => [vec![c], run].concat(),
            StepKind::Bottom => [run, vec![c]].concat(),
        };
    }
    Ok(InductionRecord {
        kind: RecordKind::ZorichBlock,
        step: kind,
        count: losses.iter().sum(),
        matrix,
        substitution: Substitution { images },
        resulting_perm: perm.clone(),
    })
}

/// A maximal run of Rauzy steps of the same kind.
pub fn zorich_step(iet: &Iet) -> Result<(Iet, InductionRecord)> {
    let mut lengths = iet.lengths().to_vec();
    let mut perm = iet.permutation().clone();
    let (kind, w, losses) = zorich_block_fast(&mut lengths, &mut perm)?;
    let record = block_record(kind, w, &losses, &perm)?;
    Ok((Iet::new(lengths, perm)?, record))
}

pub fn zorich_step_renormalized(iet: &Iet) -> Result<(Iet, InductionRecord)> {
    let (t, r) = zorich_step(iet)?;
    Ok((t.renormalized(), r))
}

/// Towers of order `l`: the first-return structure after `l` Rauzy steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RokhlinTowers {
    pub order: usize,
    /// Lengths of the base intervals (not renormalized), by label.
    pub base_lengths: Vec<f64>,
    pub heights: Vec<i64>,
    /// `A^(l)`: entry `(i, j)` counts visits to the old interval `i` by the
    /// tower over base `j`.
    pub visit_counts: IntMatrix,
    pub substitution: Substitution,
    pub induced: Iet,
    pub steps: Vec<StepKind>,
}

pub fn rokhlin_towers(iet: &Iet, l: usize) -> Result<RokhlinTowers> {
    let d = iet.d();
    let mut a = IntMatrix::identity(d);
    let mut sigma = Substitution::identity(d);
    let mut cur = iet.clone();
    let mut steps = Vec::with_capacity(l);
    for _ in 0..l {
        let (next, rec) = rauzy_step(&cur)?;
        a = a.checked_mul(&rec.matrix)?;
        sigma = sigma.compose(&rec.substitution);
        steps.push(rec.step);
        cur = next;
    }
    Ok(RokhlinTowers {
        order: l,
        base_lengths: cur.lengths().to_vec(),
        heights: a.column_sums(),
        visit_counts: a,
        substitution: sigma,
        induced: cur,
        steps,
    })
}
