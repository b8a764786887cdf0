//! Self-similar exchanges built from loops in the Rauzy diagram, and the
//! two-sided power bounds on their Birkhoff sums.

mod decompose;
mod sandwich;
mod system;

pub use decompose::{prefix_decompose, Level, PrefixDecomposition};
pub use sandwich::{verify_sandwich, LowerBoundPoint, SandwichReport};
pub use system::{build_selfsim, GrowthConstants, SelfSimilarSystem};

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::iet::{Permutation, StepKind, Substitution};
use crate::linalg::IntMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RauzyEdge {
    pub from: usize,
    pub to: usize,
    pub kind: StepKind,
}

/// Labelled Rauzy class: nodes in discovery order, one edge per move.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RauzyClass {
    pub nodes: Vec<Permutation>,
    pub edges: Vec<RauzyEdge>,
    /// Size of the class once labels are forgotten.
    pub reduced_size: usize,
}

pub fn enumerate_rauzy_class(perm: &Permutation) -> Result<RauzyClass> {
    if !perm.is_irreducible() {
        return Err(Error::ReduciblePermutation);
    }
    let mut index: BTreeMap<Permutation, usize> = BTreeMap::new();
    let mut nodes = vec![perm.clone()];
    index.insert(perm.clone(), 0);
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for kind in [StepKind::Top, StepKind::Bottom] {
            let next = nodes[i].rauzy_move(kind);
            let j = match index.get(&next) {
                Some(&j) => j,
                None => {
                    nodes.push(next.clone());
                    index.insert(next, nodes.len() - 1);
                    queue.push_back(nodes.len() - 1);
                    nodes.len() - 1
                }
            };
            edges.push(RauzyEdge { from: i, to: j, kind });
        }
    }
    let reduced: BTreeSet<Permutation> = nodes.iter().map(Permutation::standardized).collect();
    Ok(RauzyClass { nodes, edges, reduced_size: reduced.len() })
}

/// A closed path in the labelled Rauzy diagram with its cocycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RauzyLoop {
    pub base_perm: Permutation,
    pub steps: Vec<StepKind>,
    /// Ordered product of the step matrices.
    pub matrix: IntMatrix,
    pub substitution: Substitution,
}

impl RauzyLoop {
    pub fn steps_string(&self) -> String {
        self.steps.iter().map(|s| s.letter()).collect()
    }
}

/// Matrix and substitution of a path; the path need not close up.
pub fn path_cocycle(base: &Permutation, steps: &[StepKind]) -> Result<(Permutation, IntMatrix, Substitution)> {
    let d = base.len();
    let mut perm = base.clone();
    let mut m = IntMatrix::identity(d);
    let mut sigma = Substitution::identity(d);
    for &kind in steps {
        let (w, l) = perm.winner_loser(kind);
        m = m.checked_mul(&IntMatrix::transvection(d, w, l))?;
        let mut images: Vec<Vec<usize>> = (0..d).map(|a| vec![a]).collect();
        images[l] = match kind {
            StepKind::Top => vec![l, w],
            StepKind::Bottom => vec![w, l],
        };
        sigma = sigma.compose(&Substitution::from_images(images)?);
        perm = perm.rauzy_move(kind);
    }
    Ok((perm, m, sigma))
}

pub fn loop_matrix(base: &Permutation, steps: &[StepKind]) -> Result<RauzyLoop> {
    let (end, matrix, substitution) = path_cocycle(base, steps)?;
    if &end != base {
        return Err(Error::NotALoop);
    }
    debug_assert_eq!(substitution.matrix(), matrix);
    Ok(RauzyLoop { base_perm: base.clone(), steps: steps.to_vec(), matrix, substitution })
}

/// Loops of length at most `max_len` based at the reversal on `d` letters
/// whose self-similar system satisfies the spectral hypotheses, shortest
/// first.
pub fn search_loops(d: usize, max_len: usize) -> Result<Vec<SelfSimilarSystem>> {
    if max_len > 12 {
        return Err(Error::InvalidArgument(format!("maxlen {max_len} exceeds 12")));
    }
    if d < 2 {
        return Err(Error::InvalidArgument("need at least two letters".into()));
    }
    let base = Permutation::reversal(d);
    let mut found = Vec::new();
    for len in 1..=max_len {
        for bits in 0u32..(1 << len) {
            let steps: Vec<StepKind> = (0..len)
                .map(|i| if bits >> (len - 1 - i) & 1 == 0 { StepKind::Top } else { StepKind::Bottom })
                .collect();
            let Ok(lp) = loop_matrix(&base, &steps) else { continue };
            if let Ok(sys) = build_selfsim(&lp) {
                found.push(sys);
            }
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use StepKind::{Bottom as B, Top as T};

    #[test]
    fn two_letter_class() {
        let c = enumerate_rauzy_class(&Permutation::reversal(2)).unwrap();
        assert_eq!(c.nodes.len(), 1);
        assert_eq!(c.edges.len(), 2);
        assert!(c.edges.iter().all(|e| e.from == 0 && e.to == 0));
    }

    #[test]
    fn reversal_class_sizes() {
        for d in 2..=6 {
            let c = enumerate_rauzy_class(&Permutation::reversal(d)).unwrap();
            assert_eq!(c.reduced_size, (1 << (d - 1)) - 1);
            assert!(c.edges.iter().all(|e| e.to < c.nodes.len()));
        }
    }

    #[test]
    fn reducible_rejected() {
        let p = Permutation::from_one_line(&[1, 3, 2]).unwrap();
        assert_eq!(enumerate_rauzy_class(&p).unwrap_err(), Error::ReduciblePermutation);
    }

    #[test]
    fn five_step_path_matrix() {
        let (_, m, s) = path_cocycle(&Permutation::reversal(4), &[T, T, B, B, T]).unwrap();
        let want = IntMatrix::from_rows(&[vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 3, 2], vec![1, 1, 1, 1]]).unwrap();
        assert_eq!(m, want);
        assert_eq!(s.images(), &[vec![0, 3], vec![1, 3], vec![2, 2, 2, 3], vec![2, 2, 3]]);
    }

    #[test]
    fn empty_path_is_trivial_loop() {
        let lp = loop_matrix(&Permutation::reversal(4), &[]).unwrap();
        assert_eq!(lp.matrix, IntMatrix::identity(4));
        assert_eq!(loop_matrix(&Permutation::reversal(4), &[T]).unwrap_err(), Error::NotALoop);
    }
}
