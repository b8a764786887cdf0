use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One step of Rauzy induction: `Top` when the last interval of the top
/// row is the longer one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Top,
    Bottom,
}

impl StepKind {
    pub fn other(self) -> StepKind {
        match self {
            StepKind::Top => StepKind::Bottom,
            StepKind::Bottom => StepKind::Top,
        }
    }

    pub fn letter(self) -> char {
        match self {
            StepKind::Top => 't',
            StepKind::Bottom => 'b',
        }
    }
}

/// Labelled two-row permutation: `top` lists labels in domain order,
/// `bottom` in image order. Labels are `0..d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation {
    pub top: Vec<usize>,
    pub bottom: Vec<usize>,
}

impl Permutation {
    pub fn new(top: Vec<usize>, bottom: Vec<usize>) -> Result<Self> {
        let d = top.len();
        if d == 0 || bottom.len() != d {
            return Err(Error::InvalidPermutation("rows must be nonempty and of equal size".into()));
        }
        for row in [&top, &bottom] {
            let mut seen = vec![false; d];
            for &l in row.iter() {
                if l >= d || seen[l] {
                    return Err(Error::InvalidPermutation(format!("{row:?} is not a bijection of 0..{d}")));
                }
                seen[l] = true;
            }
        }
        Ok(Permutation { top, bottom })
    }

    /// `d` letters, bottom row reversed.
    pub fn reversal(d: usize) -> Self {
        Permutation { top: (0..d).collect(), bottom: (0..d).rev().collect() }
    }

    /// From the one-line notation (1-based images of the identity top row),
    /// e.g. `[4, 3, 2, 1]` for the reversal on four letters.
    pub fn from_one_line(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::InvalidPermutation("one-line notation is 1-based".into()));
        }
        let d = images.len();
        let mut bottom = vec![usize::MAX; d];
        for (label, &pos) in images.iter().enumerate() {
            if pos > d || bottom[pos - 1] != usize::MAX {
                return Err(Error::InvalidPermutation(format!("{images:?}")));
            }
            bottom[pos - 1] = label;
        }
        Permutation::new((0..d).collect(), bottom)
    }

    pub fn len(&self) -> usize {
        self.top.len()
    }

    pub fn is_empty(&self) -> bool {
        self.top.is_empty()
    }

    pub fn is_irreducible(&self) -> bool {
        let d = self.len();
        let mut in_top = vec![false; d];
        let mut in_bottom = vec![false; d];
        let mut balance = 0i64;
        for k in 0..d - 1 {
            let (t, b) = (self.top[k], self.bottom[k]);
            in_top[t] = true;
            if in_bottom[t] {
                balance += 1;
            }
            in_bottom[b] = true;
            if in_top[b] {
                balance += 1;
            }
            if balance as usize == k + 1 {
                return false;
            }
        }
        true
    }

    /// Position of `label` in the top and bottom rows.
    pub fn positions(&self, label: usize) -> (usize, usize) {
        let t = self.top.iter().position(|&l| l == label).expect("label present");
        let b = self.bottom.iter().position(|&l| l == label).expect("label present");
        (t, b)
    }

    /// Winner and loser of a step of the given kind.
    pub fn winner_loser(&self, kind: StepKind) -> (usize, usize) {
        let a = *self.top.last().unwrap();
        let b = *self.bottom.last().unwrap();
        match kind {
            StepKind::Top => (a, b),
            StepKind::Bottom => (b, a),
        }
    }

    /// Combinatorial part of a Rauzy step.
    pub fn rauzy_move(&self, kind: StepKind) -> Permutation {
        let (winner, loser) = self.winner_loser(kind);
        let mut next = self.clone();
        let row = match kind {
            StepKind::Top => &mut next.bottom,
            StepKind::Bottom => &mut next.top,
        };
        row.retain(|&l| l != loser);
        let at = row.iter().position(|&l| l == winner).unwrap();
        row.insert(at + 1, loser);
        next
    }

    /// Relabel so that the top row reads `0..d`.
    pub fn standardized(&self) -> Permutation {
        let d = self.len();
        let mut rename = vec![0; d];
        for (pos, &l) in self.top.iter().enumerate() {
            rename[l] = pos;
        }
        Permutation {
            top: (0..d).collect(),
            bottom: self.bottom.iter().map(|&l| rename[l]).collect(),
        }
    }
}

impl std::fmt::Display for Permutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let row = |r: &[usize]| r.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ");
        write!(f, "({} / {})", row(&self.top), row(&self.bottom))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reversal_is_irreducible() {
        for d in 2..8 {
            assert!(Permutation::reversal(d).is_irreducible());
        }
        let red = Permutation::new(vec![0, 1, 2], vec![1, 0, 2]).unwrap();
        assert!(!red.is_irreducible());
        let id = Permutation::new(vec![0, 1], vec![0, 1]).unwrap();
        assert!(!id.is_irreducible());
    }

    #[test]
    fn one_line() {
        let p = Permutation::from_one_line(&[4, 3, 2, 1]).unwrap();
        assert_eq!(p, Permutation::reversal(4));
        assert!(Permutation::from_one_line(&[1, 1]).is_err());
    }

    #[test]
    fn moves() {
        let p = Permutation::reversal(4);
        let t = p.rauzy_move(StepKind::Top);
        assert_eq!(t.top, vec![0, 1, 2, 3]);
        assert_eq!(t.bottom, vec![3, 0, 2, 1]);
        let b = p.rauzy_move(StepKind::Bottom);
        assert_eq!(b.top, vec![0, 3, 1, 2]);
        assert_eq!(b.bottom, vec![3, 2, 1, 0]);
    }
}
