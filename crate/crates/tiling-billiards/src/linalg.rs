//! Integer cocycle matrices and small dense helpers.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Square matrix of 64-bit integers with checked arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<i64>>", try_from = "Vec<Vec<i64>>")]
pub struct IntMatrix {
    n: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn zeros(n: usize) -> Self {
        IntMatrix { n, data: vec![0; n * n] }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("matrix rows must form a square".into()));
        }
        Ok(IntMatrix { n, data: rows.concat() })
    }

    /// `I + E_{row,col}`.
    pub fn transvection(n: usize, row: usize, col: usize) -> Self {
        let mut m = Self::identity(n);
        m.data[row * n + col] += 1;
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.n).map(|c| c.to_vec()).collect()
    }

    pub fn checked_mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let p = a.checked_mul(other.data[k * n + j]).ok_or(Error::CocycleOverflow)?;
                    let slot = &mut out.data[i * n + j];
                    *slot = slot.checked_add(p).ok_or(Error::CocycleOverflow)?;
                }
            }
        }
        Ok(out)
    }

    pub fn checked_pow(&self, k: u32) -> Result<IntMatrix> {
        let mut acc = Self::identity(self.n);
        for _ in 0..k {
            acc = acc.checked_mul(self)?;
        }
        Ok(acc)
    }

    pub fn transpose(&self) -> IntMatrix {
        let n = self.n;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t.data[j * n + i] = self.data[i * n + j];
            }
        }
        t
    }

    pub fn column_sums(&self) -> Vec<i64> {
        (0..self.n).map(|j| (0..self.n).map(|i| self.get(i, j)).sum()).collect()
    }

    /// Exact determinant by fraction-free elimination (Bareiss).
    pub fn determinant(&self) -> i128 {
        let n = self.n;
        let mut a: Vec<i128> = self.data.iter().map(|&v| v as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n {
            if a[k * n + k] == 0 {
                let Some(p) = (k + 1..n).find(|&i| a[i * n + k] != 0) else {
                    return 0;
                };
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
                }
            }
            prev = a[k * n + k];
        }
        sign * a[n * n - 1]
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j) as f64)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= 0)
    }

    /// Smallest `k >= 1` with `M^k` entrywise positive, searched up to
    /// Wielandt's bound `(n-1)^2 + 1`.
    pub fn primitivity_exponent(&self) -> Option<usize> {
        let n = self.n;
        let base: Vec<bool> = self.data.iter().map(|&v| v > 0).collect();
        let mut cur = base.clone();
        let bound = (n - 1) * (n - 1) + 1;
        for k in 1..=bound {
            if cur.iter().all(|&b| b) {
                return Some(k);
            }
            let mut next = vec![false; n * n];
            for i in 0..n {
                for j in 0..n {
                    next[i * n + j] = (0..n).any(|l| cur[i * n + l] && base[l * n + j]);
                }
            }
            cur = next;
        }
        None
    }
}

impl From<IntMatrix> for Vec<Vec<i64>> {
    fn from(m: IntMatrix) -> Self {
        m.rows()
    }
}

impl TryFrom<Vec<Vec<i64>>> for IntMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        IntMatrix::from_rows(&rows)
    }
}

/// Numerical rank via singular values with a relative threshold.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Unit vector spanning the (approximate) kernel of `m`.
pub fn kernel_vector(m: &DMatrix<f64>) -> Vec<f64> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    v_t.row(idx).iter().cloned().collect()
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, &x| a.max(x.abs()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transvection_determinant_is_one() {
        let t = IntMatrix::transvection(4, 3, 0);
        assert_eq!(t.determinant(), 1);
        let p = t.checked_mul(&IntMatrix::transvection(4, 1, 2)).unwrap();
        assert_eq!(p.determinant(), 1);
    }

    #[test]
    fn overflow_is_reported() {
        let m = IntMatrix::from_rows(&[vec![i64::MAX / 2, 1], vec![1, 1]]).unwrap();
        assert_eq!(m.checked_pow(3), Err(Error::CocycleOverflow));
    }

    #[test]
    fn primitivity() {
        let fib = IntMatrix::from_rows(&[vec![1, 1], vec![1, 0]]).unwrap();
        assert_eq!(fib.primitivity_exponent(), Some(2));
        assert_eq!(IntMatrix::identity(3).primitivity_exponent(), None);
    }

    #[test]
    fn rank_of_outer_product() {
        let m = DMatrix::from_fn(3, 3, |i, j| ((i + 1) * (j + 2)) as f64);
        assert_eq!(numerical_rank(&m, 1e-9), 1);
    }
}
