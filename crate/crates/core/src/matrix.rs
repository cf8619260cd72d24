//! Square nonnegative integer matrices with arbitrary-precision entries.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A `d × d` matrix of nonnegative integers, stored row-major.
///
/// As a substitution matrix, entry `[a][b]` counts the occurrences of letter
/// `a` in the image of letter `b`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SubstitutionMatrix {
    dim: usize,
    entries: Vec<BigUint>,
}

impl SubstitutionMatrix {
    pub fn zeros(dim: usize) -> Self {
        SubstitutionMatrix { dim, entries: vec![BigUint::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = BigUint::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument("matrix rows must form a square".into()));
        }
        let entries = rows.iter().flatten().map(|&v| BigUint::from(v)).collect();
        Ok(SubstitutionMatrix { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &BigUint {
        &self.entries[row * self.dim + col]
    }

    pub(crate) fn get_mut(&mut self, row: usize, col: usize) -> &mut BigUint {
        &mut self.entries[row * self.dim + col]
    }

    pub fn column_sum(&self, col: usize) -> BigUint {
        (0..self.dim).map(|r| self.get(r, col)).sum()
    }

    pub fn column_sums(&self) -> Vec<BigUint> {
        (0..self.dim).map(|c| self.column_sum(c)).collect()
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &SubstitutionMatrix) -> Result<SubstitutionMatrix> {
        if self.dim != rhs.dim {
            return Err(Error::InvalidArgument(format!(
                "cannot multiply {0}x{0} by {1}x{1}",
                self.dim, rhs.dim
            )));
        }
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        *out.get_mut(i, j) += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> SubstitutionMatrix {
        let mut acc = Self::identity(self.dim);
        for _ in 0..k {
            acc = acc.mul(self).expect("same dimension");
        }
        acc
    }

    /// True iff every entry is at least 1.
    pub fn is_positive(&self) -> bool {
        self.entries.iter().all(|e| !e.is_zero())
    }

    /// Maximum column sum, the operator norm induced by `ℓ¹`.
    ///
    /// For a substitution matrix this is the length of the longest image.
    pub fn norm(&self) -> BigUint {
        (0..self.dim).map(|c| self.column_sum(c)).max().unwrap_or_default()
    }

    /// `max_{i,j,j'} M[i][j] / M[i][j']` for a positive matrix.
    pub fn length_ratio_bound(&self) -> Result<BigRational> {
        if !self.is_positive() {
            return Err(Error::PreconditionViolation(
                "length ratio bound needs a positive matrix".into(),
            ));
        }
        let mut best: Option<BigRational> = None;
        for i in 0..self.dim {
            let row = &self.entries[i * self.dim..(i + 1) * self.dim];
            let hi = row.iter().max().unwrap();
            let lo = row.iter().min().unwrap();
            let ratio = BigRational::new(BigInt::from(hi.clone()), BigInt::from(lo.clone()));
            if best.as_ref().is_none_or(|b| ratio > *b) {
                best = Some(ratio);
            }
        }
        Ok(best.unwrap_or_else(BigRational::one))
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        let d = self.dim;
        if d == 0 {
            return BigInt::one();
        }
        let mut a: Vec<BigInt> = self.entries.iter().map(|e| BigInt::from(e.clone())).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..d - 1 {
            if a[k * d + k].is_zero() {
                let Some(swap) = (k + 1..d).find(|&r| !a[r * d + k].is_zero()) else {
                    return BigInt::zero();
                };
                for c in 0..d {
                    a.swap(k * d + c, swap * d + c);
                }
                sign = -sign;
            }
            for i in k + 1..d {
                for j in k + 1..d {
                    let v = &a[i * d + j] * &a[k * d + k] - &a[i * d + k] * &a[k * d + j];
                    a[i * d + j] = v / &prev;
                }
            }
            prev = a[k * d + k].clone();
        }
        sign * &a[d * d - 1]
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).to_f64().unwrap_or(f64::INFINITY)).collect())
            .collect()
    }

    /// Row-major JSON integer array, e.g. `[[1,1,0],[0,0,1],[0,1,0]]`.
    pub fn to_json(&self) -> String {
        let rows: Vec<String> = (0..self.dim)
            .map(|i| {
                let cells: Vec<String> = (0..self.dim).map(|j| self.get(i, j).to_string()).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        format!("[{}]", rows.join(","))
    }
}

impl fmt::Debug for SubstitutionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}
