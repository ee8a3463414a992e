//! Small dense complex matrices.
//!
//! Only used to cross-check the spectral fast paths at small sizes, so the
//! algorithms here are the textbook O(n^3) ones.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::{Error, Result};

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyDimension);
        }
        Ok(Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Result<Self> {
        let mut m = Self::zeros(rows, cols)?;
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        Ok(m)
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyDimension);
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_row_major(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows).expect("non-empty");
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: rhs.rows,
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols)?;
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)] * x[c]).sum())
            .collect())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                actual: rhs.rows * rhs.cols,
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&x| x * factor).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry-wise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> Result<f64> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                actual: rhs.rows * rhs.cols,
            });
        }
        Ok(self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Stacks blocks on top of each other; all must share a column count.
    pub fn vstack(blocks: &[Self]) -> Result<Self> {
        let first = blocks.first().ok_or(Error::EmptyDimension)?;
        let cols = first.cols;
        let mut entries = Vec::new();
        let mut rows = 0;
        for b in blocks {
            if b.cols != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: b.cols,
                });
            }
            entries.extend_from_slice(&b.entries);
            rows += b.rows;
        }
        Self::from_row_major(rows, cols, entries)
    }

    /// Places blocks side by side; all must share a row count.
    pub fn hstack(blocks: &[Self]) -> Result<Self> {
        let first = blocks.first().ok_or(Error::EmptyDimension)?;
        let rows = first.rows;
        for b in blocks {
            if b.rows != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    actual: b.rows,
                });
            }
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols)?;
        let mut offset = 0;
        for b in blocks {
            for r in 0..rows {
                for c in 0..b.cols {
                    out[(r, offset + c)] = b[(r, c)];
                }
            }
            offset += b.cols;
        }
        Ok(out)
    }

    /// `log2 |det(self)|` via LU factorisation with partial pivoting.
    ///
    /// Returns negative infinity for an exactly singular matrix.
    pub fn log2_abs_det(&self) -> Result<f64> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                actual: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.entries.clone();
        let mut acc = 0.0;
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm()))
                .expect("non-empty range");
            if a[pivot * n + k].norm() == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            if pivot != k {
                for c in 0..n {
                    a.swap(k * n + c, pivot * n + c);
                }
            }
            let p = a[k * n + k];
            acc += libm::log2(p.norm());
            for r in k + 1..n {
                let factor = a[r * n + k] / p;
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in k + 1..n {
                    let v = a[k * n + c];
                    a[r * n + c] -= factor * v;
                }
            }
        }
        Ok(acc)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        &self.entries[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        &mut self.entries[r * self.cols + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_empty() {
        assert_eq!(DenseMatrix::zeros(0, 3), Err(Error::EmptyDimension));
    }

    #[test]
    fn log_det_of_diagonal() {
        let m = DenseMatrix::from_fn(3, 3, |r, col| {
            if r == col {
                c(2.0 * (r + 1) as f64, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
        .unwrap();
        // det = 2 * 4 * 6 = 48
        assert!((m.log2_abs_det().unwrap() - 48f64.log2()).abs() < 1e-14);
    }

    #[test]
    fn log_det_needs_pivoting() {
        // [[0, 1], [1, 0]] has |det| = 1
        let m = DenseMatrix::from_row_major(2, 2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
            .unwrap();
        assert!(m.log2_abs_det().unwrap().abs() < 1e-15);
    }

    #[test]
    fn log_det_complex_2x2() {
        // det([[1+j, 2], [j, 3]]) = 3+3j - 2j = 3 + j
        let m = DenseMatrix::from_row_major(2, 2, vec![c(1., 1.), c(2., 0.), c(0., 1.), c(3., 0.)])
            .unwrap();
        let expected = 10f64.sqrt().log2();
        assert!((m.log2_abs_det().unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn singular_is_negative_infinity() {
        let m = DenseMatrix::from_row_major(2, 2, vec![c(1., 0.), c(2., 0.), c(2., 0.), c(4., 0.)])
            .unwrap();
        assert_eq!(m.log2_abs_det().unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn stacking_shapes() {
        let a = DenseMatrix::identity(2).unwrap();
        let b = DenseMatrix::zeros(2, 3).unwrap();
        assert_eq!(DenseMatrix::hstack(&[a.clone(), b.clone()]).unwrap().cols(), 5);
        assert!(DenseMatrix::vstack(&[a.clone(), b]).is_err());
        let v = DenseMatrix::vstack(&[a.clone(), a]).unwrap();
        assert_eq!((v.rows(), v.cols()), (4, 2));
        assert_eq!(v[(2, 0)], c(1.0, 0.0));
    }

    #[test]
    fn adjoint_product() {
        let a = DenseMatrix::from_row_major(1, 2, vec![c(1., 2.), c(0., -1.)]).unwrap();
        let g = a.matmul(&a.adjoint()).unwrap();
        assert_eq!(g[(0, 0)], c(6.0, 0.0));
    }
}
