//! Compressed sparse row storage.
//!
//! All Q1 operators on one grid share a single [`SparsityPattern`] behind an
//! `Arc`, so each additional matrix costs one value array only.

use std::io::Write;
use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::real::Real;

/// Row pointers and sorted, unique column indices of a CSR matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
}

impl SparsityPattern {
    pub fn new(n_rows: usize, n_cols: usize, row_ptr: Vec<usize>, col_idx: Vec<u32>) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 || row_ptr[0] != 0 || *row_ptr.last().unwrap() != col_idx.len() {
            return Err(Error::InvalidArgument("malformed row pointer array".into()));
        }
        for r in 0..n_rows {
            if row_ptr[r] > row_ptr[r + 1] {
                return Err(Error::InvalidArgument("row pointers not monotone".into()));
            }
            let cols = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!("row {r}: columns not sorted/unique")));
            }
            if cols.iter().any(|&c| c as usize >= n_cols) {
                return Err(Error::InvalidArgument(format!("row {r}: column out of range")));
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
        })
    }

    pub(crate) fn new_unchecked(n_rows: usize, n_cols: usize, row_ptr: Vec<usize>, col_idx: Vec<u32>) -> Self {
        debug_assert!(Self::new(n_rows, n_cols, row_ptr.clone(), col_idx.clone()).is_ok());
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[u32] {
        &self.col_idx
    }

    #[inline]
    pub fn row_range(&self, r: usize) -> std::ops::Range<usize> {
        self.row_ptr[r]..self.row_ptr[r + 1]
    }

    /// Storage position of `(row, col)`, if structurally present.
    pub fn find(&self, row: usize, col: usize) -> Option<usize> {
        let range = self.row_range(row);
        self.col_idx[range.clone()]
            .binary_search(&(col as u32))
            .ok()
            .map(|k| range.start + k)
    }
}

/// CSR matrix over a shared sparsity pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    pattern: Arc<SparsityPattern>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    pub fn zeros(pattern: Arc<SparsityPattern>) -> Self {
        let values = vec![T::zero(); pattern.nnz()];
        Self { pattern, values }
    }

    pub fn from_parts(pattern: Arc<SparsityPattern>, values: Vec<T>) -> Result<Self> {
        check_len(pattern.nnz(), values.len())?;
        Ok(Self { pattern, values })
    }

    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, T)> = triplets.to_vec();
        for &(r, c, _) in &sorted {
            if r >= n_rows || c >= n_cols {
                return Err(Error::InvalidArgument(format!("triplet ({r}, {c}) out of range")));
            }
        }
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::new();
        let mut values: Vec<T> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c as u32);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        let pattern = SparsityPattern::new(n_rows, n_cols, row_ptr, col_idx)?;
        Ok(Self {
            pattern: Arc::new(pattern),
            values,
        })
    }

    /// Dense row-major input; exact zeros are not stored.
    pub fn from_dense(rows: &[Vec<T>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut trip = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            check_len(n_cols, row.len())?;
            for (j, &v) in row.iter().enumerate() {
                if v != T::zero() {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(rows.len(), n_cols, &trip)
    }

    pub fn identity(n: usize) -> Self {
        let trip: Vec<_> = (0..n).map(|i| (i, i, T::one())).collect();
        Self::from_triplets(n, n, &trip).expect("identity is well formed")
    }

    pub fn n_rows(&self) -> usize {
        self.pattern.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.pattern.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.pattern.row_ptr
    }

    pub fn col_idx(&self) -> &[u32] {
        &self.pattern.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.pattern
            .find(row, col)
            .map_or(T::zero(), |k| self.values[k])
    }

    /// `y = A x`
    pub fn spmv(&self, x: &[T], y: &mut [T]) -> Result<()> {
        check_len(self.n_cols(), x.len())?;
        check_len(self.n_rows(), y.len())?;
        self.spmv_unchecked(x, y);
        Ok(())
    }

    #[inline]
    pub(crate) fn spmv_unchecked(&self, x: &[T], y: &mut [T]) {
        let rp = &self.pattern.row_ptr;
        let ci = &self.pattern.col_idx;
        let v = &self.values;
        for (r, yr) in y.iter_mut().enumerate() {
            let mut s = T::zero();
            for k in rp[r]..rp[r + 1] {
                s += v[k] * x[ci[k] as usize];
            }
            *yr = s;
        }
    }

    /// `y += alpha A x`
    pub(crate) fn spmv_add_unchecked(&self, alpha: T, x: &[T], y: &mut [T]) {
        let rp = &self.pattern.row_ptr;
        let ci = &self.pattern.col_idx;
        let v = &self.values;
        for (r, yr) in y.iter_mut().enumerate() {
            let mut s = T::zero();
            for k in rp[r]..rp[r + 1] {
                s += v[k] * x[ci[k] as usize];
            }
            *yr += alpha * s;
        }
    }

    /// `y = Aᵀ x`
    pub fn spmv_transpose(&self, x: &[T], y: &mut [T]) -> Result<()> {
        check_len(self.n_rows(), x.len())?;
        check_len(self.n_cols(), y.len())?;
        y.iter_mut().for_each(|v| *v = T::zero());
        self.spmv_transpose_add_unchecked(T::one(), x, y);
        Ok(())
    }

    /// `y += alpha Aᵀ x`
    pub(crate) fn spmv_transpose_add_unchecked(&self, alpha: T, x: &[T], y: &mut [T]) {
        let rp = &self.pattern.row_ptr;
        let ci = &self.pattern.col_idx;
        let v = &self.values;
        for (r, &xr) in x.iter().enumerate() {
            let a = alpha * xr;
            for k in rp[r]..rp[r + 1] {
                y[ci[k] as usize] += v[k] * a;
            }
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n_rows()).map(|r| self.get(r, r)).collect()
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.n_rows())
            .map(|r| self.values[self.pattern.row_range(r)].iter().copied().sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut trip = Vec::with_capacity(self.nnz());
        for r in 0..self.n_rows() {
            for k in self.pattern.row_range(r) {
                trip.push((self.pattern.col_idx[k] as usize, r, self.values[k]));
            }
        }
        Self::from_triplets(self.n_cols(), self.n_rows(), &trip).expect("transpose is well formed")
    }

    /// Largest `|A_ij - A_ji|` relative to the largest `|A_ij|`, or `None`
    /// if the pattern is not structurally symmetric.
    pub fn symmetry_defect(&self) -> Option<T> {
        if self.n_rows() != self.n_cols() {
            return None;
        }
        let scale = self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let mut worst = T::zero();
        for r in 0..self.n_rows() {
            for k in self.pattern.row_range(r) {
                let c = self.pattern.col_idx[k] as usize;
                let kt = self.pattern.find(c, r)?;
                worst = worst.max((self.values[k] - self.values[kt]).abs());
            }
        }
        Some(if scale > T::zero() { worst / scale } else { worst })
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.n_cols()]; self.n_rows()];
        for (r, row) in d.iter_mut().enumerate() {
            for k in self.pattern.row_range(r) {
                row[self.pattern.col_idx[k] as usize] = self.values[k];
            }
        }
        d
    }

    /// Writes the matrix in MatrixMarket coordinate format (1-based indices).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.n_rows(), self.n_cols(), self.nnz())?;
        for r in 0..self.n_rows() {
            for k in self.pattern.row_range(r) {
                writeln!(
                    w,
                    "{} {} {:.17e}",
                    r + 1,
                    self.pattern.col_idx[k] + 1,
                    self.values[k].as_f64()
                )?;
            }
        }
        Ok(())
    }
}
