//! Square nonnegative sparse matrices.

mod flow;
mod io;
mod scc;

pub use flow::{check_scalable, Scalability};
pub use io::{load_matrix_market, read_matrix_market, write_matrix_market};
pub use scc::{scc_decompose, SccDecomposition};

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest magnitude of `ln A_ij + x_i + y_j` accepted when forming a scaled matrix.
pub const EXPONENT_GUARD: f64 = 700.0;

#[derive(Debug)]
struct Pattern {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    // Column-compressed view: for column j, rows csc_row[col_ptr[j]..col_ptr[j+1]]
    // and the matching positions into the row-major value array.
    col_ptr: Vec<usize>,
    csc_row: Vec<usize>,
    csc_pos: Vec<usize>,
}

/// Square matrix with strictly positive stored entries.
///
/// Entries are kept in row-major order and indexed by their position `e` in that
/// order; the pattern is shared between a matrix and its rescalings.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    pattern: Arc<Pattern>,
    vals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixStats {
    pub n: usize,
    pub nnz: usize,
    pub entry_sum: f64,
    pub min_nonzero: f64,
    pub ratio: f64,
}

/// Log-scale diagonal factors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalFactors {
    pub x: Vec<f64>,
    pub y: Option<Vec<f64>>,
}

impl DiagonalFactors {
    pub fn kappa(&self) -> f64 {
        let kx = kappa(&self.x);
        match &self.y {
            Some(y) => kx.max(kappa(y)),
            None => kx,
        }
    }
}

/// `exp(max v - min v)`, or 1 for an empty vector.
pub fn kappa(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 1.0;
    }
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| (lo.min(a), hi.max(a)));
    (hi - lo).exp()
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Zeros are dropped and
    /// duplicates summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange {
                    line: None,
                    row: i,
                    col: j,
                    n,
                });
            }
            if !v.is_finite() {
                return Err(Error::NonFiniteEntry {
                    line: None,
                    row: i,
                    col: j,
                });
            }
            if v < 0.0 {
                return Err(Error::NegativeEntry {
                    line: None,
                    row: i,
                    col: j,
                    value: v,
                });
            }
            if v > 0.0 {
                t.push((i, j, v));
            }
        }
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(t.len());
        for (i, j, v) in t {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        Ok(Self::from_sorted(n, merged))
    }

    /// Builds a matrix from a dense row-major array; zeros are not stored.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut t = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                t.push((i, j, v));
            }
        }
        Self::from_triplets(n, &t)
    }

    fn from_sorted(n: usize, entries: Vec<(usize, usize, f64)>) -> Self {
        let nnz = entries.len();
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for &(i, j, v) in &entries {
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            vals.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut col_ptr = vec![0usize; n + 1];
        for &j in &col_idx {
            col_ptr[j + 1] += 1;
        }
        for j in 0..n {
            col_ptr[j + 1] += col_ptr[j];
        }
        let mut next = col_ptr.clone();
        let mut csc_row = vec![0usize; nnz];
        let mut csc_pos = vec![0usize; nnz];
        for i in 0..n {
            for e in row_ptr[i]..row_ptr[i + 1] {
                let j = col_idx[e];
                csc_row[next[j]] = i;
                csc_pos[next[j]] = e;
                next[j] += 1;
            }
        }
        SparseMatrix {
            pattern: Arc::new(Pattern {
                n,
                row_ptr,
                col_idx,
                col_ptr,
                csc_row,
                csc_pos,
            }),
            vals,
        }
    }

    pub fn n(&self) -> usize {
        self.pattern.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    /// Entry positions of row `i`.
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.pattern.row_ptr[i]..self.pattern.row_ptr[i + 1]
    }

    /// Column index of the entry at position `e`.
    pub fn col_of(&self, e: usize) -> usize {
        self.pattern.col_idx[e]
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.pattern.col_idx
    }

    /// `(row, entry position)` pairs of column `j`.
    pub fn col_entries(&self, j: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let p = &self.pattern;
        (p.col_ptr[j]..p.col_ptr[j + 1]).map(move |k| (p.csc_row[k], p.csc_pos[k]))
    }

    /// Row index of every entry, in entry order.
    pub fn row_indices(&self) -> Vec<usize> {
        let mut rows = Vec::with_capacity(self.nnz());
        for i in 0..self.n() {
            rows.extend(std::iter::repeat(i).take(self.row_range(i).len()));
        }
        rows
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n()).flat_map(move |i| self.row_range(i).map(move |e| (i, self.col_of(e), self.vals[e])))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_range(i);
        match self.pattern.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    /// Same pattern, new values. Values must be positive and finite.
    pub fn with_values(&self, vals: Vec<f64>) -> Result<Self> {
        if vals.len() != self.nnz() {
            return Err(Error::DimensionMismatch {
                expected: self.nnz(),
                got: vals.len(),
            });
        }
        if vals.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::NonFinite("matrix values"));
        }
        Ok(SparseMatrix {
            pattern: Arc::clone(&self.pattern),
            vals,
        })
    }

    /// Multiplies every entry by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        self.with_values(self.vals.iter().map(|v| v * s).collect())
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.vals[self.row_range(i)].iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.n()];
        for (e, &j) in self.pattern.col_idx.iter().enumerate() {
            c[j] += self.vals[e];
        }
        c
    }

    pub fn entry_sum(&self) -> f64 {
        self.vals.iter().sum()
    }

    pub fn stats(&self) -> Result<MatrixStats> {
        if self.nnz() == 0 {
            return Err(Error::EmptyMatrix);
        }
        let s = self.entry_sum();
        let l = self.vals.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(MatrixStats {
            n: self.n(),
            nnz: self.nnz(),
            entry_sum: s,
            min_nonzero: l,
            ratio: s / l,
        })
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.iter()
            .all(|(i, j, v)| (self.get(j, i) - v).abs() <= tol * v.abs().max(1.0))
    }

    /// Values `A_ij exp(x_i + y_j)`; `|ln A_ij + x_i + y_j|` must stay within the guard.
    pub fn scaled_values(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        for v in [x, y] {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
            if v.iter().any(|a| !a.is_finite()) {
                return Err(Error::NonFinite("scaling vector"));
            }
        }
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..n {
            for e in self.row_range(i) {
                let j = self.col_of(e);
                let ex = self.vals[e].ln() + x[i] + y[j];
                if ex.abs() > EXPONENT_GUARD {
                    return Err(Error::Overflow {
                        row: i,
                        col: j,
                        exponent: ex,
                    });
                }
                out.push(ex.exp());
            }
        }
        Ok(out)
    }

    /// `D(exp(x)) A D(exp(y))`.
    pub fn apply_scaling(&self, x: &[f64], y: &[f64]) -> Result<Self> {
        let vals = self.scaled_values(x, y)?;
        self.with_values(vals)
    }

    /// `D(exp(x)) A D(exp(-x))`.
    pub fn apply_balancing(&self, x: &[f64]) -> Result<Self> {
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        self.apply_scaling(x, &neg)
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn submatrix(&self, idx: &[usize]) -> Result<Self> {
        let mut local = vec![usize::MAX; self.n()];
        for (k, &i) in idx.iter().enumerate() {
            local[i] = k;
        }
        let mut t = Vec::new();
        for (k, &i) in idx.iter().enumerate() {
            for e in self.row_range(i) {
                let j = local[self.col_of(e)];
                if j != usize::MAX {
                    t.push((k, j, self.vals[e]));
                }
            }
        }
        Self::from_triplets(idx.len(), &t)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut d = vec![vec![0.0; n]; n];
        for (i, j, v) in self.iter() {
            d[i][j] = v;
        }
        d
    }

    /// Square embedding `[[0, A], [0, 0]]` of size `2n`.
    pub fn block_embedding(&self) -> Self {
        let n = self.n();
        let t: Vec<(usize, usize, f64)> = self.iter().map(|(i, j, v)| (i, n + j, v)).collect();
        Self::from_sorted(2 * n, t)
    }
}
