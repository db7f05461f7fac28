use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symmetric diagonally dominant matrix with nonpositive off-diagonals.
///
/// Off-diagonal entries are stored (negative) in both triangles, rows sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct SddMatrix {
    diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SddMatrix {
    /// Diagonal plus off-diagonal couplings `(i, j, w)` meaning `M_ij = M_ji = -w`.
    /// Pairs may repeat (weights add); `w` must be nonnegative.
    pub fn from_weights(diag: Vec<f64>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let n = diag.len();
        let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * edges.len());
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange {
                    line: None,
                    row: i,
                    col: j,
                    n,
                });
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidArgument(format!("coupling weight {w} at ({i}, {j})")));
            }
            if i == j || w == 0.0 {
                continue;
            }
            t.push((i, j, -w));
            t.push((j, i, -w));
        }
        Ok(Self::from_sorted_entries(diag, t))
    }

    fn from_sorted_entries(diag: Vec<f64>, mut t: Vec<(usize, usize, f64)>) -> Self {
        let n = diag.len();
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            last = Some((i, j));
            row_ptr[i + 1] += 1;
            cols.push(j);
            vals.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SddMatrix {
            diag,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Builds from a dense symmetric matrix; positive off-diagonals are rejected.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::NotSquare {
                rows: n,
                cols: m.ncols(),
            });
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = m[(i, j)];
                if (v - m[(j, i)]).abs() > 1e-12 * v.abs().max(1.0) {
                    return Err(Error::InvalidArgument(format!("not symmetric at ({i}, {j})")));
                }
                if v > 0.0 {
                    return Err(Error::InvalidArgument(format!("positive off-diagonal at ({i}, {j})")));
                }
                if v < 0.0 {
                    edges.push((i, j, -v));
                }
            }
        }
        Self::from_weights((0..n).map(|i| m[(i, i)]).collect(), &edges)
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Stored off-diagonal entries (negative values) including both triangles.
    pub fn nnz_offdiag(&self) -> usize {
        self.vals.len()
    }

    /// `(column, value)` of the off-diagonal entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().cloned().zip(self.vals[r].iter().cloned())
    }

    /// `(i, j, w)` with `i < j` and `M_ij = -w`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut e = Vec::with_capacity(self.vals.len() / 2);
        for i in 0..self.n() {
            for (j, v) in self.row(i) {
                if j > i {
                    e.push((i, j, -v));
                }
            }
        }
        e
    }

    /// Sum of `|M_ij|` over `j != i`.
    pub fn offdiag_sum(&self, i: usize) -> f64 {
        self.row(i).map(|(_, v)| -v).sum()
    }

    /// `M_ii - sum_j |M_ij|`.
    pub fn slack(&self, i: usize) -> f64 {
        self.diag[i] - self.offdiag_sum(i)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n()];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n() {
            let mut s = self.diag[i] * x[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }

    /// `x^T M x`.
    pub fn quad(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n() {
            s += self.diag[i] * x[i] * x[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[i] * x[self.cols[k]];
            }
        }
        s
    }

    /// `1/2 z^T M z + b^T z`.
    pub fn model_value(&self, z: &[f64], b: &[f64]) -> f64 {
        0.5 * self.quad(z) + z.iter().zip(b).map(|(a, c)| a * c).sum::<f64>()
    }

    /// Diagonal dominance with relative slack `tol`, nonpositive off-diagonals and symmetry.
    pub fn is_sdd(&self, tol: f64) -> bool {
        (0..self.n()).all(|i| {
            let off = self.offdiag_sum(i);
            self.diag[i] >= 0.0
                && self.diag[i] >= off - tol * self.diag[i].max(off)
                && self.row(i).all(|(_, v)| v <= 0.0)
        }) && self.is_symmetric()
    }

    fn is_symmetric(&self) -> bool {
        (0..self.n()).all(|i| {
            self.row(i).all(|(j, v)| {
                self.row(j)
                    .find(|&(k, _)| k == i)
                    .is_some_and(|(_, u)| (u - v).abs() <= 1e-12 * v.abs())
            })
        })
    }

    /// `M_ii >= (1 + alpha) sum_{j != i} |M_ij|` for every row.
    pub fn is_alpha_sdd(&self, alpha: f64) -> bool {
        (0..self.n()).all(|i| self.diag[i] >= (1.0 + alpha) * self.offdiag_sum(i) * (1.0 - 1e-12))
    }

    pub fn scaled(&self, s: f64) -> Self {
        SddMatrix {
            diag: self.diag.iter().map(|d| d * s).collect(),
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: self.vals.iter().map(|v| v * s).collect(),
        }
    }

    /// Principal submatrix on `idx`, in the given order.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let mut local = vec![usize::MAX; self.n()];
        for (k, &i) in idx.iter().enumerate() {
            local[i] = k;
        }
        let mut t = Vec::new();
        for (k, &i) in idx.iter().enumerate() {
            for (j, v) in self.row(i) {
                if local[j] != usize::MAX {
                    t.push((k, local[j], v));
                }
            }
        }
        Self::from_sorted_entries(idx.iter().map(|&i| self.diag[i]).collect(), t)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_and_apply() {
        let m = SddMatrix::from_weights(vec![2.0, 2.0, 1.0], &[(0, 1, 1.0), (1, 2, 0.5), (0, 1, 0.5)]).unwrap();
        assert_eq!(m.to_dense()[(0, 1)], -1.5);
        assert_eq!(m.matvec(&[1.0, 1.0, 1.0]), vec![0.5, 0.0, 0.5]);
        assert!((m.quad(&[1.0, 1.0, 1.0]) - 1.0).abs() < 1e-15);
        assert!(m.is_sdd(0.0));
        assert!(!SddMatrix::from_weights(vec![1.0, 2.0], &[(0, 1, 1.5)]).unwrap().is_sdd(1e-12));
        let d = SddMatrix::from_dense(&m.to_dense()).unwrap();
        assert_eq!(d, m);
    }

    #[test]
    fn submatrix_keeps_inner_entries() {
        let m = SddMatrix::from_weights(vec![3.0, 3.0, 3.0], &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let s = m.submatrix(&[2, 1]);
        assert_eq!(s.diag(), &[3.0, 3.0]);
        assert_eq!(s.to_dense()[(0, 1)], -1.0);
        assert!(s.is_sdd(0.0));
        assert!(m.submatrix(&[0, 2]).is_alpha_sdd(100.0));
    }
}
