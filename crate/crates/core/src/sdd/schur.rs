use std::collections::BTreeMap;

use super::SddMatrix;
use crate::error::{Error, Result};

/// Graphs up to this many vertices use dense weight storage during elimination.
pub const DENSE_LIMIT: usize = 1024;

/// One eliminated vertex: its pivot and its couplings to the vertices still
/// present at elimination time.
#[derive(Debug, Clone)]
pub(crate) struct Pivot {
    pub v: usize,
    pub d: f64,
    pub nbrs: Vec<(usize, f64)>,
}

enum Store {
    Dense(Vec<f64>),
    Sparse(Vec<BTreeMap<usize, f64>>),
}

/// SDD matrix kept as nonnegative couplings plus excess diagonal, so that
/// eliminating a vertex only ever adds nonnegative quantities and the result stays
/// SDD in floating point.
pub(crate) struct WorkGraph {
    n: usize,
    slack: Vec<f64>,
    store: Store,
    alive: Vec<bool>,
}

impl WorkGraph {
    pub fn new(m: &SddMatrix) -> Self {
        let n = m.n();
        let slack: Vec<f64> = (0..n).map(|i| m.slack(i).max(0.0)).collect();
        let store = if n <= DENSE_LIMIT {
            let mut w = vec![0.0; n * n];
            for i in 0..n {
                for (j, v) in m.row(i) {
                    w[i * n + j] = -v;
                }
            }
            Store::Dense(w)
        } else {
            let mut rows = vec![BTreeMap::new(); n];
            for (i, row) in rows.iter_mut().enumerate() {
                for (j, v) in m.row(i) {
                    row.insert(j, -v);
                }
            }
            Store::Sparse(rows)
        };
        WorkGraph {
            n,
            slack,
            store,
            alive: vec![true; n],
        }
    }

    fn neighbours(&self, k: usize) -> Vec<(usize, f64)> {
        match &self.store {
            Store::Dense(w) => (0..self.n)
                .filter(|&j| j != k && self.alive[j] && w[k * self.n + j] > 0.0)
                .map(|j| (j, w[k * self.n + j]))
                .collect(),
            Store::Sparse(rows) => rows[k]
                .iter()
                .filter(|(j, w)| self.alive[**j] && **w > 0.0)
                .map(|(j, w)| (*j, *w))
                .collect(),
        }
    }

    /// Eliminates `k`, folding its couplings into its neighbours.
    pub fn eliminate(&mut self, k: usize) -> Pivot {
        let nb = self.neighbours(k);
        let d = self.slack[k] + nb.iter().map(|(_, w)| w).sum::<f64>();
        self.alive[k] = false;
        if d > 0.0 {
            for (a, &(i, wi)) in nb.iter().enumerate() {
                self.slack[i] += wi * self.slack[k] / d;
                for &(j, wj) in &nb[a + 1..] {
                    let add = wi * wj / d;
                    match &mut self.store {
                        Store::Dense(w) => {
                            w[i * self.n + j] += add;
                            w[j * self.n + i] += add;
                        }
                        Store::Sparse(rows) => {
                            *rows[i].entry(j).or_insert(0.0) += add;
                            *rows[j].entry(i).or_insert(0.0) += add;
                        }
                    }
                }
            }
        }
        if let Store::Sparse(rows) = &mut self.store {
            for &(i, _) in &nb {
                rows[i].remove(&k);
            }
            rows[k].clear();
        }
        Pivot { v: k, d, nbrs: nb }
    }

    /// The matrix on the surviving vertices `idx` (sorted), locally renumbered.
    pub fn snapshot(&self, idx: &[usize]) -> Result<SddMatrix> {
        let mut local = vec![usize::MAX; self.n];
        for (k, &i) in idx.iter().enumerate() {
            local[i] = k;
        }
        let mut diag = Vec::with_capacity(idx.len());
        let mut edges = Vec::new();
        for &i in idx {
            let nb = self.neighbours(i);
            diag.push(self.slack[i] + nb.iter().map(|(_, w)| w).sum::<f64>());
            for (j, w) in nb {
                if j > i {
                    edges.push((local[i], local[j], w));
                }
            }
        }
        SddMatrix::from_weights(diag, &edges)
    }
}

/// Exact Schur complement `M[C,C] - M[C,F] M[F,F]^{-1} M[F,C]` on the complement
/// `C` of `f`, indexed in increasing order of `C`.
pub fn schur_complement(m: &SddMatrix, f: &[usize]) -> Result<SddMatrix> {
    let n = m.n();
    let mut in_f = vec![false; n];
    for &i in f {
        if i >= n {
            return Err(Error::IndexOutOfRange {
                line: None,
                row: i,
                col: i,
                n,
            });
        }
        in_f[i] = true;
    }
    let mut g = WorkGraph::new(m);
    for &i in f {
        let p = g.eliminate(i);
        if p.d <= 0.0 && !p.nbrs.is_empty() {
            return Err(Error::SingularPivot(i));
        }
    }
    let c: Vec<usize> = (0..n).filter(|&i| !in_f[i]).collect();
    g.snapshot(&c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let m = SddMatrix::from_weights(vec![2.0, 2.0], &[(0, 1, 1.0)]).unwrap();
        let s = schur_complement(&m, &[0]).unwrap();
        assert_eq!(s.n(), 1);
        assert!((s.diag()[0] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn block_diagonal_untouched() {
        let m = SddMatrix::from_weights(vec![2.0, 2.0, 3.0, 3.0], &[(0, 1, 1.0), (2, 3, 2.0)]).unwrap();
        let s = schur_complement(&m, &[0]).unwrap();
        let d = s.to_dense();
        assert_eq!(d[(1, 1)], 3.0);
        assert_eq!(d[(1, 2)], -2.0);
        assert_eq!(d[(2, 2)], 3.0);
    }

    #[test]
    fn eliminating_a_laplacian_keeps_zero_slack() {
        let m = SddMatrix::from_weights(vec![2.0, 2.0, 2.0], &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let s = schur_complement(&m, &[1]).unwrap();
        assert_eq!(s.slack(0), 0.0);
        assert!((s.diag()[0] - 1.5).abs() < 1e-15);
    }
}
