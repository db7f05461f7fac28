use std::collections::VecDeque;

use serde::Serialize;

use super::SparseMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Scalability {
    Exact,
    Almost,
    /// `A[rows, cols]` is a zero minor with `sum(r over other rows) < sum(c over cols)`.
    Infeasible { rows: Vec<usize>, cols: Vec<usize> },
}

struct Edge {
    to: usize,
    cap: f64,
}

struct Dinic {
    adj: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    level: Vec<i64>,
    it: Vec<usize>,
    tol: f64,
}

impl Dinic {
    fn new(nodes: usize, tol: f64) -> Self {
        Dinic {
            adj: vec![Vec::new(); nodes],
            edges: Vec::new(),
            level: vec![-1; nodes],
            it: vec![0; nodes],
            tol,
        }
    }

    fn add(&mut self, u: usize, v: usize, cap: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to: v, cap });
        self.edges.push(Edge { to: u, cap: 0.0 });
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
        id
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &id in &self.adj[u] {
                let e = &self.edges[id];
                if e.cap > self.tol && self.level[e.to] < 0 {
                    self.level[e.to] = self.level[u] + 1;
                    q.push_back(e.to);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: f64) -> f64 {
        if u == t {
            return pushed;
        }
        while self.it[u] < self.adj[u].len() {
            let id = self.adj[u][self.it[u]];
            let (to, cap) = (self.edges[id].to, self.edges[id].cap);
            if cap > self.tol && self.level[to] == self.level[u] + 1 {
                let got = self.dfs(to, t, pushed.min(cap));
                if got > 0.0 {
                    self.edges[id].cap -= got;
                    self.edges[id ^ 1].cap += got;
                    return got;
                }
            }
            self.it[u] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        while self.bfs(s, t) {
            self.it.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= 0.0 {
                    break;
                }
                total += f;
            }
        }
        total
    }
}

/// Decides exact / almost / no `(r, c)`-scalability of `A` from a transportation
/// max-flow on `supp(A)`.
pub fn check_scalable(a: &SparseMatrix, r: &[f64], c: &[f64]) -> Result<Scalability> {
    let n = a.n();
    for v in [r, c] {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidArgument("targets must be finite and nonnegative".into()));
        }
    }
    let (sr, sc): (f64, f64) = (r.iter().sum(), c.iter().sum());
    if (sr - sc).abs() > 1e-12 * sr.max(sc).max(f64::MIN_POSITIVE) {
        return Err(Error::SumMismatch { rows: sr, cols: sc });
    }
    if sr == 0.0 {
        // Only the zero matrix has zero row sums; approached by shrinking everything.
        return Ok(if a.nnz() == 0 { Scalability::Exact } else { Scalability::Almost });
    }

    let tol = 1e-14 * sr;
    let (s, t) = (0, 2 * n + 1);
    let mut g = Dinic::new(2 * n + 2, tol);
    for i in 0..n {
        g.add(s, 1 + i, r[i]);
        g.add(1 + n + i, t, c[i]);
    }
    let big = 2.0 * sr + 1.0;
    let mut mid = Vec::with_capacity(a.nnz());
    for (i, j, _) in a.iter() {
        mid.push((i, j, g.add(1 + i, 1 + n + j, big)));
    }
    let value = g.max_flow(s, t);

    if value < sr * (1.0 - 1e-12) {
        // Min cut: source-side rows Z see only source-side columns, so Z x L is zero
        // for L the sink-side columns.
        let mut seen = vec![false; 2 * n + 2];
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &id in &g.adj[u] {
                let e = &g.edges[id];
                if e.cap > tol && !seen[e.to] {
                    seen[e.to] = true;
                    q.push_back(e.to);
                }
            }
        }
        let rows = (0..n).filter(|&i| seen[1 + i]).collect();
        let cols = (0..n).filter(|&j| !seen[1 + n + j]).collect();
        return Ok(Scalability::Infeasible { rows, cols });
    }

    // An edge with zero flow can carry positive flow in another feasible flow iff it
    // lies on a cycle of the residual middle graph.
    let flow_tol = 1e-12 * sr;
    let mut h: Vec<Vec<usize>> = vec![Vec::new(); 2 * n];
    let mut idle = Vec::new();
    for &(i, j, id) in &mid {
        let f = g.edges[id ^ 1].cap;
        h[i].push(n + j);
        if f > flow_tol {
            h[n + j].push(i);
        } else {
            idle.push((i, j));
        }
    }
    if idle.is_empty() {
        return Ok(Scalability::Exact);
    }
    let mut trip = Vec::new();
    for (u, out) in h.iter().enumerate() {
        for &v in out {
            trip.push((u, v, 1.0));
        }
    }
    let graph = SparseMatrix::from_triplets(2 * n, &trip)?;
    let comp = super::scc_decompose(&graph).component_id;
    if idle.iter().all(|&(i, j)| comp[i] == comp[n + j]) {
        Ok(Scalability::Exact)
    } else {
        Ok(Scalability::Almost)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<f64>]) -> SparseMatrix {
        SparseMatrix::from_dense(rows).unwrap()
    }

    #[test]
    fn identity_is_exact() {
        let a = m(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(check_scalable(&a, &[1.0, 1.0], &[1.0, 1.0]).unwrap(), Scalability::Exact);
    }

    #[test]
    fn zero_column_is_infeasible() {
        let a = m(&[vec![0.0, 1.0], vec![0.0, 1.0]]);
        match check_scalable(&a, &[1.0, 1.0], &[1.0, 1.0]).unwrap() {
            Scalability::Infeasible { rows, cols } => {
                let zc: f64 = (0..2).filter(|i| !rows.contains(i)).map(|_| 1.0).sum();
                let lc = cols.len() as f64;
                assert!(zc < lc);
                for &i in &rows {
                    for &j in &cols {
                        assert_eq!(a.get(i, j), 0.0);
                    }
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn triangular_is_almost() {
        let a = m(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        assert_eq!(check_scalable(&a, &[1.0, 1.0], &[1.0, 1.0]).unwrap(), Scalability::Almost);
    }

    #[test]
    fn positive_is_exact() {
        let a = m(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(check_scalable(&a, &[0.3, 0.7], &[0.5, 0.5]).unwrap(), Scalability::Exact);
    }

    #[test]
    fn mismatched_sums_rejected() {
        let a = m(&[vec![1.0]]);
        assert!(matches!(check_scalable(&a, &[1.0], &[2.0]), Err(Error::SumMismatch { .. })));
    }
}
