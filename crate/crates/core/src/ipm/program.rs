use nalgebra::DMatrix;

use super::factor::HessianFactorization;
use crate::error::{Error, Result};
use crate::matrix::SparseMatrix;

/// `min <1, t> - <d, x>` over `A_ij e^{x_i - x_j} <= t_ij <= 3U`, `|x_i| <= B_x`,
/// with one `t` per stored entry. Variables are ordered `(t, x)`.
#[derive(Debug, Clone)]
pub struct ConeProgram {
    pub a: SparseMatrix,
    pub d: Vec<f64>,
    pub bx: f64,
    /// `s_A + ||d||_1 B_x`.
    pub u: f64,
    rows: Vec<usize>,
    log_a: Vec<f64>,
}

/// Barrier value, gradient and factored Hessian of
/// `f_mu = mu (<1, t> - <d, x>) + xi(t, x)`.
#[derive(Debug, Clone)]
pub struct BarrierEvaluation {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub factor: HessianFactorization,
}

impl ConeProgram {
    pub fn new(a: SparseMatrix, d: Vec<f64>, bx: f64) -> Result<Self> {
        if a.nnz() == 0 {
            return Err(Error::EmptyMatrix);
        }
        if d.len() != a.n() {
            return Err(Error::DimensionMismatch {
                expected: a.n(),
                got: d.len(),
            });
        }
        if !(bx > 0.0 && bx.is_finite()) {
            return Err(Error::InvalidArgument(format!("box bound must be positive, got {bx}")));
        }
        let u = a.entry_sum() + d.iter().map(|v| v.abs()).sum::<f64>() * bx;
        let rows = a.row_indices();
        let log_a = a.values().iter().map(|v| v.ln()).collect();
        Ok(ConeProgram {
            a,
            d,
            bx,
            u,
            rows,
            log_a,
        })
    }

    /// Number of `t` variables (stored entries).
    pub fn m(&self) -> usize {
        self.a.nnz()
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    /// Barrier parameter: two per exponential cone, one per cap, two per box.
    pub fn nu(&self) -> f64 {
        (3 * self.m() + 2 * self.n()) as f64
    }

    /// `t = 2U`, `x = 0`.
    pub fn start(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![2.0 * self.u; self.m()], vec![0.0; self.n()])
    }

    pub fn objective(&self, t: &[f64], x: &[f64]) -> f64 {
        t.iter().sum::<f64>() - self.d.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }

    /// `(i, j)` of entry `e`.
    pub fn edge(&self, e: usize) -> (usize, usize) {
        (self.rows[e], self.a.col_of(e))
    }

    /// `ln A_e + x_i - x_j`.
    pub fn log_entry(&self, e: usize, x: &[f64]) -> f64 {
        let (i, j) = self.edge(e);
        self.log_a[e] + x[i] - x[j]
    }

    pub fn is_interior(&self, t: &[f64], x: &[f64]) -> bool {
        x.iter().all(|v| v.abs() < self.bx)
            && (0..self.m()).all(|e| t[e] > 0.0 && t[e] < 3.0 * self.u && t[e].ln() - self.log_entry(e, x) > 0.0)
    }

    fn check(&self, t: &[f64], x: &[f64]) -> Result<()> {
        if t.len() != self.m() || x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.m() + self.n(),
                got: t.len() + x.len(),
            });
        }
        for (i, &v) in x.iter().enumerate() {
            if !(v.abs() < self.bx) {
                return Err(Error::NotInterior(format!("|x_{i}| = {} reaches the box {}", v.abs(), self.bx)));
            }
        }
        for e in 0..self.m() {
            if !(t[e] > 0.0 && t[e] < 3.0 * self.u) {
                return Err(Error::NotInterior(format!("t_{e} = {} outside (0, 3U)", t[e])));
            }
            if !(t[e].ln() - self.log_entry(e, x) > 0.0) {
                return Err(Error::NotInterior(format!("entry {e} violates A e^(x_i - x_j) < t")));
            }
        }
        Ok(())
    }

    /// `-ln(ln t - u) - ln t` for one cone.
    pub fn cone_barrier(t: f64, u: f64) -> f64 {
        -(t.ln() - u).ln() - t.ln()
    }

    /// Barrier `xi(t, x)` alone.
    pub fn barrier_value(&self, t: &[f64], x: &[f64]) -> Result<f64> {
        self.check(t, x)?;
        let mut v = 0.0;
        for e in 0..self.m() {
            v += Self::cone_barrier(t[e], self.log_entry(e, x)) - (3.0 * self.u - t[e]).ln();
        }
        for &xi in x {
            v -= (self.bx - xi).ln() + (self.bx + xi).ln();
        }
        Ok(v)
    }

    /// `mu (<1, t> - <d, x>) + xi(t, x)`.
    pub fn value(&self, t: &[f64], x: &[f64], mu: f64) -> Result<f64> {
        Ok(mu * self.objective(t, x) + self.barrier_value(t, x)?)
    }

    pub fn eval(&self, t: &[f64], x: &[f64], mu: f64) -> Result<BarrierEvaluation> {
        self.check(t, x)?;
        let (m, n) = (self.m(), self.n());
        let mut grad = vec![0.0; m + n];
        let mut htt = vec![0.0; m];
        let mut alpha = vec![0.0; m];
        let mut beta = vec![0.0; m];
        let mut slack = vec![0.0; m];
        let cap = 3.0 * self.u;
        for e in 0..m {
            let te = t[e];
            let s = te.ln() - self.log_entry(e, x);
            let a = 1.0 / (s * s);
            let (i, j) = self.edge(e);
            grad[e] = mu - 1.0 / (s * te) - 1.0 / te + 1.0 / (cap - te);
            if i != j {
                grad[m + i] += 1.0 / s;
                grad[m + j] -= 1.0 / s;
            }
            alpha[e] = a;
            beta[e] = a + a.sqrt() + 1.0;
            slack[e] = s;
            htt[e] = beta[e] / (te * te) + 1.0 / ((cap - te) * (cap - te));
        }
        let mut box_diag = vec![0.0; n];
        for k in 0..n {
            let (p, q) = (self.bx - x[k], self.bx + x[k]);
            grad[m + k] += 1.0 / p - 1.0 / q - mu * self.d[k];
            box_diag[k] = 1.0 / (p * p) + 1.0 / (q * q);
        }
        let value = self.value(t, x, mu)?;
        let factor = HessianFactorization::build(self, t, htt, alpha, beta, box_diag)?;
        Ok(BarrierEvaluation {
            value,
            gradient: grad,
            factor,
        })
    }

    /// Hessian of the barrier assembled directly from the per-cone blocks.
    pub fn dense_hessian(&self, t: &[f64], x: &[f64]) -> Result<DMatrix<f64>> {
        self.check(t, x)?;
        let (m, n) = (self.m(), self.n());
        let mut h = DMatrix::zeros(m + n, m + n);
        let cap = 3.0 * self.u;
        for e in 0..m {
            let te = t[e];
            let s = te.ln() - self.log_entry(e, x);
            let a = 1.0 / (s * s);
            h[(e, e)] = (a + a.sqrt() + 1.0) / (te * te) + 1.0 / ((cap - te) * (cap - te));
            let (i, j) = self.edge(e);
            if i != j {
                let (pi, pj) = (m + i, m + j);
                h[(pi, e)] -= a / te;
                h[(e, pi)] -= a / te;
                h[(pj, e)] += a / te;
                h[(e, pj)] += a / te;
                h[(pi, pi)] += a;
                h[(pj, pj)] += a;
                h[(pi, pj)] -= a;
                h[(pj, pi)] -= a;
            }
        }
        for k in 0..n {
            let (p, q) = (self.bx - x[k], self.bx + x[k]);
            h[(m + k, m + k)] += 1.0 / (p * p) + 1.0 / (q * q);
        }
        Ok(h)
    }
}
