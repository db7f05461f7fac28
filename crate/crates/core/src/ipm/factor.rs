use nalgebra::{DMatrix, DVector};

use super::program::ConeProgram;
use crate::error::{Error, Result};
use crate::sdd::SddMatrix;

/// Which linear solver handles the SDD Schur block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveBackend {
    /// Dense Cholesky below [`DENSE_SOLVE_LIMIT`] variables, PCG above.
    #[default]
    Auto,
    Dense,
    Pcg,
}

pub const DENSE_SOLVE_LIMIT: usize = 400;

/// `H = U S U^T` with `U` unit lower triangular and `S = diag(H_tt) (+) S_x`.
///
/// The `t` block of the barrier Hessian is diagonal, so eliminating it leaves
/// `S_x`, which is a Laplacian plus a positive diagonal.
#[derive(Debug, Clone)]
pub struct HessianFactorization {
    m: usize,
    n: usize,
    htt: Vec<f64>,
    edges: Vec<(usize, usize)>,
    /// `H_{x_j t_e} / H_tt = -H_{x_i t_e} / H_tt`.
    coef: Vec<f64>,
    schur: SddMatrix,
    box_diag: Vec<f64>,
}

impl HessianFactorization {
    pub(crate) fn build(
        prog: &ConeProgram,
        t: &[f64],
        htt: Vec<f64>,
        alpha: Vec<f64>,
        beta: Vec<f64>,
        box_diag: Vec<f64>,
    ) -> Result<Self> {
        let (m, n) = (prog.m(), prog.n());
        let cap = 3.0 * prog.u;
        let mut edges = Vec::with_capacity(m);
        let mut coef = vec![0.0; m];
        let mut weights = Vec::with_capacity(m);
        let mut diag = box_diag.clone();
        for e in 0..m {
            let (i, j) = prog.edge(e);
            edges.push((i, j));
            if i == j {
                continue;
            }
            let te = t[e];
            let r = te / (cap - te);
            // beta' - alpha, formed without cancellation.
            let gap = beta[e] - alpha[e] + r * r;
            let bprime = alpha[e] + gap;
            let w = alpha[e] * gap / bprime;
            if !w.is_finite() {
                return Err(Error::NonFinite("Hessian factorization"));
            }
            coef[e] = alpha[e] / te / htt[e];
            weights.push((i, j, w));
            diag[i] += w;
            diag[j] += w;
        }
        let schur = SddMatrix::from_weights(diag, &weights)?;
        Ok(HessianFactorization {
            m,
            n,
            htt,
            edges,
            coef,
            schur,
            box_diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    /// The reduced matrix `S_x` on the `x` block.
    pub fn schur(&self) -> &SddMatrix {
        &self.schur
    }

    pub fn box_diag(&self) -> &[f64] {
        &self.box_diag
    }

    /// `U S U^T` formed densely; only for checks.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let (m, n) = (self.m, self.n);
        let mut u = DMatrix::identity(m + n, m + n);
        for e in 0..m {
            let (i, j) = self.edges[e];
            if i != j {
                u[(m + i, e)] = -self.coef[e];
                u[(m + j, e)] = self.coef[e];
            }
        }
        let mut s = DMatrix::zeros(m + n, m + n);
        for e in 0..m {
            s[(e, e)] = self.htt[e];
        }
        s.view_mut((m, m), (n, n)).copy_from(&self.schur.to_dense());
        &u * s * u.transpose()
    }

    /// `v` with `||v - H^-1 rhs||_H <= eps ||H^-1 rhs||_H`.
    pub fn solve(&self, rhs: &[f64], eps: f64, backend: SolveBackend) -> Result<Vec<f64>> {
        let (m, n) = (self.m, self.n);
        assert_eq!(rhs.len(), m + n);
        // w = U^-1 rhs; U^-1 = I - L because L maps t into x only.
        let mut w = rhs.to_vec();
        for e in 0..m {
            let (i, j) = self.edges[e];
            if i != j {
                w[m + i] += self.coef[e] * rhs[e];
                w[m + j] -= self.coef[e] * rhs[e];
            }
        }
        for e in 0..m {
            w[e] /= self.htt[e];
        }
        let dense = match backend {
            SolveBackend::Dense => true,
            SolveBackend::Pcg => false,
            SolveBackend::Auto => m + n < DENSE_SOLVE_LIMIT,
        };
        let vx = if dense {
            dense_solve(&self.schur, &w[m..])?
        } else {
            // Relative energy error <= eps follows from the relative residual
            // scaled by sqrt(cond), bounded via the box diagonal.
            let lmax = 2.0 * self.schur.diag().iter().cloned().fold(0.0, f64::max);
            let lmin = self.box_diag.iter().cloned().fold(f64::INFINITY, f64::min);
            let tol = eps / (lmax / lmin).sqrt();
            pcg(&self.schur, &w[m..], tol, 20 * n + 1000)?
        };
        // v = U^-T w.
        let mut v = w;
        v[m..].copy_from_slice(&vx);
        for e in 0..m {
            let (i, j) = self.edges[e];
            if i != j {
                v[e] += self.coef[e] * (vx[i] - vx[j]);
            }
        }
        Ok(v)
    }
}

fn dense_solve(s: &SddMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let chol = s.to_dense().cholesky().ok_or(Error::SingularPivot(0))?;
    Ok(chol.solve(&DVector::from_column_slice(b)).as_slice().to_vec())
}

/// Jacobi-preconditioned conjugate gradient, stopping at `||r|| <= tol ||b||`.
pub fn pcg(a: &SddMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let dinv: Vec<f64> = a.diag().iter().map(|d| 1.0 / d).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    let mut rnorm = bnorm;
    for _ in 0..max_iter {
        a.matvec_into(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            break;
        }
        let step = rz / pap;
        for k in 0..n {
            x[k] += step * p[k];
            r[k] -= step * ap[k];
        }
        rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm <= tol * bnorm {
            return Ok(x);
        }
        for k in 0..n {
            z[k] = r[k] * dinv[k];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let ratio = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + ratio * p[k];
        }
    }
    if rnorm <= tol * bnorm {
        return Ok(x);
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: rnorm / bnorm,
    })
}
