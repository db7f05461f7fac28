//! Convex objectives for scaling and balancing, their regularizations and the
//! error metrics they certify.

use crate::error::{Error, Result};
use crate::matrix::SparseMatrix;
use crate::sdd::SddMatrix;

/// Value, gradient and (optionally) Hessian at a point.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Option<SddMatrix>,
}

/// A function whose Hessian changes by at most `e^2` on unit infinity-norm balls,
/// with SDD Hessians. This is what the box Newton loop minimizes.
pub trait SorObjective {
    fn dim(&self) -> usize;
    fn evaluate(&self, u: &[f64], want_hessian: bool) -> Result<Evaluation>;
    fn value(&self, u: &[f64]) -> Result<f64> {
        Ok(self.evaluate(u, false)?.value)
    }
    /// Problem-level accuracy (scaling error, balancing error, flow residual).
    fn error_metric(&self, u: &[f64]) -> Result<f64>;
    /// Moves `u` along a direction that does not increase the objective.
    fn recenter(&self, _u: &mut [f64]) {}
}

fn check_len(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    if v.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFinite("objective argument"));
    }
    Ok(())
}

/// `lambda * sum(e^v + e^-v)` with gradient and Hessian diagonal added in place.
fn add_regularizer(lambda: f64, v: &[f64], value: &mut f64, grad: &mut [f64], hdiag: Option<&mut [f64]>) {
    if lambda == 0.0 {
        return;
    }
    let mut h = hdiag;
    for (k, &a) in v.iter().enumerate() {
        let (p, m) = (a.exp(), (-a).exp());
        *value += lambda * (p + m);
        grad[k] += lambda * (p - m);
        if let Some(h) = h.as_deref_mut() {
            h[k] += lambda * (p + m);
        }
    }
}

/// `||r_M - r||^2 + ||c_M - c||^2`.
pub fn scaling_error(m: &SparseMatrix, r: &[f64], c: &[f64]) -> f64 {
    let rm = m.row_sums();
    let cm = m.col_sums();
    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>();
    sq(&rm, r) + sq(&cm, c)
}

/// `||r_M - c_M||_2 / s_M`.
pub fn balancing_error(m: &SparseMatrix) -> Result<f64> {
    let s = m.entry_sum();
    if m.nnz() == 0 || s <= 0.0 {
        return Err(Error::EmptyMatrix);
    }
    let rm = m.row_sums();
    let cm = m.col_sums();
    let d: f64 = rm.iter().zip(&cm).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(d.sqrt() / s)
}

/// `f(x, y) = sum A_ij e^{x_i + y_j} - <r, x> - <c, y>`, optionally regularized.
///
/// As an [`SorObjective`] the variable is `u = (x, -y)`, the frame in which the
/// Hessian has nonpositive off-diagonals.
#[derive(Debug, Clone)]
pub struct ScalingObjective {
    pub a: SparseMatrix,
    pub r: Vec<f64>,
    pub c: Vec<f64>,
    pub lambda: f64,
    pub box_guess: f64,
}

impl ScalingObjective {
    /// Requires `sum r = sum c` and `||r||_inf, ||c||_inf <= 1`.
    pub fn new(a: SparseMatrix, r: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let n = a.n();
        check_len(&r, n)?;
        check_len(&c, n)?;
        if r.iter().chain(&c).any(|v| *v < 0.0) {
            return Err(Error::InvalidArgument("targets must be nonnegative".into()));
        }
        let (sr, sc): (f64, f64) = (r.iter().sum(), c.iter().sum());
        if (sr - sc).abs() > 1e-12 * sr.max(sc) {
            return Err(Error::SumMismatch { rows: sr, cols: sc });
        }
        if r.iter().chain(&c).any(|v| *v > 1.0 + 1e-12) {
            return Err(Error::InvalidArgument("targets must satisfy ||r||, ||c|| <= 1; rescale first".into()));
        }
        Ok(ScalingObjective {
            a,
            r,
            c,
            lambda: 0.0,
            box_guess: f64::INFINITY,
        })
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    /// Regularization weight `eps^2 / (36 n^2 e^B)`.
    pub fn regularization_weight(n: usize, eps: f64, b: f64) -> f64 {
        eps * eps / (36.0 * (n * n) as f64 * b.exp())
    }

    pub fn regularize(&self, eps: f64, b: f64) -> Self {
        let mut o = self.clone();
        o.lambda = Self::regularization_weight(self.n(), eps, b);
        o.box_guess = b;
        o
    }

    /// Value, gradient `(r_M - r, c_M - c)` (plus regularizer terms) and the Hessian
    /// with respect to `(x, -y)`.
    pub fn eval(&self, x: &[f64], y: &[f64], want_hessian: bool) -> Result<Evaluation> {
        let n = self.n();
        check_len(x, n)?;
        check_len(y, n)?;
        let mv = self.a.scaled_values(x, y)?;
        let mut rm = vec![0.0; n];
        let mut cm = vec![0.0; n];
        for i in 0..n {
            for e in self.a.row_range(i) {
                rm[i] += mv[e];
                cm[self.a.col_of(e)] += mv[e];
            }
        }
        let mut value: f64 = mv.iter().sum();
        value -= dot(&self.r, x) + dot(&self.c, y);
        let mut grad = Vec::with_capacity(2 * n);
        grad.extend(rm.iter().zip(&self.r).map(|(a, b)| a - b));
        grad.extend(cm.iter().zip(&self.c).map(|(a, b)| a - b));
        let mut hdiag = if want_hessian {
            let mut d = rm.clone();
            d.extend_from_slice(&cm);
            Some(d)
        } else {
            None
        };
        let (gx, gy) = grad.split_at_mut(n);
        match hdiag.as_deref_mut() {
            Some(h) => {
                let (hx, hy) = h.split_at_mut(n);
                add_regularizer(self.lambda, x, &mut value, gx, Some(hx));
                add_regularizer(self.lambda, y, &mut value, gy, Some(hy));
            }
            None => {
                add_regularizer(self.lambda, x, &mut value, gx, None);
                add_regularizer(self.lambda, y, &mut value, gy, None);
            }
        }
        if !value.is_finite() {
            return Err(Error::NonFinite("scaling objective"));
        }
        let hessian = match hdiag {
            Some(d) => {
                let mut edges = Vec::with_capacity(self.a.nnz());
                for i in 0..n {
                    for e in self.a.row_range(i) {
                        edges.push((i, n + self.a.col_of(e), mv[e]));
                    }
                }
                Some(SddMatrix::from_weights(d, &edges)?)
            }
            None => None,
        };
        Ok(Evaluation {
            value,
            gradient: grad,
            hessian,
        })
    }

    /// Splits a Newton-frame vector `u = (x, -y)` into `(x, y)`.
    pub fn split(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        (u[..n].to_vec(), u[n..].iter().map(|v| -v).collect())
    }

    pub fn join(x: &[f64], y: &[f64]) -> Vec<f64> {
        x.iter().cloned().chain(y.iter().map(|v| -v)).collect()
    }
}

impl SorObjective for ScalingObjective {
    fn dim(&self) -> usize {
        2 * self.n()
    }

    fn evaluate(&self, u: &[f64], want_hessian: bool) -> Result<Evaluation> {
        check_len(u, 2 * self.n())?;
        let (x, y) = self.split(u);
        let mut ev = self.eval(&x, &y, want_hessian)?;
        for g in &mut ev.gradient[self.n()..] {
            *g = -*g;
        }
        Ok(ev)
    }

    fn error_metric(&self, u: &[f64]) -> Result<f64> {
        let (x, y) = self.split(u);
        Ok(scaling_error(&self.a.apply_scaling(&x, &y)?, &self.r, &self.c))
    }
}

/// `f(x) = sum A_ij e^{x_i - x_j}`, optionally regularized.
#[derive(Debug, Clone)]
pub struct BalancingObjective {
    pub a: SparseMatrix,
    pub lambda: f64,
    pub box_guess: f64,
}

impl BalancingObjective {
    pub fn new(a: SparseMatrix) -> Self {
        BalancingObjective {
            a,
            lambda: 0.0,
            box_guess: f64::INFINITY,
        }
    }

    /// Regularization weight `eps^2 l_A / (48 n e^B)`.
    pub fn regularization_weight(n: usize, min_entry: f64, eps: f64, b: f64) -> f64 {
        eps * eps * min_entry / (48.0 * n as f64 * b.exp())
    }

    pub fn regularize(&self, eps: f64, b: f64) -> Result<Self> {
        let l = self.a.stats()?.min_nonzero;
        let mut o = self.clone();
        o.lambda = Self::regularization_weight(self.a.n(), l, eps, b);
        o.box_guess = b;
        Ok(o)
    }

    /// Value, gradient `r_M - c_M` and Hessian `D(r_M + c_M) - (M + M^T)`
    /// (plus regularizer terms).
    pub fn eval(&self, x: &[f64], want_hessian: bool) -> Result<Evaluation> {
        let n = self.a.n();
        check_len(x, n)?;
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let mv = self.a.scaled_values(x, &neg)?;
        let mut value = 0.0;
        let mut grad = vec![0.0; n];
        let mut hdiag = vec![0.0; if want_hessian { n } else { 0 }];
        let mut edges = Vec::new();
        for i in 0..n {
            for e in self.a.row_range(i) {
                let j = self.a.col_of(e);
                value += mv[e];
                if i == j {
                    continue;
                }
                grad[i] += mv[e];
                grad[j] -= mv[e];
                if want_hessian {
                    hdiag[i] += mv[e];
                    hdiag[j] += mv[e];
                    edges.push((i, j, mv[e]));
                }
            }
        }
        let h = if want_hessian { Some(hdiag.as_mut_slice()) } else { None };
        add_regularizer(self.lambda, x, &mut value, &mut grad, h);
        if !value.is_finite() {
            return Err(Error::NonFinite("balancing objective"));
        }
        let hessian = if want_hessian {
            Some(SddMatrix::from_weights(hdiag, &edges)?)
        } else {
            None
        };
        Ok(Evaluation {
            value,
            gradient: grad,
            hessian,
        })
    }

    /// Shift `c` minimizing the objective along `x + c 1`; only the regularizer
    /// depends on it.
    pub fn best_shift(&self, x: &[f64]) -> f64 {
        if self.lambda == 0.0 {
            return -x.iter().sum::<f64>() / x.len() as f64;
        }
        let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
        // Stable logs of sum e^{x} and sum e^{-x}.
        let lp = m + x.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        let ln = -lo + x.iter().map(|v| (lo - v).exp()).sum::<f64>().ln();
        0.5 * (ln - lp)
    }
}

impl SorObjective for BalancingObjective {
    fn dim(&self) -> usize {
        self.a.n()
    }

    fn evaluate(&self, u: &[f64], want_hessian: bool) -> Result<Evaluation> {
        self.eval(u, want_hessian)
    }

    fn error_metric(&self, u: &[f64]) -> Result<f64> {
        balancing_error(&self.a.apply_balancing(u)?)
    }

    fn recenter(&self, u: &mut [f64]) {
        let c = self.best_shift(u);
        u.iter_mut().for_each(|v| *v += c);
    }
}

/// `f(x) = sum A_ij e^{x_i - x_j} - <d, x>`, whose gradient is `L(x) - d` for the
/// flow operator `L`.
#[derive(Debug, Clone)]
pub struct FlowObjective {
    pub a: SparseMatrix,
    pub d: Vec<f64>,
}

impl FlowObjective {
    pub fn new(a: SparseMatrix, d: Vec<f64>) -> Result<Self> {
        check_len(&d, a.n())?;
        let s: f64 = d.iter().sum();
        let scale: f64 = d.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        if s.abs() > 1e-12 * scale {
            return Err(Error::InvalidArgument(format!("demands must sum to zero (sum = {s:e})")));
        }
        Ok(FlowObjective { a, d })
    }

    /// `L(x)_v = sum_{(v,u)} w e^{x_v - x_u} - sum_{(u,v)} w e^{x_u - x_v}`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        flow_operator_apply(&self.a, x)
    }
}

pub fn flow_operator_apply(a: &SparseMatrix, x: &[f64]) -> Result<Vec<f64>> {
    check_len(x, a.n())?;
    let m = a.apply_balancing(x)?;
    Ok(m.row_sums().iter().zip(m.col_sums()).map(|(r, c)| r - c).collect())
}

impl SorObjective for FlowObjective {
    fn dim(&self) -> usize {
        self.a.n()
    }

    fn evaluate(&self, u: &[f64], want_hessian: bool) -> Result<Evaluation> {
        let mut ev = BalancingObjective::new(self.a.clone()).eval(u, want_hessian)?;
        ev.value -= dot(&self.d, u);
        for (g, d) in ev.gradient.iter_mut().zip(&self.d) {
            *g -= d;
        }
        Ok(ev)
    }

    fn error_metric(&self, u: &[f64]) -> Result<f64> {
        let l = self.apply(u)?;
        Ok(l.iter().zip(&self.d).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
    }

    fn recenter(&self, u: &mut [f64]) {
        let c = u.iter().sum::<f64>() / u.len() as f64;
        u.iter_mut().for_each(|v| *v -= c);
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[Vec<f64>]) -> SparseMatrix {
        SparseMatrix::from_dense(rows).unwrap()
    }

    #[test]
    fn scaling_at_origin() {
        let a = dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let o = ScalingObjective::new(a, vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let ev = o.eval(&[0.0; 2], &[0.0; 2], true).unwrap();
        assert_eq!(ev.value, 4.0);
        assert_eq!(ev.gradient, vec![1.0; 4]);
        assert!(ev.hessian.unwrap().is_sdd(1e-12));
    }

    #[test]
    fn balancing_two_by_two() {
        let o = BalancingObjective::new(dense(&[vec![0.0, 4.0], vec![1.0, 0.0]]));
        let ev = o.eval(&[0.0; 2], true).unwrap();
        assert_eq!(ev.value, 5.0);
        assert_eq!(ev.gradient, vec![3.0, -3.0]);
        let h = ev.hessian.unwrap().to_dense();
        assert_eq!(h[(0, 0)], 5.0);
        assert_eq!(h[(0, 1)], -5.0);
        assert_eq!(h[(1, 1)], 5.0);
    }

    #[test]
    fn regularization_weights() {
        let l = ScalingObjective::regularization_weight(2, 0.6, 1.0);
        assert!((l - 0.36 / (144.0 * 1f64.exp())).abs() < 1e-18);
        assert!((l - 9.196e-4).abs() < 1e-6);
        let l = BalancingObjective::regularization_weight(2, 1.0, 1.0, 2f64.ln());
        assert!((l - 1.0 / 192.0).abs() < 1e-15);
        let o = BalancingObjective::new(dense(&[vec![0.0, 4.0], vec![1.0, 0.0]]))
            .regularize(1.0, 2f64.ln())
            .unwrap();
        assert!((o.eval(&[0.0; 2], false).unwrap().value - (5.0 + 4.0 / 192.0)).abs() < 1e-14);
    }

    #[test]
    fn error_metrics() {
        let m = dense(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert_eq!(scaling_error(&m, &[1.0, 1.0], &[1.0, 1.0]), 0.0);
        let m = dense(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        assert_eq!(scaling_error(&m, &[1.0, 1.0], &[1.0, 1.0]), 2.0);
        let m = dense(&[vec![0.0, 4.0], vec![1.0, 0.0]]);
        let e = balancing_error(&m).unwrap();
        assert!((e - 3.0 * 2f64.sqrt() / 5.0).abs() < 1e-15);
        assert!((balancing_error(&m.scaled(7.0).unwrap()).unwrap() - e).abs() < 1e-15);
        assert_eq!(balancing_error(&dense(&[vec![0.0, 2.0], vec![2.0, 0.0]])).unwrap(), 0.0);
    }

    #[test]
    fn flow_operator() {
        let a = SparseMatrix::from_triplets(2, &[(0, 1, 3.0)]).unwrap();
        let l = flow_operator_apply(&a, &[0.0, 0.0]).unwrap();
        assert!((l[0] - 3.0).abs() < 1e-14 && (l[1] + 3.0).abs() < 1e-14);
        let a = dense(&[vec![0.0, 4.0], vec![1.0, 0.0]]);
        let l = flow_operator_apply(&a, &[-(2f64.ln()), 0.0]).unwrap();
        assert!(l.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn best_shift_is_stationary() {
        let o = BalancingObjective::new(dense(&[vec![0.0, 4.0], vec![1.0, 0.0]]))
            .regularize(1.0, 1.0)
            .unwrap();
        let mut x = vec![3.0, 1.0];
        o.recenter(&mut x);
        let g: f64 = o.eval(&x, false).unwrap().gradient.iter().sum();
        assert!(g.abs() < 1e-15);
    }
}
