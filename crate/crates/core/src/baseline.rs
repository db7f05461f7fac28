//! Sinkhorn (RAS) scaling, Osborne balancing and a brute-force box-QP solver.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::{DiagonalFactors, SparseMatrix};
use crate::objective::{balancing_error, scaling_error};
use crate::sdd::SddMatrix;
use crate::solution::{FactorsResult, TraceRecord};

pub const BRUTE_FORCE_MAX: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepOrder {
    Cyclic,
    Greedy,
}

#[derive(Debug, Clone, Copy)]
pub struct BaselineConfig {
    pub max_sweeps: usize,
    pub target_error: f64,
    pub order: SweepOrder,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            max_sweeps: 100_000,
            target_error: 1e-6,
            order: SweepOrder::Cyclic,
        }
    }
}

fn logsumexp(terms: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = terms.collect();
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Sets `x` so that the row sums of `D(e^x) A D(e^y)` equal `r`.
pub fn sinkhorn_row_step(a: &SparseMatrix, r: &[f64], x: &mut [f64], y: &[f64]) {
    let la: Vec<f64> = a.values().iter().map(|v| v.ln()).collect();
    for i in 0..a.n() {
        let s = logsumexp(a.row_range(i).map(|e| la[e] + y[a.col_of(e)]));
        x[i] = r[i].ln() - s;
    }
}

fn sinkhorn_col_step(a: &SparseMatrix, la: &[f64], c: &[f64], x: &[f64], y: &mut [f64]) {
    for j in 0..a.n() {
        let s = logsumexp(a.col_entries(j).map(|(i, e)| la[e] + x[i]));
        y[j] = c[j].ln() - s;
    }
}

/// Alternating row/column normalization in log space.
pub fn sinkhorn(a: &SparseMatrix, r: &[f64], c: &[f64], cfg: &BaselineConfig) -> Result<FactorsResult> {
    let n = a.n();
    if r.len() != n || c.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: r.len().min(c.len()),
        });
    }
    let rs = a.row_sums();
    let cs = a.col_sums();
    for i in 0..n {
        if r[i] <= 0.0 || c[i] <= 0.0 {
            return Err(Error::InvalidArgument("targets must be strictly positive".into()));
        }
        if rs[i] == 0.0 {
            return Err(Error::Infeasible(format!("row {i} has no entries")));
        }
        if cs[i] == 0.0 {
            return Err(Error::Infeasible(format!("column {i} has no entries")));
        }
    }
    let la: Vec<f64> = a.values().iter().map(|v| v.ln()).collect();
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut trace = Vec::new();
    let mut err = scaling_error(a, r, c);
    let mut sweeps = 0;
    while err > cfg.target_error && sweeps < cfg.max_sweeps {
        match cfg.order {
            SweepOrder::Cyclic => {
                sinkhorn_row_step(a, r, &mut x, &y);
                sinkhorn_col_step(a, &la, c, &x, &mut y);
            }
            SweepOrder::Greedy => greedy_sweep(a, &la, r, c, &mut x, &mut y),
        }
        sweeps += 1;
        err = scaling_error(&a.apply_scaling(&x, &y)?, r, c);
        trace.push(TraceRecord {
            phase: "sinkhorn".into(),
            iteration: sweeps,
            value: f64::NAN,
            grad_norm: err.sqrt(),
            error: err,
            step_norm: f64::NAN,
            oracle_value: None,
            box_guess: None,
            mu: None,
        });
    }
    let mut res = FactorsResult::new(DiagonalFactors { x, y: Some(y) }, err, sweeps, err <= cfg.target_error);
    res.trace = trace;
    Ok(res)
}

/// `n` single-line updates, each on the row or column with the largest log-ratio
/// between target and current sum.
fn greedy_sweep(a: &SparseMatrix, la: &[f64], r: &[f64], c: &[f64], x: &mut [f64], y: &mut [f64]) {
    let n = a.n();
    let row_lse = |x: &[f64], y: &[f64], i: usize| logsumexp(a.row_range(i).map(|e| la[e] + y[a.col_of(e)])) + x[i];
    let col_lse = |x: &[f64], y: &[f64], j: usize| logsumexp(a.col_entries(j).map(|(i, e)| la[e] + x[i])) + y[j];
    let mut lr: Vec<f64> = (0..n).map(|i| row_lse(x, y, i)).collect();
    let mut lc: Vec<f64> = (0..n).map(|j| col_lse(x, y, j)).collect();
    for _ in 0..n {
        let mut best = (0.0, 0usize, true);
        for i in 0..n {
            let g = (r[i].ln() - lr[i]).abs();
            if g > best.0 {
                best = (g, i, true);
            }
            let g = (c[i].ln() - lc[i]).abs();
            if g > best.0 {
                best = (g, i, false);
            }
        }
        if best.0 == 0.0 {
            break;
        }
        let k = best.1;
        if best.2 {
            x[k] += r[k].ln() - lr[k];
            lr[k] = r[k].ln();
            for e in a.row_range(k) {
                let j = a.col_of(e);
                lc[j] = col_lse(x, y, j);
            }
        } else {
            y[k] += c[k].ln() - lc[k];
            lc[k] = c[k].ln();
            for (i, _) in a.col_entries(k) {
                lr[i] = row_lse(x, y, i);
            }
        }
    }
}

/// Off-diagonal row and column sums of `D(e^x) A D(e^-x)`.
fn offdiag_sums(a: &SparseMatrix, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = a.n();
    let mut r = vec![0.0; n];
    let mut c = vec![0.0; n];
    for (i, j, v) in a.iter() {
        if i != j {
            let m = v * (x[i] - x[j]).exp();
            r[i] += m;
            c[j] += m;
        }
    }
    (r, c)
}

/// Coordinate update `x_i += ln(C_i / R_i) / 2`, the exact minimizer of `sum M` in `x_i`.
pub fn osborne_update(a: &SparseMatrix, x: &mut [f64], i: usize) -> Result<f64> {
    let mut ri = 0.0;
    let mut ci = 0.0;
    for e in a.row_range(i) {
        let j = a.col_of(e);
        if j != i {
            ri += a.values()[e] * (x[i] - x[j]).exp();
        }
    }
    for (j, e) in a.col_entries(i) {
        if j != i {
            ci += a.values()[e] * (x[j] - x[i]).exp();
        }
    }
    if ri == 0.0 || ci == 0.0 {
        if ri == 0.0 && ci == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::InvalidArgument(format!(
            "vertex {i} has zero in- or out-degree; matrix is not strongly connected"
        )));
    }
    let d = 0.5 * (ci / ri).ln();
    x[i] += d;
    Ok(d)
}

/// Osborne's iteration in log space.
pub fn osborne(a: &SparseMatrix, cfg: &BaselineConfig) -> Result<FactorsResult> {
    let n = a.n();
    if !crate::matrix::scc_decompose(a).is_strongly_connected {
        return Err(Error::InvalidArgument("osborne requires a strongly connected matrix".into()));
    }
    let mut x = vec![0.0; n];
    let mut err = balancing_error(a)?;
    let mut sweeps = 0;
    let mut updates = 0usize;
    let mut trace = Vec::new();
    while err > cfg.target_error && sweeps < cfg.max_sweeps {
        match cfg.order {
            SweepOrder::Cyclic => {
                for i in 0..n {
                    if osborne_update(a, &mut x, i)? != 0.0 {
                        updates += 1;
                    }
                }
            }
            SweepOrder::Greedy => {
                for _ in 0..n {
                    let (r, c) = offdiag_sums(a, &x);
                    let i = (0..n)
                        .max_by(|&p, &q| {
                            let g = |k: usize| (c[k] / r[k]).ln().abs();
                            g(p).total_cmp(&g(q)).then(q.cmp(&p))
                        })
                        .unwrap();
                    if osborne_update(a, &mut x, i)? != 0.0 {
                        updates += 1;
                    }
                }
            }
        }
        sweeps += 1;
        let m = a.apply_balancing(&x)?;
        err = balancing_error(&m)?;
        trace.push(TraceRecord {
            phase: "osborne".into(),
            iteration: sweeps,
            value: m.entry_sum(),
            grad_norm: err * m.entry_sum(),
            error: err,
            step_norm: f64::NAN,
            oracle_value: None,
            box_guess: None,
            mu: None,
        });
    }
    let mut res = FactorsResult::new(DiagonalFactors { x, y: None }, err, sweeps, err <= cfg.target_error);
    res.notes.push(format!("{updates} coordinate updates"));
    res.trace = trace;
    Ok(res)
}

/// Exact minimizer of `1/2 z^T M z + b^T z` over `||z||_inf <= radius` by enumerating
/// which coordinates sit at `-radius`, `+radius` or are free.
///
/// Patterns with a singular free block are skipped: some minimizer always has a
/// nonsingular free block, since a zero-curvature direction can be followed to a
/// bound without changing the value.
pub fn brute_force_oracle(m: &SddMatrix, b: &[f64], radius: f64) -> Result<(Vec<f64>, f64)> {
    let n = m.n();
    if n > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge {
            n,
            max: BRUTE_FORCE_MAX,
        });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let md = m.to_dense();
    let mut best = (vec![0.0; n], 0.0);
    let mut pattern = vec![0u8; n];
    let total = 3usize.pow(n as u32);
    let mut z = vec![0.0; n];
    for code in 0..total {
        let mut c = code;
        for p in pattern.iter_mut() {
            *p = (c % 3) as u8;
            c /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| pattern[i] == 0).collect();
        for i in 0..n {
            z[i] = match pattern[i] {
                1 => radius,
                2 => -radius,
                _ => 0.0,
            };
        }
        if !free.is_empty() {
            let k = free.len();
            let sub = DMatrix::from_fn(k, k, |p, q| md[(free[p], free[q])]);
            let rhs = DVector::from_fn(k, |p, _| {
                let i = free[p];
                -(b[i] + (0..n).filter(|&j| pattern[j] != 0).map(|j| md[(i, j)] * z[j]).sum::<f64>())
            });
            let Some(ch) = sub.cholesky() else { continue };
            let sol = ch.solve(&rhs);
            if sol.iter().any(|v| !v.is_finite() || v.abs() > radius * (1.0 + 1e-12)) {
                continue;
            }
            for (p, &i) in free.iter().enumerate() {
                z[i] = sol[p].clamp(-radius, radius);
            }
        }
        let v = m.model_value(&z, b);
        if v < best.1 {
            best = (z.clone(), v);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[Vec<f64>]) -> SparseMatrix {
        SparseMatrix::from_dense(rows).unwrap()
    }

    #[test]
    fn brute_force_examples() {
        let id = SddMatrix::from_weights(vec![1.0, 1.0], &[]).unwrap();
        let (z, v) = brute_force_oracle(&id, &[-10.0, 0.0], 1.0).unwrap();
        assert_eq!(z, vec![1.0, 0.0]);
        assert_eq!(v, -9.5);
        let (z, v) = brute_force_oracle(&id, &[0.0, 0.0], 1.0).unwrap();
        assert_eq!((z, v), (vec![0.0, 0.0], 0.0));
        let m = SddMatrix::from_weights(vec![2.0, 2.0], &[(0, 1, 1.0)]).unwrap();
        let (z, v) = brute_force_oracle(&m, &[-10.0, 0.0], 1.0).unwrap();
        // z = (1, 1/2): 1/2 (2 - 1 + 1/2) - 10
        assert!((v + 9.25).abs() < 1e-12);
        assert!((z[1] - 0.5).abs() < 1e-12);
        let mut grid = f64::INFINITY;
        for p in 0..=2000 {
            for q in 0..=2000 {
                let w = [p as f64 / 1000.0 - 1.0, q as f64 / 1000.0 - 1.0];
                grid = grid.min(m.model_value(&w, &[-10.0, 0.0]));
            }
        }
        assert!((grid - v).abs() < 1e-5);
    }

    #[test]
    fn sinkhorn_uniform() {
        let a = dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let res = sinkhorn(&a, &[1.0, 1.0], &[1.0, 1.0], &BaselineConfig::default()).unwrap();
        assert_eq!(res.iterations, 1);
        let m = a.apply_scaling(&res.factors.x, res.factors.y.as_ref().unwrap()).unwrap();
        assert!(m.values().iter().all(|v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn sinkhorn_two_by_two_closed_form() {
        let a = dense(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let cfg = BaselineConfig {
            target_error: 1e-24,
            ..Default::default()
        };
        let res = sinkhorn(&a, &[1.0, 1.0], &[1.0, 1.0], &cfg).unwrap();
        let m = a.apply_scaling(&res.factors.x, res.factors.y.as_ref().unwrap()).unwrap();
        let t = 2f64.sqrt() / (2f64.sqrt() + 3f64.sqrt());
        assert!((m.get(0, 0) - t).abs() < 1e-10, "{}", m.get(0, 0));
    }

    #[test]
    fn sinkhorn_detects_empty_row() {
        let a = dense(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        assert!(matches!(
            sinkhorn(&a, &[1.0, 1.0], &[1.0, 1.0], &BaselineConfig::default()),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn osborne_two_by_two_in_one_update() {
        let a = dense(&[vec![0.0, 4.0], vec![1.0, 0.0]]);
        let mut x = vec![0.0, 0.0];
        let d = osborne_update(&a, &mut x, 0).unwrap();
        assert!((d - 0.5 * 0.25f64.ln()).abs() < 1e-15);
        assert!(balancing_error(&a.apply_balancing(&x).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn osborne_symmetric_no_sweeps() {
        let a = dense(&[vec![1.0, 2.0], vec![2.0, 3.0]]);
        let res = osborne(&a, &BaselineConfig::default()).unwrap();
        assert_eq!(res.iterations, 0);
        assert_eq!(res.factors.x, vec![0.0, 0.0]);
    }
}
