//! Interior point method on the exponential-cone form of the flow objective.
//!
//! Both problems minimize `sum A_ij e^{x_i - x_j} - <d, x>`: balancing with
//! `d = 0`, scaling on the bipartite embedding `[[0, A], [0, 0]]` with
//! `d = (r, -c)`, where the second half of `x` is `-y`.

mod factor;
mod path;
mod program;

pub use factor::{pcg, HessianFactorization, SolveBackend, DENSE_SOLVE_LIMIT};
pub use path::{gap_bound, path_follow, IpmConfig, PathOutcome, Schedule, VerifyStats, CENTERED};
pub use program::{BarrierEvaluation, ConeProgram};

use crate::error::{Error, Result};
use crate::matrix::{check_scalable, DiagonalFactors, Scalability, SparseMatrix};
use crate::newton::drivers::{balance_by_blocks, BlockSolution};
use crate::objective::{balancing_error, scaling_error};
use crate::solution::{FactorsResult, TraceRecord};

#[derive(Debug, Clone)]
pub struct IpmDriverConfig {
    pub ipm: IpmConfig,
    pub b_start: f64,
    pub b_cap: f64,
}

impl Default for IpmDriverConfig {
    fn default() -> Self {
        IpmDriverConfig {
            ipm: IpmConfig::default(),
            b_start: 1.0,
            b_cap: 65536.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Task<'a> {
    Balance,
    Scale { r: &'a [f64], c: &'a [f64] },
}

struct Doubled {
    x: Vec<f64>,
    error: f64,
    iterations: usize,
    converged: bool,
    final_b: f64,
    trace: Vec<TraceRecord>,
}

/// Path-follows with box bound `B = b_start, 2 b_start, ...` (cold starts) until
/// `error(x) <= target`.
fn doubling(
    a: &SparseMatrix,
    d: &[f64],
    eps_obj: f64,
    target: f64,
    error: &dyn Fn(&[f64]) -> Result<f64>,
    cfg: &IpmDriverConfig,
) -> Result<Doubled> {
    let mut b = cfg.b_start;
    let mut iterations = 0;
    let mut trace = Vec::new();
    loop {
        let prog = ConeProgram::new(a.clone(), d.to_vec(), b)?;
        let out = path_follow(&prog, eps_obj, &cfg.ipm, &mut |x| error(x).is_ok_and(|e| e <= target))?;
        iterations += out.newton_steps;
        trace.extend(out.trace);
        let err = error(&out.x)?;
        if err <= target || 2.0 * b > cfg.b_cap {
            return Ok(Doubled {
                x: out.x,
                error: err,
                iterations,
                converged: err <= target,
                final_b: b,
                trace,
            });
        }
        b *= 2.0;
    }
}

/// Balancing to `eps` with the interior point method on each strongly
/// connected block.
pub fn ipm_balance(a: &SparseMatrix, eps: f64, cfg: &IpmDriverConfig) -> Result<FactorsResult> {
    let mut res = balance_by_blocks(a, eps, &mut |sub, target| {
        let min_entry = sub.values().iter().cloned().fold(f64::INFINITY, f64::min);
        let eps_obj = target * target * min_entry / 8.0;
        let err = |x: &[f64]| balancing_error(&sub.apply_balancing(x)?);
        let out = doubling(sub, &vec![0.0; sub.n()], eps_obj, target, &err, cfg)?;
        Ok(BlockSolution {
            x: out.x,
            error: out.error,
            iterations: out.iterations,
            converged: out.converged,
            trace: out.trace,
        })
    })?;
    for r in res.trace.iter_mut() {
        r.phase = "ipm".into();
    }
    Ok(res)
}

/// Scaling to `eps` (squared margin error) with the interior point method.
pub fn ipm_scale(a: &SparseMatrix, r: &[f64], c: &[f64], eps: f64, cfg: &IpmDriverConfig) -> Result<FactorsResult> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    if let Scalability::Infeasible { rows, cols } = check_scalable(a, r, c)? {
        return Err(Error::Infeasible(format!(
            "zero minor rows {rows:?} x cols {cols:?} violates the supply condition"
        )));
    }
    let n = a.n();
    let s = r.iter().chain(c).cloned().fold(0.0, f64::max).max(1.0);
    let a1 = a.scaled(1.0 / s)?;
    let eps1 = eps / (s * s);
    let (r1, c1): (Vec<f64>, Vec<f64>) = (r.iter().map(|v| v / s).collect(), c.iter().map(|v| v / s).collect());
    let emb = a1.block_embedding();
    let mut d = r1.clone();
    d.extend(c1.iter().map(|v| -v));
    let split = |z: &[f64]| -> (Vec<f64>, Vec<f64>) { (z[..n].to_vec(), z[n..].iter().map(|v| -v).collect()) };
    let err = |z: &[f64]| -> Result<f64> {
        let (x, y) = split(z);
        Ok(scaling_error(&a1.apply_scaling(&x, &y)?, &r1, &c1))
    };
    let out = doubling(&emb, &d, eps1 / (3.0 * n as f64), eps1, &err, cfg)?;
    let (x, y) = split(&out.x);
    let error = scaling_error(&a.apply_scaling(&x, &y)?, r, c);
    let mut res = FactorsResult::new(DiagonalFactors { x, y: Some(y) }, error, out.iterations, error <= eps);
    if !out.converged {
        res.notes.push(format!("box bound cap {} reached", cfg.b_cap));
    }
    if s > 1.0 {
        res.notes.push(format!("targets rescaled by 1/{s}"));
    }
    res.notes.push(format!("final box bound {}", out.final_b));
    res.trace = out.trace;
    Ok(res)
}

pub fn ipm_solve(a: &SparseMatrix, task: Task<'_>, eps: f64, cfg: &IpmDriverConfig) -> Result<FactorsResult> {
    match task {
        Task::Balance => ipm_balance(a, eps, cfg),
        Task::Scale { r, c } => ipm_scale(a, r, c, eps, cfg),
    }
}
