use super::{box_newton_minimize, NewtonConfig, StopReason};
use crate::error::{Error, Result};
use crate::matrix::{check_scalable, scc_decompose, DiagonalFactors, Scalability, SparseMatrix};
use crate::objective::{balancing_error, scaling_error, BalancingObjective, ScalingObjective, SorObjective};
use crate::sdd::{ChainOracle, KOracle};
use crate::solution::{FactorsResult, TraceRecord};

pub struct DriverConfig {
    pub oracle: Box<dyn KOracle>,
    /// Iteration cap per box-size stage.
    pub max_iterations: usize,
    pub b_start: f64,
    pub b_cap: f64,
    pub step_extension: bool,
}

impl Default for DriverConfig {
    fn default() -> Self {
        DriverConfig {
            oracle: Box::new(ChainOracle::accelerated()),
            max_iterations: 500,
            b_start: 1.0,
            b_cap: 65536.0,
            step_extension: true,
        }
    }
}

struct Stage {
    x: Vec<f64>,
    error: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<TraceRecord>,
    final_b: f64,
}

/// Runs the regularized objective with box guesses `B = b_start, 2 b_start, ...`
/// (warm-started) until the error target is met or `B` exceeds the cap.
fn doubling<O: SorObjective>(
    make: impl Fn(f64) -> Result<O>,
    x0: Vec<f64>,
    target: f64,
    phase: &'static str,
    cfg: &DriverConfig,
) -> Result<Stage> {
    let mut b = cfg.b_start;
    let mut x = x0;
    let mut iterations = 0;
    let mut trace = Vec::new();
    let mut error;
    loop {
        let obj = make(b)?;
        let ncfg = NewtonConfig {
            max_iterations: cfg.max_iterations,
            target_error: Some(target),
            step_extension: cfg.step_extension,
            phase,
            box_guess: Some(b),
            ..Default::default()
        };
        let out = box_newton_minimize(&obj, cfg.oracle.as_ref(), &x, &ncfg)?;
        iterations += out.iterations;
        trace.extend(out.trace.records);
        x = out.x;
        error = out.error;
        if out.stop == StopReason::ErrorTarget || error <= target {
            return Ok(Stage {
                x,
                error,
                iterations,
                converged: true,
                trace,
                final_b: b,
            });
        }
        if 2.0 * b > cfg.b_cap {
            return Ok(Stage {
                x,
                error,
                iterations,
                converged: false,
                trace,
                final_b: b,
            });
        }
        b *= 2.0;
    }
}

/// Finds `(x, y)` with `scaling_error(D(e^x) A D(e^y), r, c) <= eps`.
///
/// Targets with `max(||r||_inf, ||c||_inf) = s > 1` are handled by solving for
/// `A / s`, `r / s`, `c / s` with `eps / s^2`; the factors are the same.
pub fn solve_scaling(a: &SparseMatrix, r: &[f64], c: &[f64], eps: f64, cfg: &DriverConfig) -> Result<FactorsResult> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    match check_scalable(a, r, c)? {
        Scalability::Infeasible { rows, cols } => {
            return Err(Error::Infeasible(format!(
                "zero minor rows {rows:?} x cols {cols:?} violates the supply condition"
            )))
        }
        Scalability::Exact | Scalability::Almost => {}
    }
    let s = r.iter().chain(c).cloned().fold(0.0, f64::max);
    let (a1, r1, c1, eps1) = if s > 1.0 {
        (
            a.scaled(1.0 / s)?,
            r.iter().map(|v| v / s).collect(),
            c.iter().map(|v| v / s).collect(),
            eps / (s * s),
        )
    } else {
        (a.clone(), r.to_vec(), c.to_vec(), eps)
    };
    let base = ScalingObjective::new(a1, r1, c1)?;
    // The metric is a squared error, so the regularizer is sized for sqrt(eps).
    let eps_l = eps1.sqrt().min(1.0);
    let stage = doubling(|b| Ok(base.regularize(eps_l, b)), vec![0.0; 2 * a.n()], eps1, "newton", cfg)?;
    let (x, y) = base.split(&stage.x);
    let error = scaling_error(&a.apply_scaling(&x, &y)?, r, c);
    let mut res = FactorsResult::new(DiagonalFactors { x, y: Some(y) }, error, stage.iterations, error <= eps);
    if !stage.converged {
        res.notes.push(format!("box guess cap {} reached", cfg.b_cap));
    }
    if s > 1.0 {
        res.notes.push(format!("targets rescaled by 1/{s}"));
    }
    res.notes.push(format!("final box guess {}", stage.final_b));
    res.trace = stage.trace;
    Ok(res)
}

/// Finds `x` with `balancing_error(D(e^x) A D(e^-x)) <= eps`.
///
/// Each strongly connected block is balanced to `eps / 2`; blocks are then offset
/// in topological order so that every entry between blocks is small compared to
/// the weight inside blocks.
pub fn solve_balancing(a: &SparseMatrix, eps: f64, cfg: &DriverConfig) -> Result<FactorsResult> {
    balance_by_blocks(a, eps, &mut |sub, target| {
        let base = BalancingObjective::new(sub.clone());
        let stage = doubling(|b| base.regularize(target, b), vec![0.0; sub.n()], target, "newton", cfg)?;
        Ok(BlockSolution {
            x: stage.x,
            error: stage.error,
            iterations: stage.iterations,
            converged: stage.converged,
            trace: stage.trace,
        })
    })
}

pub(crate) struct BlockSolution {
    pub x: Vec<f64>,
    pub error: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRecord>,
}

/// Balances every nontrivial strongly connected block with `solve_block` (to
/// `eps / 2`) and suppresses the entries between blocks.
pub(crate) fn balance_by_blocks(
    a: &SparseMatrix,
    eps: f64,
    solve_block: &mut dyn FnMut(&SparseMatrix, f64) -> Result<BlockSolution>,
) -> Result<FactorsResult> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let n = a.n();
    let scc = scc_decompose(a);
    let mut x = vec![0.0; n];
    let mut iterations = 0;
    let mut trace = Vec::new();
    let mut notes = Vec::new();
    let mut converged = true;
    for comp in &scc.components {
        if comp.len() < 2 {
            continue;
        }
        let sub = a.submatrix(comp)?;
        let stage = solve_block(&sub, eps / 2.0)?;
        iterations += stage.iterations;
        trace.extend(stage.trace);
        converged &= stage.converged;
        if !stage.converged {
            notes.push(format!(
                "block of size {} stopped at error {:e} (box guess cap reached)",
                comp.len(),
                stage.error
            ));
        }
        for (k, &v) in comp.iter().enumerate() {
            x[v] = stage.x[k];
        }
    }

    if scc.components.len() > 1 {
        let comp_of = &scc.component_id;
        let mut within = 0.0;
        let mut cross = 0usize;
        let m = a.apply_balancing(&x)?;
        for (i, j, v) in m.iter() {
            if comp_of[i] == comp_of[j] {
                within += v;
            } else {
                cross += 1;
            }
        }
        if cross > 0 {
            if within > 0.0 {
                let tau = eps * within / (4.0 * cross as f64);
                let mut offset = vec![0.0f64; scc.components.len()];
                // Components are in topological order, so sources of incoming
                // cross entries already have their offsets.
                for (q, comp) in scc.components.iter().enumerate() {
                    let mut o = 0.0f64;
                    for &j in comp {
                        for (i, e) in a.col_entries(j) {
                            let p = comp_of[i];
                            if p != q {
                                let need = offset[p] + a.values()[e].ln() + x[i] - x[j] - tau.ln();
                                o = o.max(need);
                            }
                        }
                    }
                    offset[q] = o;
                }
                for v in 0..n {
                    x[v] += offset[comp_of[v]];
                }
                notes.push(format!(
                    "{} strongly connected blocks; {cross} entries between blocks suppressed below {tau:e}",
                    scc.components.len()
                ));
            } else {
                notes.push(
                    "no strongly connected block carries weight; the balancing error is invariant under \
                     diagonal similarity here and cannot be reduced"
                        .into(),
                );
            }
        }
    }

    let error = balancing_error(&a.apply_balancing(&x)?)?;
    let mut res = FactorsResult::new(DiagonalFactors { x, y: None }, error, iterations, converged && error <= eps);
    res.notes = notes;
    res.trace = trace;
    Ok(res)
}
