//! Box-constrained Newton method for functions whose Hessian is stable on unit
//! infinity-norm balls.

pub(crate) mod drivers;

pub use drivers::{solve_balancing, solve_scaling, DriverConfig};

use std::f64::consts::E;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::objective::SorObjective;
use crate::sdd::KOracle;
use crate::solution::TraceRecord;

#[derive(Debug, Clone)]
pub struct NewtonConfig {
    pub max_iterations: usize,
    /// Stop once the objective's error metric is at most this.
    pub target_error: Option<f64>,
    /// Stop once the function value is at most this.
    pub target_value: Option<f64>,
    /// Stop when a step decreases `f` by at most this times `max(|f_t|, |f_0|)`.
    pub stagnation: f64,
    /// After each oracle step `x + d`, also try `x + e d` and `x + e^2 d` and keep
    /// the lowest value. The oracle step alone already carries the convergence
    /// guarantee; longer steps only help once the quadratic model is accurate.
    pub step_extension: bool,
    /// Keep every iterate (needed for the observed `R_inf`).
    pub keep_iterates: bool,
    pub phase: &'static str,
    pub box_guess: Option<f64>,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            max_iterations: 1000,
            target_error: None,
            target_value: None,
            stagnation: 1e-14,
            step_extension: false,
            keep_iterates: false,
            phase: "newton",
            box_guess: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ErrorTarget,
    ValueTarget,
    Stagnation,
    Stationary,
    MaxIterations,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
    /// `max_t ||x_t - x_final||_inf` (NaN unless iterates were kept).
    pub r_inf: f64,
    #[serde(skip)]
    pub iterates: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub error: f64,
    pub iterations: usize,
    pub stop: StopReason,
    pub trace: IterationTrace,
    /// The oracle's `k` at the last iteration.
    pub k: f64,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Iterates `x <- x + z / k` with `z` from the oracle on `((e/k)^2 H, g / k)`.
///
/// Each step is checked against the oracle contract; a violation or an increase
/// of `f` beyond rounding is an error.
pub fn box_newton_minimize(
    obj: &dyn SorObjective,
    oracle: &dyn KOracle,
    x0: &[f64],
    cfg: &NewtonConfig,
) -> Result<NewtonOutcome> {
    let n = obj.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    let mut x = x0.to_vec();
    obj.recenter(&mut x);
    let mut ev = obj.evaluate(&x, true)?;
    let f0 = ev.value;
    let mut trace = IterationTrace::default();
    let mut k_last = 1.0;
    let mut last_step = 0.0;
    let mut last_q = None;
    let mut it = 0;
    let stop = loop {
        let err = obj.error_metric(&x)?;
        trace.records.push(TraceRecord {
            phase: cfg.phase.to_string(),
            iteration: it,
            value: ev.value,
            grad_norm: ev.gradient.iter().map(|g| g * g).sum::<f64>().sqrt(),
            error: err,
            step_norm: last_step,
            oracle_value: last_q,
            box_guess: cfg.box_guess,
            mu: None,
        });
        if cfg.keep_iterates {
            trace.iterates.push(x.clone());
        }
        if cfg.target_error.is_some_and(|t| err <= t) {
            break StopReason::ErrorTarget;
        }
        if cfg.target_value.is_some_and(|t| ev.value <= t) {
            break StopReason::ValueTarget;
        }
        if ev.gradient.iter().all(|g| *g == 0.0) {
            break StopReason::Stationary;
        }
        if it >= cfg.max_iterations {
            break StopReason::MaxIterations;
        }

        let h = ev.hessian.take().expect("hessian requested");
        let prepared = oracle.prepare(&h)?;
        let k = prepared.k();
        k_last = k;
        let scale = E * E / (k * k);
        let b: Vec<f64> = ev.gradient.iter().map(|g| g / k).collect();
        let z = prepared.solve(scale, &b)?;
        let zn = inf_norm(&z);
        if !(zn <= k * (1.0 + 1e-9)) {
            return Err(Error::OracleViolation(format!("||z||_inf = {zn} exceeds k = {k}")));
        }
        let q = 0.5 * scale * h.quad(&z) + crate::objective::dot(&b, &z);
        // Rounding in both terms; the quadratic one is bounded by twice its diagonal part.
        let quad_mag: f64 = h.diag().iter().zip(&z).map(|(d, v)| d * v * v).sum();
        let qtol = 1e-12 * (b.iter().map(|v| v.abs()).sum::<f64>() * k + scale * quad_mag + f64::MIN_POSITIVE);
        if !(q <= qtol) {
            return Err(Error::OracleViolation(format!("model value {q:e} is positive")));
        }

        let step: Vec<f64> = z.iter().map(|v| v / k).collect();
        let trial = |t: f64| -> Result<(Vec<f64>, f64)> {
            let y: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + t * d).collect();
            let v = obj.value(&y)?;
            Ok((y, v))
        };
        let mut cands = vec![(1.0, trial(1.0)?)];
        if cfg.step_extension {
            for t in [E * E, E] {
                // A long step may leave the representable range; that only rules it out.
                if let Ok(c) = trial(t) {
                    cands.push((t, c));
                }
            }
        }
        let scale_f = ev.value.abs().max(f0.abs()).max(f64::MIN_POSITIVE);
        let fmin = cands.iter().map(|c| c.1 .1).fold(f64::INFINITY, f64::min);
        let floor = 4.0 * f64::EPSILON * scale_f;
        let mut tied: Vec<_> = cands.into_iter().filter(|c| c.1 .1 <= fmin + floor).collect();
        let pick = if tied.len() > 1 {
            // f cannot tell these apart; the error metric can.
            let mut best = (0, f64::INFINITY);
            for (idx, c) in tied.iter().enumerate() {
                let e = obj.error_metric(&c.1 .0)?;
                if e < best.1 {
                    best = (idx, e);
                }
            }
            best.0
        } else {
            0
        };
        let (best_t, (mut xn, fn_)) = tied.swap_remove(pick);
        if fn_ > ev.value + 1e-9 * scale_f {
            return Err(Error::NonDecreasingStep {
                before: ev.value,
                after: fn_,
            });
        }
        it += 1;
        last_step = best_t * inf_norm(&step);
        last_q = Some(q);
        obj.recenter(&mut xn);
        let decrease = ev.value - fn_;
        if decrease <= cfg.stagnation * scale_f {
            // Near the optimum f stops resolving progress before the error metric
            // does; keep going while the metric still halves and f holds to rounding.
            let e_new = obj.error_metric(&xn)?;
            let resolves = decrease >= -4.0 * f64::EPSILON * scale_f && e_new < 0.5 * err;
            if !resolves {
                if decrease <= 0.0 {
                    break StopReason::Stagnation;
                }
                x = xn;
                ev = obj.evaluate(&x, true)?;
                trace.records.push(TraceRecord {
                    phase: cfg.phase.to_string(),
                    iteration: it,
                    value: ev.value,
                    grad_norm: ev.gradient.iter().map(|g| g * g).sum::<f64>().sqrt(),
                    error: e_new,
                    step_norm: last_step,
                    oracle_value: last_q,
                    box_guess: cfg.box_guess,
                    mu: None,
                });
                if cfg.keep_iterates {
                    trace.iterates.push(x.clone());
                }
                break if cfg.target_error.is_some_and(|t| e_new <= t) {
                    StopReason::ErrorTarget
                } else {
                    StopReason::Stagnation
                };
            }
        }
        x = xn;
        ev = obj.evaluate(&x, true)?;
    };
    trace.r_inf = if cfg.keep_iterates {
        trace
            .iterates
            .iter()
            .map(|v| v.iter().zip(&x).fold(0.0f64, |a, (p, q)| a.max((p - q).abs())))
            .fold(0.0, f64::max)
    } else {
        f64::NAN
    };
    let error = trace.records.last().map_or(f64::NAN, |r| r.error);
    Ok(NewtonOutcome {
        value: ev.value,
        x,
        error,
        iterations: it,
        stop,
        trace,
        k: k_last,
    })
}
