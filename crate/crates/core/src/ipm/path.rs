use serde::Serialize;

use super::factor::SolveBackend;
use super::program::ConeProgram;
use crate::error::{Error, Result};
use crate::solution::TraceRecord;

/// How `mu` grows between centering phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// `mu <- mu (1 + 1/(8 sqrt(nu)))`.
    #[default]
    ShortStep,
    /// Multiplicative factor adapted to how many Newton steps recentering took.
    LongStep,
}

#[derive(Debug, Clone)]
pub struct IpmConfig {
    pub schedule: Schedule,
    /// Relative `H`-norm accuracy of each Newton system solve.
    pub solve_eps: f64,
    pub backend: SolveBackend,
    /// Total Newton step budget.
    pub max_newton: usize,
    /// Check decrement contraction with exact dense solves at every full step.
    pub verify: bool,
}

impl Default for IpmConfig {
    fn default() -> Self {
        IpmConfig {
            schedule: Schedule::ShortStep,
            solve_eps: 0.1,
            backend: SolveBackend::Auto,
            max_newton: 200_000,
            verify: false,
        }
    }
}

/// Decrement checks made in verify mode.
#[derive(Debug, Clone, Default, Serialize)]
pub struct VerifyStats {
    pub exact_checks: usize,
    pub exact_violations: usize,
    pub max_exact_after: f64,
    pub inexact_checks: usize,
    pub inexact_violations: usize,
    pub max_inexact_after: f64,
}

#[derive(Debug, Clone)]
pub struct PathOutcome {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub mu: f64,
    pub mu0: f64,
    /// Newton steps, including the initial centering.
    pub newton_steps: usize,
    /// Number of `mu` increases.
    pub outer_iterations: usize,
    /// Upper bound on `objective - optimum` at the final point.
    pub gap_bound: f64,
    pub decrement: f64,
    /// `||(1, -d)||_{H^-1}` at the starting point and at the first center.
    pub c_norm_start: f64,
    pub c_norm_center: f64,
    /// Whether the caller's predicate ended the run before the gap target.
    pub stopped_early: bool,
    pub verify: VerifyStats,
    pub trace: Vec<TraceRecord>,
}

pub const CENTERED: f64 = 0.125;
const FULL_STEP: f64 = 0.25;
const INEXACT_BOUND: f64 = 1.0 / 6.0;
const BOUNDARY_FRACTION: f64 = 0.99;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Walker<'a> {
    prog: &'a ConeProgram,
    cfg: &'a IpmConfig,
    t: Vec<f64>,
    x: Vec<f64>,
    steps: usize,
    verify: VerifyStats,
    trace: Vec<TraceRecord>,
}

impl Walker<'_> {
    /// Newton direction for `f_mu` and the decrement it implies.
    fn direction(&self, mu: f64, backend: SolveBackend, eps: f64) -> Result<(Vec<f64>, f64)> {
        let ev = self.prog.eval(&self.t, &self.x, mu)?;
        let neg: Vec<f64> = ev.gradient.iter().map(|g| -g).collect();
        let dir = ev.factor.solve(&neg, eps, backend)?;
        let lam = dot(&neg, &dir).max(0.0).sqrt();
        Ok((dir, lam))
    }

    fn exact_decrement(&self, t: &[f64], x: &[f64], mu: f64) -> Result<f64> {
        let ev = self.prog.eval(t, x, mu)?;
        let neg: Vec<f64> = ev.gradient.iter().map(|g| -g).collect();
        let dir = ev.factor.solve(&neg, 0.0, SolveBackend::Dense)?;
        Ok(dot(&neg, &dir).max(0.0).sqrt())
    }

    /// Point reached by `size * dir`, shortened to stay strictly interior.
    /// Returns the point and the size actually used.
    fn advance(&self, dir: &[f64], size: f64) -> (Vec<f64>, Vec<f64>, f64) {
        let (m, p) = (self.prog.m(), self.prog);
        let cap = 3.0 * p.u;
        let mut limit = f64::INFINITY;
        for e in 0..m {
            let d = dir[e];
            if d > 0.0 {
                limit = limit.min((cap - self.t[e]) / d);
            } else if d < 0.0 {
                limit = limit.min(-self.t[e] / d);
            }
        }
        for k in 0..p.n() {
            let d = dir[m + k];
            if d > 0.0 {
                limit = limit.min((p.bx - self.x[k]) / d);
            } else if d < 0.0 {
                limit = limit.min((-p.bx - self.x[k]) / d);
            }
        }
        let mut s = size.min(BOUNDARY_FRACTION * limit);
        loop {
            let t: Vec<f64> = (0..m).map(|e| self.t[e] + s * dir[e]).collect();
            let x: Vec<f64> = (0..p.n()).map(|k| self.x[k] + s * dir[m + k]).collect();
            if p.is_interior(&t, &x) || s < 1e-300 {
                return (t, x, s);
            }
            s *= 0.5;
        }
    }

    /// Damped Newton until the decrement is at most `CENTERED`. Returns the
    /// final decrement and the number of steps taken.
    fn center(&mut self, mu: f64) -> Result<(f64, usize)> {
        let mut taken = 0;
        loop {
            let (dir, lam) = self.direction(mu, self.cfg.backend, self.cfg.solve_eps)?;
            if lam <= CENTERED {
                return Ok((lam, taken));
            }
            if self.steps >= self.cfg.max_newton {
                return Err(Error::NoConvergence {
                    iterations: self.steps,
                    residual: lam,
                });
            }
            let full = lam <= FULL_STEP;
            let size = if full { 1.0 } else { 1.0 / (1.0 + lam) };
            let pre_exact = if self.cfg.verify && full {
                Some(self.exact_decrement(&self.t, &self.x, mu)?)
            } else {
                None
            };
            let (t, x, used) = self.advance(&dir, size);
            if pre_exact.is_some_and(|p| p <= FULL_STEP) {
                let (exact_dir, _) = self.direction(mu, SolveBackend::Dense, 0.0)?;
                let (te, xe, ue) = self.advance(&exact_dir, 1.0);
                if ue == 1.0 {
                    let after = self.exact_decrement(&te, &xe, mu)?;
                    self.verify.exact_checks += 1;
                    self.verify.max_exact_after = self.verify.max_exact_after.max(after);
                    if after > CENTERED {
                        self.verify.exact_violations += 1;
                    }
                }
                if used == 1.0 {
                    let after = self.exact_decrement(&t, &x, mu)?;
                    self.verify.inexact_checks += 1;
                    self.verify.max_inexact_after = self.verify.max_inexact_after.max(after);
                    if after > INEXACT_BOUND {
                        self.verify.inexact_violations += 1;
                    }
                }
            }
            self.t = t;
            self.x = x;
            self.steps += 1;
            taken += 1;
            self.trace.push(TraceRecord {
                phase: "ipm".into(),
                iteration: self.steps,
                value: self.prog.objective(&self.t, &self.x),
                grad_norm: lam,
                error: f64::NAN,
                step_norm: used,
                oracle_value: None,
                box_guess: Some(self.prog.bx),
                mu: Some(mu),
            });
        }
    }

    fn c_norm(&self) -> Result<f64> {
        let ev = self.prog.eval(&self.t, &self.x, 0.0)?;
        let mut c = vec![1.0; self.prog.m()];
        c.extend(self.prog.d.iter().map(|v| -v));
        let v = ev.factor.solve(&c, 0.0, SolveBackend::Dense)?;
        Ok(dot(&c, &v).max(0.0).sqrt())
    }
}

/// `(nu + (lambda + sqrt(nu)) lambda / (1 - lambda)) / mu`.
pub fn gap_bound(nu: f64, lambda: f64, mu: f64) -> f64 {
    (nu + (lambda + nu.sqrt()) * lambda / (1.0 - lambda)) / mu
}

/// Follows the central path of `prog` until the duality gap bound drops to
/// `eps_obj` or `stop(x)` holds at a centered point.
pub fn path_follow(
    prog: &ConeProgram,
    eps_obj: f64,
    cfg: &IpmConfig,
    stop: &mut dyn FnMut(&[f64]) -> bool,
) -> Result<PathOutcome> {
    if !(eps_obj > 0.0) {
        return Err(Error::InvalidArgument("objective accuracy must be positive".into()));
    }
    let (t, x) = prog.start();
    let mut w = Walker {
        prog,
        cfg,
        t,
        x,
        steps: 0,
        verify: VerifyStats::default(),
        trace: Vec::new(),
    };
    let nu = prog.nu();
    let c_norm_start = w.c_norm()?;
    let mu0 = 1.0 / (8.0 * c_norm_start);
    let mut mu = mu0;
    let (mut lam, _) = w.center(mu)?;
    let c_norm_center = w.c_norm()?;
    let mut outer = 0;
    let mut sigma = 4.0f64;
    let mut stopped_early = false;
    loop {
        if gap_bound(nu, lam, mu) <= eps_obj {
            break;
        }
        if stop(&w.x) {
            stopped_early = true;
            break;
        }
        mu *= match cfg.schedule {
            Schedule::ShortStep => 1.0 + 1.0 / (8.0 * nu.sqrt()),
            Schedule::LongStep => sigma,
        };
        outer += 1;
        let (l, taken) = w.center(mu)?;
        lam = l;
        if cfg.schedule == Schedule::LongStep {
            if taken <= 2 {
                sigma = (sigma * 2.0).min(1e3);
            } else if taken > 8 {
                sigma = sigma.sqrt().max(1.2);
            }
        }
    }
    Ok(PathOutcome {
        gap_bound: gap_bound(nu, lam, mu),
        t: w.t,
        x: w.x,
        mu,
        mu0,
        newton_steps: w.steps,
        outer_iterations: outer,
        decrement: lam,
        c_norm_start,
        c_norm_center,
        stopped_early,
        verify: w.verify,
        trace: w.trace,
    })
}
