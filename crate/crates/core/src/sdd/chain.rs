use serde::Serialize;

use super::mapping::VoltageExtension;
use super::schur::{Pivot, WorkGraph};
use super::solve::{fast_solve, trivial_solve};
use super::subset::find_strong_subset;
use super::SddMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct ChainConfig {
    /// Strong-dominance factor of every eliminated block.
    pub alpha: f64,
    /// Total error budget: `2 * sum(eps_i) <= delta`.
    pub delta: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            alpha: 4.0,
            delta: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChainLevel {
    pub matrix: SddMatrix,
    /// Eliminated block (local indices, sorted); empty on the last level.
    pub f: Vec<usize>,
    pub eps: f64,
    pub mapping: Option<VoltageExtension>,
    /// Smallest `M_ii / sum_{j in F} |M_ij| - 1` over `F`.
    pub alpha: f64,
}

/// Levels `M(1), ..., M(d)` where `M(i+1)` is the Schur complement of `M(i)` onto
/// the complement of `F_i`, ending at dimension 1.
#[derive(Debug, Clone)]
pub struct SparsifierChain {
    pub levels: Vec<ChainLevel>,
    /// Error of `M(1)` against the input (zero: complements are exact).
    pub eps0: f64,
    pub config: ChainConfig,
    pivots: Vec<Pivot>,
    root: usize,
    root_d: f64,
    n: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSummary {
    pub size: usize,
    pub eliminated: usize,
    pub alpha: Option<f64>,
    pub eps: f64,
    pub extension_rounds: usize,
}

fn level_eps(delta: f64, level: usize) -> f64 {
    delta / (4.0 * 2f64.powi(level as i32 + 1))
}

fn block_alpha(m: &SddMatrix, f: &[usize]) -> f64 {
    let mut in_f = vec![false; m.n()];
    f.iter().for_each(|&i| in_f[i] = true);
    f.iter()
        .map(|&i| {
            let inner: f64 = m.row(i).filter(|(j, _)| in_f[*j]).map(|(_, v)| -v).sum();
            if inner > 0.0 {
                m.diag()[i] / inner - 1.0
            } else {
                f64::INFINITY
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Builds a chain with exact Schur complements and greedy `alpha`-SDD blocks.
pub fn build_chain(m: &SddMatrix, cfg: ChainConfig) -> Result<SparsifierChain> {
    let n = m.n();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let mut g = WorkGraph::new(m);
    let mut active: Vec<usize> = (0..n).collect();
    let mut levels = Vec::new();
    let mut pivots = Vec::with_capacity(n);
    let mut current = m.clone();
    while active.len() > 1 {
        let mut f = find_strong_subset(&current, cfg.alpha);
        if f.len() == active.len() {
            f.pop();
        }
        if f.is_empty() {
            return Err(Error::ChainStall(active.len()));
        }
        let eps = level_eps(cfg.delta, levels.len());
        let mapping = VoltageExtension::new(&current, &f, cfg.alpha, eps);
        let mut gone = vec![false; active.len()];
        for &k in &f {
            gone[k] = true;
            let p = g.eliminate(active[k]);
            if p.d <= 0.0 && !p.nbrs.is_empty() {
                return Err(Error::SingularPivot(active[k]));
            }
            pivots.push(p);
        }
        let next: Vec<usize> = active
            .iter()
            .zip(&gone)
            .filter(|(_, &x)| !x)
            .map(|(&v, _)| v)
            .collect();
        let alpha = block_alpha(&current, &f);
        let matrix = std::mem::replace(&mut current, g.snapshot(&next)?);
        levels.push(ChainLevel {
            matrix,
            f,
            eps,
            mapping: Some(mapping),
            alpha,
        });
        active = next;
    }
    let root = active[0];
    let root_d = current.diag()[0];
    levels.push(ChainLevel {
        matrix: current,
        f: Vec::new(),
        eps: 0.0,
        mapping: None,
        alpha: f64::INFINITY,
    });
    let chain = SparsifierChain {
        levels,
        eps0: 0.0,
        config: cfg,
        pivots,
        root,
        root_d,
        n,
    };
    let budget = 2.0 * (chain.eps0 + chain.levels.iter().map(|l| l.eps).sum::<f64>());
    assert!(budget <= cfg.delta * (1.0 + 1e-12), "chain error budget {budget} exceeds {}", cfg.delta);
    Ok(chain)
}

impl SparsifierChain {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of levels `d` (the last has dimension 1).
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Infinity-norm bound `1 + 2d` of [`optimize`](Self::optimize) outputs.
    pub fn k(&self) -> f64 {
        1.0 + 2.0 * self.depth() as f64
    }

    pub fn summary(&self) -> Vec<LevelSummary> {
        self.levels
            .iter()
            .map(|l| LevelSummary {
                size: l.matrix.n(),
                eliminated: l.f.len(),
                alpha: if l.f.is_empty() { None } else { Some(l.alpha) },
                eps: l.eps,
                extension_rounds: l.mapping.as_ref().map_or(0, |p| p.iterations),
            })
            .collect()
    }

    /// Approximate minimizer of `1/2 z^T M z + b^T z` over the unit box with value at
    /// most half the optimum and `||z||_inf <= 1 + 2d`.
    pub fn optimize(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let d = self.levels.len();
        let mut rhs: Vec<Vec<f64>> = Vec::with_capacity(d);
        rhs.push(b.iter().map(|v| v / self.eps0.exp()).collect());
        for level in &self.levels[..d - 1] {
            let p = level.mapping.as_ref().expect("inner level mapping");
            let e = level.eps;
            let s = e.exp() * (1.0 + e + e * e);
            let next = p.apply_transpose(rhs.last().unwrap()).into_iter().map(|v| v / s).collect();
            rhs.push(next);
        }
        let last = &self.levels[d - 1];
        let mut x = vec![trivial_solve(last.matrix.diag()[0], rhs[d - 1][0])];
        for i in (0..d - 1).rev() {
            let level = &self.levels[i];
            let p = level.mapping.as_ref().unwrap();
            let mut full = p.apply(&x);
            let bf: Vec<f64> = level.f.iter().map(|&k| rhs[i][k]).collect();
            let block = level.matrix.submatrix(&level.f);
            let xf = fast_solve(&block, &bf, self.config.alpha, level.eps);
            for (k, &j) in level.f.iter().enumerate() {
                full[j] += xf[k];
            }
            x = full;
        }
        x
    }

    /// Solves `M z = b` through the recorded eliminations. Directions in which the
    /// matrix is singular get zero.
    pub fn exact_solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut y = b.to_vec();
        for p in &self.pivots {
            if p.d > 0.0 {
                let s = y[p.v] / p.d;
                for &(i, w) in &p.nbrs {
                    y[i] += w * s;
                }
            }
        }
        let mut z = vec![0.0; self.n];
        z[self.root] = if self.root_d > 0.0 { y[self.root] / self.root_d } else { 0.0 };
        for p in self.pivots.iter().rev() {
            z[p.v] = if p.d > 0.0 {
                (y[p.v] + p.nbrs.iter().map(|&(i, w)| w * z[i]).sum::<f64>()) / p.d
            } else {
                0.0
            };
        }
        z
    }
}
