use super::chain::{build_chain, ChainConfig, SparsifierChain};
use super::SddMatrix;
use crate::baseline::brute_force_oracle;
use crate::error::Result;

/// Solver for box-constrained SDD quadratics: given `A` and `b`, returns `z` with
/// `||z||_inf <= k` and `1/2 z^T A z + b^T z <= 1/2 min_{||z||_inf <= 1} (1/2 z^T A z + b^T z)`.
///
/// Preparation happens once per matrix; the Newton loop then asks for the
/// problem with `A = scale * H`.
pub trait KOracle {
    fn prepare(&self, h: &SddMatrix) -> Result<Box<dyn PreparedOracle>>;
}

pub trait PreparedOracle {
    fn k(&self) -> f64;
    /// Solves the problem for `scale * H` and `b`.
    fn solve(&self, scale: f64, b: &[f64]) -> Result<Vec<f64>>;
}

/// Oracle built on a vertex sparsifier chain.
///
/// With `newton_candidate` set, the chain output competes with the (truncated
/// and clamped) unconstrained minimizer obtained from the chain's exact
/// eliminations; the candidate with the lowest model value wins, so the contract
/// is inherited from the chain output.
#[derive(Debug, Clone, Copy, Default)]
pub struct ChainOracle {
    pub config: ChainConfig,
    pub newton_candidate: bool,
}

impl ChainOracle {
    pub fn accelerated() -> Self {
        ChainOracle {
            config: ChainConfig::default(),
            newton_candidate: true,
        }
    }
}

struct PreparedChain {
    h: SddMatrix,
    chain: SparsifierChain,
    newton_candidate: bool,
}

impl KOracle for ChainOracle {
    fn prepare(&self, h: &SddMatrix) -> Result<Box<dyn PreparedOracle>> {
        Ok(Box::new(PreparedChain {
            h: h.clone(),
            chain: build_chain(h, self.config)?,
            newton_candidate: self.newton_candidate,
        }))
    }
}

impl PreparedOracle for PreparedChain {
    fn k(&self) -> f64 {
        self.chain.k()
    }

    fn solve(&self, scale: f64, b: &[f64]) -> Result<Vec<f64>> {
        // argmin of 1/2 z^T (sH) z + b^T z equals that of 1/2 z^T H z + (b/s)^T z.
        let bs: Vec<f64> = b.iter().map(|v| v / scale).collect();
        let z = self.chain.optimize(&bs);
        if !self.newton_candidate {
            return Ok(z);
        }
        let k = self.k();
        let zu: Vec<f64> = self.chain.exact_solve(&bs).iter().map(|v| -v).collect();
        let norm = zu.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut best = (self.h.model_value(&z, &bs), z);
        if norm.is_finite() {
            let t = if norm > k { k / norm } else { 1.0 };
            let ray: Vec<f64> = zu.iter().map(|v| v * t).collect();
            let clamped: Vec<f64> = zu.iter().map(|v| v.clamp(-k, k)).collect();
            for cand in [ray, clamped] {
                let q = self.h.model_value(&cand, &bs);
                if q < best.0 {
                    best = (q, cand);
                }
            }
        }
        Ok(best.1)
    }
}

/// Exact 1-oracle by active-set enumeration; small dimensions only.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactBoxOracle;

struct PreparedExact {
    h: SddMatrix,
}

impl KOracle for ExactBoxOracle {
    fn prepare(&self, h: &SddMatrix) -> Result<Box<dyn PreparedOracle>> {
        if h.n() > crate::baseline::BRUTE_FORCE_MAX {
            return Err(crate::Error::TooLarge {
                n: h.n(),
                max: crate::baseline::BRUTE_FORCE_MAX,
            });
        }
        Ok(Box::new(PreparedExact { h: h.clone() }))
    }
}

impl PreparedOracle for PreparedExact {
    fn k(&self) -> f64 {
        1.0
    }

    fn solve(&self, scale: f64, b: &[f64]) -> Result<Vec<f64>> {
        Ok(brute_force_oracle(&self.h.scaled(scale), b, 1.0)?.0)
    }
}
