use serde::Serialize;

use crate::matrix::DiagonalFactors;

/// One iteration of a solver.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub phase: String,
    pub iteration: usize,
    pub value: f64,
    pub grad_norm: f64,
    pub error: f64,
    pub step_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_guess: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

/// Factors returned by every solver, with the achieved error metric.
#[derive(Debug, Clone, Serialize)]
pub struct FactorsResult {
    pub factors: DiagonalFactors,
    pub error: f64,
    pub kappa: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip)]
    pub trace: Vec<TraceRecord>,
}

impl FactorsResult {
    pub fn new(factors: DiagonalFactors, error: f64, iterations: usize, converged: bool) -> Self {
        FactorsResult {
            kappa: factors.kappa(),
            factors,
            error,
            iterations,
            converged,
            notes: Vec::new(),
            trace: Vec::new(),
        }
    }
}
