use serde::Serialize;

use matscale::matrix::Scalability;
use matscale::{MatrixStats, TraceRecord};

#[derive(Serialize)]
pub struct InputInfo {
    pub path: String,
    #[serde(flatten)]
    pub stats: MatrixStats,
    pub strongly_connected_blocks: usize,
}

#[derive(Serialize)]
pub struct ConfigEcho {
    pub eps: f64,
    pub seed: u64,
    pub max_b: f64,
    pub max_sweeps: usize,
    pub ipm_schedule: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cols: Option<String>,
}

#[derive(Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NotConverged,
    Infeasible,
}

#[derive(Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub input: InputInfo,
    pub method: &'static str,
    pub config: ConfigEcho,
    pub status: Status,
    pub error: Option<f64>,
    pub kappa: Option<f64>,
    pub iterations: Option<usize>,
    pub wall_time_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scalability: Option<Scalability>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRecord>>,
}

#[derive(Serialize)]
pub struct CheckReport {
    pub input: InputInfo,
    pub strongly_connected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scalability: Option<Scalability>,
}
