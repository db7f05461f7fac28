use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("matrix is not square ({rows} x {cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("entry ({row}, {col}) out of range for dimension {n}{}", line_suffix(*.line))]
    IndexOutOfRange {
        line: Option<usize>,
        row: usize,
        col: usize,
        n: usize,
    },

    #[error("negative entry {value} at ({row}, {col}){}", line_suffix(*.line))]
    NegativeEntry {
        line: Option<usize>,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("non-finite entry at ({row}, {col}){}", line_suffix(*.line))]
    NonFiniteEntry {
        line: Option<usize>,
        row: usize,
        col: usize,
    },

    #[error("matrix has no entries")]
    EmptyMatrix,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("exponent {exponent:.3} at ({row}, {col}) exceeds the overflow guard")]
    Overflow { row: usize, col: usize, exponent: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("row and column targets have different sums ({rows} vs {cols})")]
    SumMismatch { rows: f64, cols: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("instance is not scalable: {0}")]
    Infeasible(String),

    #[error("oracle contract violated: {0}")]
    OracleViolation(String),

    #[error("step did not decrease the objective ({before} -> {after})")]
    NonDecreasingStep { before: f64, after: f64 },

    #[error("singular pivot at index {0}")]
    SingularPivot(usize),

    #[error("chain construction stalled at dimension {0}")]
    ChainStall(usize),

    #[error("point is not strictly interior: {0}")]
    NotInterior(String),

    #[error("conjugate gradient did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("dimension {n} exceeds the limit {max}")]
    TooLarge { n: usize, max: usize },
}

fn line_suffix(line: Option<usize>) -> String {
    match line {
        Some(l) => format!(" on line {l}"),
        None => String::new(),
    }
}
