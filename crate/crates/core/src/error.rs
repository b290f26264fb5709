use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field length {found} does not match grid (expected {expected})")]
    LengthMismatch { expected: usize, found: usize },

    #[error("coordinate {x} outside the domain [0, {length}]")]
    OutOfDomain { x: f64, length: f64 },

    #[error("non-positive density {value} at cell {cell}")]
    NonPositiveDensity { cell: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular linear system (zero pivot in column {0})")]
    SingularMatrix(usize),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("line search failed after {halvings} halvings (residual {residual:e})")]
    LineSearchFailed { halvings: usize, residual: f64 },

    #[error("step {step} (t = {time}) failed: {source}")]
    StepFailed {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Analysis(String),

    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
