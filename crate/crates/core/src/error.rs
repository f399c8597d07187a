use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tableau: {0}")]
    InvalidTableau(String),

    #[error("unknown tableau `{name}`; valid names: {valid}")]
    UnknownTableau { name: String, valid: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("tree or pairing count exceeds the cap of {cap} (lower the maximum order)")]
    TreeCap { cap: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("stage iteration did not converge after {iterations} iterations (stage residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("singular Newton matrix: pivot {pivot:e} below threshold {threshold:e}")]
    Singular { pivot: f64, threshold: f64 },

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        last_state: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("initial point {point} failed: {source}")]
    PointFailed {
        point: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
