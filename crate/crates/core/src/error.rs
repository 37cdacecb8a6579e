use thiserror::Error;

/// Unified error type for the toolkit.
#[derive(Error, Debug)]
pub enum DkError {
    #[error("non-finite input at grid indices {indices:?}{}", if *.truncated { " (truncated)" } else { "" })]
    NonFinite {
        indices: Vec<(usize, usize)>,
        truncated: bool,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("configuration errors:\n{}", .0.join("\n"))]
    ConfigList(Vec<String>),

    #[error("numerical failure at step {step}: {what}")]
    Numerical { step: usize, what: String },

    #[error("elliptic solve did not converge on slice {slice}: residual {residual:.3e} after {iterations} iterations")]
    EllipticNoConvergence {
        slice: usize,
        residual: f64,
        iterations: usize,
    },

    #[error("inconsistent path: {0}")]
    InconsistentPath(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, DkError>;

impl DkError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        DkError::Io {
            path: path.into(),
            source,
        }
    }
}
