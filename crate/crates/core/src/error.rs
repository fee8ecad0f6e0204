use thiserror::Error;

/// Errors produced by the numerical routines, the codecs and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("infinite divergence: D(Ber({q}) || Ber({p}))")]
    InfiniteDivergence { q: f64, p: f64 },

    #[error("Blahut-Arimoto did not converge after {iterations} iterations (bound gap {gap:e})")]
    NoConvergence { iterations: u64, gap: f64 },

    #[error("precision lost while summing a binomial tail (n = {n}, p = {p}, q = {q})")]
    PrecisionLoss { n: u64, p: f64, q: f64 },

    #[error("length mismatch: {left} vs {right} slots")]
    LengthMismatch { left: usize, right: usize },

    #[error("index out of range: {what} = {value}, limit {limit}")]
    IndexOutOfRange {
        what: &'static str,
        value: u64,
        limit: u64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("audit failed: {0}")]
    Audit(String),

    #[error("malformed slot sequence: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Whether the error comes from bad input rather than from a failed run.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_) | Error::Config(_) | Error::Json(_) | Error::InfiniteDivergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
