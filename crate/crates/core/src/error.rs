use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("not stochastic: {0}")]
    NotStochastic(String),

    #[error("chain is not irreducible: state {unreachable} cannot be reached from state {from}")]
    NotIrreducible { from: usize, unreachable: usize },

    #[error("bad shape: {0}")]
    BadShape(String),

    #[error("delta must lie in {allowed}, got {value}")]
    BadDelta { value: f64, allowed: &'static str },

    #[error("tolerance {0} is looser than the allowed maximum 1e-6")]
    TolTooLoose(f64),

    #[error("chain is not reversible (detailed balance residual {0:e})")]
    NotReversible(f64),

    #[error("operation requires a birth-death chain")]
    NotBirthDeath,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("time {0} must be a nonnegative integer in discrete and lazy modes")]
    NonIntegerTime(f64),

    #[error("time {0} must be finite and nonnegative")]
    BadTime(f64),

    #[error("distance stays above {eps} through time {cap}")]
    NoConvergence { eps: f64, cap: f64 },

    #[error("epsilon must lie in (0,1), got {0}")]
    BadEpsilon(f64),

    #[error("epsilon pair must satisfy 0 < eps < eta < 1, got ({0}, {1})")]
    BadEpsilonPair(f64, f64),

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("bad family: {0}")]
    BadFamily(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
