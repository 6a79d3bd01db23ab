use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("mode {n} outside band [-{n_max}, {n_max}]")]
    Band { n: i64, n_max: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("envelope violated at mode {l}, t = {t}: {value} > {bound}")]
    Envelope { l: i64, t: f64, value: f64, bound: f64 },

    #[error("step size underflow at t = {t}: dt = {dt:e}, local error {err:e} > tol {tol:e}")]
    StepUnderflow { t: f64, dt: f64, err: f64, tol: f64 },

    #[error("power iteration did not converge after {iterations} iterations (last estimate {last})")]
    NotConverged { last: f64, iterations: usize },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("assertion `{criterion}` failed: {detail}")]
    Assertion { criterion: String, detail: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
