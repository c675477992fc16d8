use std::path::PathBuf;

/// Errors raised anywhere in the analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value in column `{label}` at row {row}")]
    NonFinite { label: String, row: usize },

    #[error("series too short: {0}")]
    TooShort(String),

    #[error("column `{label}` is constant{}", window.map(|w| format!(" in window {w}")).unwrap_or_default())]
    ConstantColumn {
        label: String,
        window: Option<usize>,
    },

    #[error("window {0} has a constant node-strength vector")]
    ConstantStrength(usize),

    #[error("band {lo}-{hi} Hz is infeasible: Nyquist frequency is {nyquist} Hz")]
    Nyquist { lo: f64, hi: f64, nyquist: f64 },

    #[error("sampling interval mismatch: {0} s vs {1} s")]
    DtMismatch(f64, f64),

    #[error("matrix is not positive definite (minimum eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("similarity graph has no positive weight")]
    EmptyGraph,

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
