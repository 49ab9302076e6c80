use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("control point has {got} coordinates, family expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid control point: {0}")]
    InvalidPoint(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("oscillator family requires a Fock truncation n_max >= 1")]
    MissingTruncation,
    #[error("Fock truncation n_max={n_max} leaves tail mass {tail:e}")]
    InsufficientTruncation { n_max: usize, tail: f64 },
    #[error("ground state is degenerate (gap {gap:e})")]
    Degenerate { gap: f64 },
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("protocol undefined at t={t} (duration {duration})")]
    ProtocolDomain { t: f64, duration: f64 },
    #[error("tolerance not reached: {0}")]
    Convergence(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("residual has no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("hold-time condition unreachable: {0}")]
    Unreachable(String),
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
