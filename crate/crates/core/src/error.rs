use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),

    #[error("operation requires {expected} network, got {found}")]
    WrongKind {
        expected: &'static str,
        found: &'static str,
    },

    /// Some eigenpair has `|<L|R>| < 1e-10 |L||R|`; the spectral sum is
    /// unreliable and callers should step the equation directly.
    #[error("generator is near-defective (mode {mode}, reciprocal condition {rcond:.3e})")]
    NearDefective { mode: usize, rcond: f64 },

    #[error("absorbed population stays below 1/2 up to t = {horizon:.6e}")]
    HorizonExceeded { horizon: f64 },

    #[error("classical rates undefined without dephasing (gamma = {0})")]
    ClassicalLimitUndefined(f64),

    #[error("rate matrix is singular (trap rate is zero)")]
    SingularRateMatrix,

    #[error("first-passage recursion is singular at z = {z}")]
    RecursionNonConvergent { z: f64 },

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("ODE integration failed: {0}")]
    Integration(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}
