use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("support of the input touches the grid boundary")]
    SupportTouchesBoundary,

    #[error("grid extends past xi = -1/nu (node {xi} with nu = {nu})")]
    GridPastOrigin { xi: f64, nu: f64 },

    #[error("requested {requested} eigenpairs from a matrix of size {size}")]
    TooManyEigenpairs { requested: usize, size: usize },

    #[error("no interior density maximum found")]
    NoRing,

    #[error("Newton solve did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("ill-conditioned system (reciprocal condition {rcond:e})")]
    IllConditioned { rcond: f64 },

    #[error("solver produced non-finite values at step {step} (t = {t:e})")]
    NonFinite { step: usize, t: f64 },

    #[error("CFL violation: dt = {dt:e} exceeds limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("orthogonality violated: |G1| = {g1:e} exceeds {tol:e}")]
    OrthogonalityViolated { g1: f64, tol: f64 },

    #[error("negative quadratic form {0:e}")]
    NegativeForm(f64),

    #[error("collar [{lo}, {hi}] lies outside the grid")]
    CollarOutsideGrid { lo: f64, hi: f64 },

    #[error("io: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
