use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series did not converge within {terms} terms (residual {residual:e})")]
    NotConverged { terms: usize, residual: f64 },

    #[error("quadrature did not reach tolerance (estimate {estimate:e}, error {error:e})")]
    QuadratureFailed { estimate: f64, error: f64 },

    #[error("rejection sampler exhausted {attempts} attempts; sup bound is probably wrong")]
    RejectionExhausted { attempts: usize },

    #[error("sup bound violated: f = {value:e} exceeds declared bound {bound:e} at ({u}, {v})")]
    SupBoundViolated { value: f64, bound: f64, u: f64, v: f64 },

    #[error("conjugate point at s = {s:e} before reaching radius {radius:e}")]
    ConjugatePoint { s: f64, radius: f64 },

    #[error("geodesic left the chart domain at s = {s:e}")]
    LeftDomain { s: f64 },

    #[error("geodesic shooting failed to converge (residual {residual:e})")]
    ShootingFailed { residual: f64 },

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
