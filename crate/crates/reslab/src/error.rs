use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("insufficient data: needed {needed} terms, got {available}")]
    InsufficientData { needed: usize, available: usize },
    #[error("normalization error: constant coefficient is {0}, expected 1")]
    Normalization(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("count mismatch: contour integral gives {contour}, root finder gives {found}")]
    CountMismatch { contour: usize, found: usize },
    #[error("zero too close to the contour at radius {radius}")]
    BoundaryAmbiguity { radius: f64 },
    #[error("truncation error bound {bound:e} exceeds tolerance {tol:e}")]
    Truncation { bound: f64, tol: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
