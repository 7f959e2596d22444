use thiserror::Error;

/// Errors raised by operator construction and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VlabError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("basis mismatch: `{left}` vs `{right}`")]
    BasisMismatch { left: String, right: String },

    #[error("matrix is not Hermitian (max |A - A^H| = {defect:.3e}, tolerance {tolerance:.3e})")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("eigenvalue {eigenvalue:.6e} lies outside the function domain (floor {floor:.3e})")]
    EigenvalueOutOfDomain { eigenvalue: f64, floor: f64 },

    #[error("eigenvector condition estimate {condition:.3e} exceeds cap {cap:.3e}")]
    IllConditioned { condition: f64, cap: f64 },

    #[error("eigenvalue {re:.6e}{im:+.6e}i is within {guard:.1e} of a branch point")]
    BranchPoint { re: f64, im: f64, guard: f64 },

    #[error("matrix is not strictly triangular")]
    NotStrictlyTriangular,

    #[error("window {window} out of range for dimension {dim} (limit {limit})")]
    WindowOutOfRange { window: usize, dim: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigendecomposition failed: {0}")]
    Decomposition(String),

    #[error("quadrature order insufficient: order-doubling discrepancy {discrepancy:.3e}")]
    QuadratureOrder { discrepancy: f64 },

    #[error("precision loss: {0}")]
    PrecisionLoss(String),

    #[error("malformed matrix data: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, VlabError>;
