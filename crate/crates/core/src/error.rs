use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrError {
    #[error("polynomial degree {degree} exceeds the cap {cap}")]
    DegreeCap { degree: u32, cap: u32 },

    #[error("expected a real function, found imaginary residue {residue:.3e}")]
    NotReal { residue: f64 },

    #[error("input is not pluriharmonic: mixed monomial {0}")]
    NotPluriharmonic(String),

    #[error("weighted Gram matrix is ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("Riemann zeta has a pole at s = {0}")]
    Pole(f64),

    #[error("expansion order {got} is below the minimum {min}")]
    InsufficientOrder { got: usize, min: usize },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("singular operator block: {0}")]
    Singular(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, CrError>;
