use thiserror::Error;

/// Errors produced by the polynomial, kernel, decomposition and certificate
/// routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} variables, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degree {degree} exceeds the kernel degree r = {r}")]
    DegreeExceeds { degree: u32, r: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid of {points} points exceeds the budget of {budget}")]
    BudgetExceeded { points: u128, budget: u128 },

    #[error("polynomial is not nonnegative on [-1,1]: sampled minimum {min_value:e} below tolerance {tolerance:e}")]
    NotNonnegative { min_value: f64, tolerance: f64 },

    #[error("spectral factorization is ill-conditioned: residual {residual:e}")]
    IllConditioned { residual: f64 },

    #[error("not certifiable at this degree: inverse image attains {min_value:e}")]
    NotCertifiable { min_value: f64 },

    #[error("assembled certificate fails verification: residual {residual:e}")]
    ResidualTooLarge { residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
