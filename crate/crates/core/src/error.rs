use thiserror::Error;

/// Errors raised by the waveform design library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The transmit energy cannot cover the energy of the minimum-norm waveform
    /// that satisfies the multifunction constraint.
    #[error(
        "infeasible scenario: transmit energy {available:.6} must exceed {required:.6} \
         (energy of the minimum-norm matching waveform)"
    )]
    InfeasibleEnergy { available: f64, required: f64 },

    /// The matching-error tolerances cannot be met by the PAPR-constrained design.
    #[error(
        "matching tolerance for direction {direction} not reached: residual {residual:.3e} > \
         tolerance {tolerance:.3e} after {iterations} iterations; increase the matching \
         tolerances to make the problem feasible"
    )]
    MatchingInfeasible {
        direction: usize,
        residual: f64,
        tolerance: f64,
        iterations: usize,
    },

    /// The steering matrix of the constrained directions is (nearly) rank deficient.
    #[error("ill-conditioned steering matrix: condition number {condition:.3e} exceeds {limit:.1e}")]
    IllConditioned { condition: f64, limit: f64 },

    /// A numerical routine failed (non-PD covariance, negative eigenvalues, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The problem is too large for a dense code path.
    #[error("problem too large for the dense path: {0}")]
    TooLarge(String),

    /// The operation was called with arguments it does not support.
    #[error("usage error: {0}")]
    Usage(String),

    /// The secular equation has an all-zero right-hand side.
    #[error("degenerate secular equation: all coefficients are zero")]
    DegenerateSecular,
}

pub type Result<T> = std::result::Result<T, Error>;
