use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("branch coefficients degenerate at xi = {xi} (|2|Omega cos xi| - Gamma| = {distance:e})")]
    BranchDegenerate { xi: f64, distance: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tolerance:e}")]
    QuadratureNotConverged { estimate: f64, tolerance: f64 },

    #[error("Fourier grid did not converge at {points} points (last change {change:e})")]
    GridNotConverged { points: usize, change: f64 },

    #[error("diffraction sum did not converge up to order {order} (tail {tail:e})")]
    TailNotConverged { order: usize, tail: f64 },

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("ladder truncation exceeded: boundary norm {boundary_norm:e} with N = {truncation}")]
    TruncationExceeded { truncation: usize, boundary_norm: f64 },

    #[error("insufficient data: {found} points, need at least {needed}")]
    InsufficientData { found: usize, needed: usize },

    #[error("non-positive value {value} at t = {t}")]
    NonPositiveValues { t: f64, value: f64 },

    #[error("too few peaks: found {found}, need at least {needed}")]
    TooFewPeaks { found: usize, needed: usize },
}

impl Error {
    /// True for failures of an iterative numerical procedure, as opposed to bad input.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNotConverged { .. }
                | Error::GridNotConverged { .. }
                | Error::TailNotConverged { .. }
                | Error::StepSizeUnderflow { .. }
                | Error::TruncationExceeded { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
