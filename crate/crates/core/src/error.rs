use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Variants are split into validation failures (bad input, guard
/// violations) and numeric failures (brackets, quadrature); see
/// [`Error::is_numeric`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid function spec `{0}`")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("convexity check failed: derivative decreases on [{lo}, {hi}]")]
    NotConvex { lo: f64, hi: f64 },

    #[error("monotonicity check failed: function decreases on [{lo}, {hi}]")]
    NotMonotone { lo: f64, hi: f64 },

    #[error("M(0) = {0}, expected 0")]
    NonzeroAtOrigin(f64),

    #[error("power family needs p > 1 for conjugation, got p = {0}")]
    PowerExponent(f64),

    #[error("derivative is not strictly increasing on [{lo}, {hi}]; apply smooth(...) first")]
    FlatDerivative { lo: f64, hi: f64 },

    #[error("derivative at 0 is {0}; conjugation needs M'(0) = 0")]
    DerivativeAtOrigin(f64),

    #[error("no bracket for {what} within [{lo}, {hi}]")]
    BracketNotFound {
        what: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("quadrature did not converge on [{lo}, {hi}] (error estimate {estimate:e})")]
    Quadrature { lo: f64, hi: f64, estimate: f64 },

    #[error("residual {residual:e} exceeds tolerance {tolerance:e} in {what}")]
    Residual {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("{what} = {got} exceeds the guard {limit}")]
    Guard {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    #[error("sequence is not non-increasing and non-negative at index {0}")]
    NotDecreasing(usize),

    #[error("M(1/{0}) vanishes; the function is degenerate")]
    Degenerate(usize),

    #[error("block partition exhausted: need {needed} blocks, have {available}")]
    PartitionExhausted { needed: usize, available: usize },

    #[error("failed to read {path}: {message}")]
    Io { path: String, message: String },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// True for failures of a numeric procedure, as opposed to rejected input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::BracketNotFound { .. }
                | Error::Quadrature { .. }
                | Error::Residual { .. }
                | Error::Internal(_)
        )
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "invalid_spec",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::NotConvex { .. } => "not_convex",
            Error::NotMonotone { .. } => "not_monotone",
            Error::NonzeroAtOrigin(_) => "nonzero_at_origin",
            Error::PowerExponent(_) => "power_exponent",
            Error::FlatDerivative { .. } => "flat_derivative",
            Error::DerivativeAtOrigin(_) => "derivative_at_origin",
            Error::BracketNotFound { .. } => "bracket_not_found",
            Error::Quadrature { .. } => "quadrature",
            Error::Residual { .. } => "residual",
            Error::Guard { .. } => "guard",
            Error::NotDecreasing(_) => "not_decreasing",
            Error::Degenerate(_) => "degenerate",
            Error::PartitionExhausted { .. } => "partition_exhausted",
            Error::Io { .. } => "io",
            Error::Internal(_) => "internal",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
