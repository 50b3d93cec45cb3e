use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Variants fall in two groups: invalid input (see [`Error::is_validation`])
/// and numerical failures that depend on the parameter regime.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("theta series needs Im(tau) > 0, got tau = {re} + {im}i")]
    NonconvergentParameters { re: f64, im: f64 },

    #[error("theta series did not reach tolerance within {cap} terms")]
    ToleranceUnreachable { cap: usize },

    #[error("peak window must be at least 1, got {0}")]
    InvalidWindow(i64),

    #[error("{route} route is singular at theta_r = {theta_r}, beta = {beta}")]
    SingularRotation {
        route: &'static str,
        theta_r: f64,
        beta: f64,
    },

    #[error("lattice sum with j_window = {j_window} leaves a tail of relative size {tail:e}")]
    TailNotConverged { j_window: i64, tail: f64 },

    #[error("both output coefficients vanish")]
    DegenerateState,

    #[error("Jacobi symbol needs an odd positive modulus, got {0}")]
    EvenModulus(i64),

    #[error("({u}, {v}) is not a coprime pair with v > 0")]
    NotCoprime { u: i64, v: i64 },

    #[error("all grid weights vanished")]
    AllWeightsZero,

    #[error("empty search interval [{lo}, {hi}]")]
    EmptyInterval { lo: f64, hi: f64 },

    #[error("no density peaks found anywhere in the scan")]
    NoPeaksFound,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True when the error comes from malformed input rather than from the
    /// numerics themselves.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidWindow(_)
                | Error::EvenModulus(_)
                | Error::NotCoprime { .. }
                | Error::EmptyInterval { .. }
                | Error::InvalidInput(_)
                | Error::NonconvergentParameters { .. }
        )
    }

    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonconvergentParameters { .. } => "NonconvergentParameters",
            Error::ToleranceUnreachable { .. } => "ToleranceUnreachable",
            Error::InvalidWindow(_) => "InvalidWindow",
            Error::SingularRotation { .. } => "SingularRotation",
            Error::TailNotConverged { .. } => "TailNotConverged",
            Error::DegenerateState => "DegenerateState",
            Error::EvenModulus(_) => "EvenModulus",
            Error::NotCoprime { .. } => "NotCoprime",
            Error::AllWeightsZero => "AllWeightsZero",
            Error::EmptyInterval { .. } => "EmptyInterval",
            Error::NoPeaksFound => "NoPeaksFound",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
