use thiserror::Error;

/// Errors raised by the library.
///
/// Variants are grouped so that front ends can map them onto exit codes:
/// invalid input, violated resource guards, and numeric failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("polynomial parse error: {0}")]
    Parse(String),

    #[error("polynomial is not monic (leading coefficient {0})")]
    NonMonic(i64),

    #[error("polynomial has rational root {0} and is therefore reducible")]
    Reducible(i64),

    #[error("root finding did not converge after {iterations} iterations (residual {residual:e})")]
    RootFindingFailure { iterations: usize, residual: f64 },

    #[error("polynomial has no real root greater than one")]
    NoRealRootAboveOne,

    #[error("integer overflow while reducing modulo the minimal polynomial")]
    DegreeOverflow,

    #[error("exact arithmetic unavailable: {0}")]
    ExactModeUnavailable(String),

    #[error("could not resolve the sign of an algebraic value (|value| <= {bound:e})")]
    SignUndetermined { bound: f64 },

    #[error("depth {depth} too large: {what} would be {count} which exceeds the limit {limit}")]
    DepthTooLarge {
        depth: usize,
        what: &'static str,
        count: f64,
        limit: f64,
    },

    #[error("residual {residual} lies outside [{lo}, {hi}]")]
    ResidualOutOfRange { residual: f64, lo: f64, hi: f64 },

    #[error("digit set not supported here: {0}")]
    DigitSetUnsupported(String),

    #[error("infinite product needs more than {limit} factors at t = {t}")]
    NonConvergent { t: f64, limit: usize },

    #[error("degenerate range [{lo}, {hi}] with {bins} bins")]
    DegenerateRange { lo: f64, hi: f64, bins: usize },

    #[error("covering condition fails at L = {0}")]
    CoverFailed(usize),

    #[error("probe point {q} lies outside the hull [{lo}, {hi}]")]
    QOutsideHull { q: f64, lo: f64, hi: f64 },

    #[error("state limit exceeded: {what} reached {count} (limit {limit})")]
    StateLimit {
        what: &'static str,
        count: usize,
        limit: usize,
    },
}

impl Error {
    /// True for violations of a resource guard (enumeration or state limits).
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::DepthTooLarge { .. } | Error::StateLimit { .. })
    }

    /// True for failures of a numeric procedure on otherwise valid input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::RootFindingFailure { .. }
                | Error::DegreeOverflow
                | Error::SignUndetermined { .. }
                | Error::NonConvergent { .. }
                | Error::CoverFailed(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
