use thiserror::Error;

/// Failure modes of the analysis routines.
///
/// Numeric payloads are widened to `f64` so the type does not depend on the
/// scalar parameter.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite {what} at t = {t}")]
    NonFinite { what: &'static str, t: f64 },

    #[error("quintic coefficient c must be nonzero for {0}")]
    ZeroQuintic(&'static str),

    #[error("guard violated: {0}")]
    Guard(String),

    #[error("no admissible real root (best residual {best_residual:e})")]
    NoRoot { best_residual: f64 },

    #[error("step limit {max_steps} reached at t = {t}")]
    MaxSteps { max_steps: usize, t: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("query t = {t} outside span [{start}, {end}]")]
    OutOfSpan { t: f64, start: f64, end: f64 },

    #[error("ensemble statistics need at least two paths, got {0}")]
    Ensemble(usize),

    #[error("Melnikov criterion inconclusive: oscillatory coefficient vanishes")]
    Inconclusive,

    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::ZeroQuintic(_)
                | Error::Guard(_)
                | Error::DegenerateWindow(_)
                | Error::OutOfSpan { .. }
                | Error::Ensemble(_)
        )
    }
}
