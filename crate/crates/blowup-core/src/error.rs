//! Error type shared across the crate.

use alloc::string::String;
use core::fmt;

/// Errors reported by the numerical operations.
///
/// Divergence of a shot profile or a failed verification is *not* an error;
/// those outcomes are carried by classifications and reports. Errors are
/// reserved for invalid parameters and irrecoverable solver states.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside the documented domain.
    InvalidParameter(String),
    /// A time at or past the blow-up time was supplied where `t < T` is required.
    PostBlowupTime { t: f64, blowup_time: f64 },
    /// An input that must be finite was NaN or infinite.
    NonFinite(&'static str),
    /// A time integrator reduced its step below the configured minimum.
    StepUnderflow { at: f64, dt: f64 },
    /// A rate fit was requested on data that cannot support it.
    FitUnreliable(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::PostBlowupTime { t, blowup_time } => {
                write!(f, "post-blow-up time: t = {t} is not below T = {blowup_time}")
            }
            Error::NonFinite(what) => write!(f, "non-finite input: {what}"),
            Error::StepUnderflow { at, dt } => {
                write!(f, "step size underflow: dt = {dt:e} at {at}")
            }
            Error::FitUnreliable(msg) => write!(f, "rate fit unreliable: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
