use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The state has coherences in the energy basis, so a diagonal
    /// measurement would produce entropy.
    #[error(
        "measurement does not commute with the state (off-diagonal magnitude {off_diagonal:e})"
    )]
    ReversibilityViolation { off_diagonal: f64 },

    #[error("feedback protocol mismatch: {0}")]
    ProtocolMismatch(String),

    #[error("hot isotherm duration {tau_h:e} does not exceed the dissipation time {tau_circ:e}")]
    InfeasibleDuration { tau_h: f64, tau_circ: f64 },

    #[error("integration failed on segment {segment} at t = {t}: {reason}")]
    NumericFailure {
        segment: usize,
        t: f64,
        reason: String,
    },

    #[error("bracket [{lo}, {hi}] does not enclose an interior maximum")]
    Bracket { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!(
            "{name} must be finite and > 0, got {value}"
        )))
    }
}

pub(crate) fn ensure_non_negative(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!(
            "{name} must be finite and >= 0, got {value}"
        )))
    }
}
