use thiserror::Error;

/// Errors returned by the estimators and simulators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("link success probability is zero")]
    ZeroSuccessProbability,

    #[error("n = {n} is too small (need n > {min})")]
    NTooSmall { n: u64, min: u64 },

    #[error("concatenation level 3 gives {achieved:e} per operation, target is {target:e}")]
    InsufficientConcatenation { achieved: f64, target: f64 },

    #[error("port {port} out of range (switch has {n_ports} ports)")]
    InvalidPort { port: usize, n_ports: usize },

    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_prob(name: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(name, format!("{p} is not a probability")));
    }
    Ok(())
}

pub(crate) fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid(name, format!("{x} must be positive and finite")));
    }
    Ok(())
}
