use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("state diverged (non-finite) at t = {t}")]
    Divergence { t: f64 },

    #[error("tangent vector collapsed to zero norm at t = {t}")]
    TangentUnderflow { t: f64 },

    #[error("requested range [{lo}, {hi}] lies outside the available span [{min}, {max}]")]
    Range { lo: f64, hi: f64, min: f64, max: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name: name.to_string(), reason: reason.into() }
    }
}
