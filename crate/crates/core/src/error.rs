use thiserror::Error;

/// Errors raised by parameter validation and by the integrator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid oscillator parameters: {0}")]
    Params(String),
    #[error("invalid gains: {0}")]
    Gains(String),
    #[error("invalid simulation config: {0}")]
    SimConfig(String),
    #[error("invalid optimizer config: {0}")]
    OptConfig(String),
    #[error("state diverged (non-finite) at t = {t}")]
    Diverged { t: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
