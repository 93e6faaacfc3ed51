use thiserror::Error;

/// Failures raised by the simulation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DickeError {
    #[error("coupling vanishes at t = {t}; mu is undefined")]
    ZeroCoupling { t: f64 },

    #[error("atomic amplitude left the Holstein-Primakoff domain: |beta|^2 = {beta_sq} (t = {t})")]
    GammaNonPositive { t: f64, beta_sq: f64 },

    #[error("adaptive step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("step budget of {max_steps} exhausted at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("protocol is not periodic (eta = {eta})")]
    NotPeriodic { eta: f64 },

    #[error("no super-radiant window: mu_min = {mu_min} > 1")]
    NoSrWindow { mu_min: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, DickeError>;
