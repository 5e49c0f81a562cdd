use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid solver settings: {0}")]
    InvalidSettings(String),
    #[error("step size {step:e} fell below the minimum {min_step:e} at t = {t}")]
    StepSizeUnderflow { t: f64, step: f64, min_step: f64 },
    #[error("Newton iteration diverged at t = {t} after Jacobian refresh")]
    NewtonDivergence { t: f64 },
    #[error("non-finite derivative in slot {slot} at t = {t}")]
    NonFiniteDerivative { slot: usize, t: f64 },
    #[error("state has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}
