//! Fitting the undetermined parameters to measured polarization curves.

mod ga;
mod problem;

use thiserror::Error;

pub use ga::{
    evolve, mutate, one_point_crossover, roulette_select, roulette_weights, Checkpoint, Crossover,
    GaOutcome, GaSettings, GenerationRecord, Individual, Mutation, Objective, RngState, Selection,
    CHECKPOINT_VERSION, ROULETTE_EPSILON,
};
pub use problem::{
    CalibrationProblem, Experiment, Gene, Scalarization, FAILURE_PENALTY, MIN_CURVES, MIN_POINTS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalibrationError {
    #[error("at least three polarization curves required, found {0}")]
    TooFewCurves(usize),
    #[error("{0}")]
    Invalid(String),
    #[error("checkpoint belongs to a different problem (expected hash {expected}, found {found})")]
    CheckpointMismatch { expected: String, found: String },
    #[error("unreadable checkpoint: {0}")]
    Checkpoint(String),
}
