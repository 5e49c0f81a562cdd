//! Simulation drivers: current programs, time integration of a plant, steady
//! states, polarization staircases and impedance sweeps.

mod eis;
mod plant;
mod polarization;
mod profile;
mod runner;
mod steady;

pub use eis::{
    phasor, run_eis, run_eis_with, ImpedancePoint, ImpedanceSpectrum, NonLinearityWarning,
};
pub use plant::{Cell, ParallelRc, Plant, Resistor};
pub use polarization::{
    delta_u_max, quasi_steady_detect, run_polarization, run_polarization_steady,
    run_polarization_steady_from, PolarizationCurve,
};
pub use profile::{ramp, CurrentProfile, EisProfile, PolarizationProfile, StepProfile};
pub use runner::{run_step, simulate, Runner};
pub use steady::{steady_state, SteadyOptions};

use pemfc_solver::{SolverError, StepStats};
use serde::Serialize;
use thiserror::Error;

use crate::config::ConfigError;
use crate::physics::PhysicsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriverError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error("solver failed {context}: {source}")]
    Solver {
        context: String,
        #[source]
        source: SolverError,
    },
    #[error("no steady state found at i = {i} A/m²: {reason}")]
    NoSteadyState { i: f64, reason: String },
}

impl DriverError {
    /// True for failures of the numerical integration or the steady-state search.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            DriverError::Solver { .. } | DriverError::NoSteadyState { .. }
        )
    }
}

/// Integration tolerances and output sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub rtol: f64,
    /// Multiplies each slot's natural magnitude to give its absolute tolerance.
    pub atol_scale: f64,
    /// Overrides the configured maximum step when set.
    pub max_step: Option<f64>,
    /// Output sample interval, s.
    pub sample_dt: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-6,
            atol_scale: 1e-6,
            max_step: None,
            sample_dt: 1.0,
        }
    }
}

/// Something that happened during a run, kept in the result metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogEvent {
    pub t: f64,
    pub kind: String,
    pub detail: String,
}

impl LogEvent {
    pub fn new(t: f64, kind: &str, detail: impl Into<String>) -> Self {
        Self {
            t,
            kind: kind.to_string(),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    VoltageCollapse { t: f64 },
}

/// Sampled trajectory of a run.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Imposed current density at each sample, A·m⁻².
    pub current: Vec<f64>,
    /// Cell voltage at each sample, V.
    pub voltage: Vec<f64>,
    pub derived_labels: Vec<String>,
    /// Column-major: `derived_columns[k][sample]`.
    pub derived_columns: Vec<Vec<f64>>,
    pub events: Vec<LogEvent>,
    pub stats: StepStats,
    pub status: RunStatus,
}

impl SimulationResult {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn derived(&self, name: &str) -> Option<&[f64]> {
        let k = self.derived_labels.iter().position(|l| l == name)?;
        Some(&self.derived_columns[k])
    }

    /// Time series of one state slot, by label.
    pub fn state(&self, label: &str) -> Option<Vec<f64>> {
        let k = self.labels.iter().position(|l| l == label)?;
        Some(self.states.iter().map(|s| s[k]).collect())
    }

    /// Index of the last sample at or before `t`.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        self.times.iter().rposition(|&x| x <= t)
    }
}
