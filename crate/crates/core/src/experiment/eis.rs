use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::FuelCellConfig;

use super::plant::{Cell, Plant};
use super::profile::EisProfile;
use super::runner::Runner;
use super::steady::{steady_state, SteadyOptions};
use super::{DriverError, RunOptions, RunStatus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpedancePoint {
    pub f: f64,
    /// Ω·m².
    pub z: Complex64,
    /// Harmonic distortion of the voltage at 2f and 3f relative to the fundamental.
    pub thd: f64,
}

/// The voltage response at `f` was not small-signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonLinearityWarning {
    pub f: f64,
    pub thd: f64,
}

impl std::fmt::Display for NonLinearityWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "harmonic distortion {:.1}% at {} Hz exceeds 10%",
            100.0 * self.thd,
            self.f
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ImpedanceSpectrum {
    pub points: Vec<ImpedancePoint>,
    pub warnings: Vec<NonLinearityWarning>,
}

/// Single-bin Fourier coefficient at `f` of samples spanning whole periods:
/// `A sin(2πft + φ)` maps to `A·e^{i(φ − π/2)}`.
pub fn phasor(times: &[f64], values: &[f64], f: f64) -> Complex64 {
    let w = 2.0 * PI * f;
    let sum: Complex64 = times
        .iter()
        .zip(values)
        .map(|(&t, &v)| v * Complex64::from_polar(1.0, -w * t))
        .sum();
    sum * (2.0 / times.len() as f64)
}

const THD_LIMIT: f64 = 0.1;

fn one_frequency<P: Plant + Clone>(
    plant: &P,
    y0: &[f64],
    profile: &EisProfile,
    f: f64,
    opts: &RunOptions,
) -> Result<ImpedancePoint, DriverError> {
    let period = 1.0 / f;
    let per = profile.samples_per_period;
    let discard = profile
        .discard_periods
        .max((profile.settle_time * f).ceil() as usize);
    let t_meas = discard as f64 * period;
    let m = profile.measure_periods * per;
    let samples: Vec<f64> = (0..m)
        .map(|k| t_meas + k as f64 * period / per as f64)
        .collect();
    let t_end = t_meas + profile.measure_periods as f64 * period;

    let mut local = opts.clone();
    let cap = opts.max_step.unwrap_or_else(|| plant.max_step());
    local.max_step = Some(cap.min(period / 16.0));
    let mut p = plant.clone();
    let mut runner = Runner::new(&mut p, y0, 0.0, &local)?;
    let current = |t: f64| profile.current_at(f, t);
    if runner.advance(t_end, &current, &samples)? != RunStatus::Completed {
        return Err(DriverError::Invalid(format!(
            "voltage collapsed during the {f} Hz run"
        )));
    }
    let r = runner.result();
    let u1 = phasor(&r.times, &r.voltage, f);
    let i1 = phasor(&r.times, &r.current, f);
    let u2 = phasor(&r.times, &r.voltage, 2.0 * f);
    let u3 = phasor(&r.times, &r.voltage, 3.0 * f);
    let thd = (u2.norm_sqr() + u3.norm_sqr()).sqrt() / u1.norm();
    Ok(ImpedancePoint {
        f,
        z: -u1 / i1,
        thd,
    })
}

/// Impedance of any plant starting from the state `y0`, one independent run per
/// frequency; runs are spread over the worker pool.
pub fn run_eis_with<P: Plant + Clone + Send + Sync>(
    plant: &P,
    y0: &[f64],
    profile: &EisProfile,
    opts: &RunOptions,
) -> Result<ImpedanceSpectrum, DriverError> {
    profile.validate().map_err(DriverError::Invalid)?;
    let points: Vec<ImpedancePoint> = crate::parallel::install(|| {
        profile
            .frequencies
            .par_iter()
            .map(|&f| one_frequency(plant, y0, profile, f, opts))
            .collect::<Result<_, _>>()
    })?;
    let warnings = points
        .iter()
        .filter(|p| !(p.thd <= THD_LIMIT))
        .map(|p| NonLinearityWarning { f: p.f, thd: p.thd })
        .collect();
    Ok(ImpedanceSpectrum { points, warnings })
}

/// Impedance spectrum of the cell around its steady state at the DC current.
pub fn run_eis(
    config: &FuelCellConfig,
    profile: &EisProfile,
    opts: &RunOptions,
) -> Result<ImpedanceSpectrum, DriverError> {
    profile.validate().map_err(DriverError::Invalid)?;
    let cell = Cell::new(config.clone())?;
    let y0 = steady_state(&cell.model, profile.i_dc, None, &SteadyOptions::default())?;
    run_eis_with(&cell, &y0, profile, opts)
}
