use pemfc_solver::{Bdf, SolverSettings, StepStats};

use crate::config::FuelCellConfig;
use crate::physics::PhysicsError;

use super::plant::{Cell, Plant};
use super::profile::StepProfile;
use super::steady::{steady_state, SteadyOptions};
use super::{DriverError, RunOptions, RunStatus, SimulationResult};

/// Incremental integration of a plant; keeps the integrator warm between calls.
pub struct Runner<'p, P: Plant + ?Sized> {
    plant: &'p mut P,
    bdf: Bdf,
    t: f64,
    y: Vec<f64>,
    result: SimulationResult,
    buf: Vec<f64>,
}

impl<'p, P: Plant + ?Sized> Runner<'p, P> {
    pub fn new(
        plant: &'p mut P,
        y0: &[f64],
        t0: f64,
        opts: &RunOptions,
    ) -> Result<Self, DriverError> {
        if y0.len() != plant.dim() {
            return Err(DriverError::Invalid(format!(
                "initial state has {} slots, plant has {}",
                y0.len(),
                plant.dim()
            )));
        }
        let settings = SolverSettings {
            rtol: opts.rtol,
            atol: opts.atol_scale,
            atol_per_slot: Some(plant.atol(opts.atol_scale)),
            max_step: opts.max_step.unwrap_or_else(|| plant.max_step()),
            ..Default::default()
        };
        settings
            .validate(y0.len())
            .map_err(|e| DriverError::Invalid(e.to_string()))?;
        let mut y = y0.to_vec();
        let mut events = Vec::new();
        plant.start(t0, &mut y, &mut events);
        let result = SimulationResult {
            labels: plant.labels(),
            times: Vec::new(),
            states: Vec::new(),
            current: Vec::new(),
            voltage: Vec::new(),
            derived_labels: plant.derived_labels(),
            derived_columns: vec![Vec::new(); plant.derived_labels().len()],
            events,
            stats: StepStats::default(),
            status: RunStatus::Completed,
        };
        Ok(Self {
            plant,
            bdf: Bdf::new(settings),
            t: t0,
            y,
            result,
            buf: Vec::new(),
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn plant(&self) -> &P {
        self.plant
    }

    pub fn result(&self) -> &SimulationResult {
        &self.result
    }

    pub fn status(&self) -> RunStatus {
        self.result.status
    }

    fn record(&mut self, t: f64, y: Vec<f64>, i: f64) -> Result<bool, DriverError> {
        let u = match self.plant.voltage(&y, i) {
            Ok(u) => u,
            Err(PhysicsError::VoltageCollapse { .. }) => {
                self.result.status = RunStatus::VoltageCollapse { t };
                return Ok(false);
            }
            Err(e) => return Err(e.into()),
        };
        self.buf.clear();
        self.plant.derived(&y, i, &mut self.buf);
        for (col, v) in self.result.derived_columns.iter_mut().zip(&self.buf) {
            col.push(*v);
        }
        self.result.times.push(t);
        self.result.states.push(y);
        self.result.current.push(i);
        self.result.voltage.push(u);
        Ok(true)
    }

    /// Integrates to `t_end`, recording at the given sample times.
    /// Stops early, returning the collapse status, if the voltage collapses.
    pub fn advance(
        &mut self,
        t_end: f64,
        current: &dyn Fn(f64) -> f64,
        samples: &[f64],
    ) -> Result<RunStatus, DriverError> {
        if self.result.status != RunStatus::Completed {
            return Ok(self.result.status);
        }
        let mut pending: Vec<f64> = samples
            .iter()
            .copied()
            .filter(|&s| {
                s <= t_end && (s > self.t || (s == self.t && self.result.times.is_empty()))
            })
            .collect();
        pending.sort_by(f64::total_cmp);
        pending.dedup();
        if pending.first() == Some(&self.t) {
            let y = self.y.clone();
            if !self.record(self.t, y, current(self.t))? {
                return Ok(self.result.status);
            }
            pending.remove(0);
        }
        let mut next = 0;
        while self.t < t_end {
            let seg_end = match self.plant.next_switch(self.t) {
                Some(s) if s < t_end => s,
                _ => t_end,
            };
            let first = next;
            while next < pending.len() && pending[next] <= seg_end {
                next += 1;
            }
            let plant = &*self.plant;
            let out = self
                .bdf
                .integrate(
                    |t, y, dy| plant.rhs(t, y, current(t), dy),
                    &self.y,
                    self.t,
                    seg_end,
                    &[],
                    Some(&pending[first..next]),
                )
                .map_err(|e| DriverError::Solver {
                    context: format!("between t = {} s and {} s", self.t, seg_end),
                    source: e,
                })?;
            self.result.stats += out.stats;
            for (t, y) in out.times.into_iter().zip(out.states) {
                if !self.record(t, y, current(t))? {
                    return Ok(self.result.status);
                }
            }
            self.y = out.y_final;
            self.t = seg_end;
            if let Err(PhysicsError::VoltageCollapse { .. }) =
                self.plant.voltage(&self.y, current(self.t))
            {
                self.result.status = RunStatus::VoltageCollapse { t: self.t };
                return Ok(self.result.status);
            }
            if self.t < t_end {
                self.plant
                    .on_switch(self.t, &mut self.y, &mut self.result.events);
            }
        }
        Ok(self.result.status)
    }

    pub fn finish(self) -> SimulationResult {
        self.result
    }
}

/// Uniform sample grid on `[t0, t_end]`, always including both ends.
pub fn sample_grid(t0: f64, t_end: f64, dt: f64) -> Vec<f64> {
    let n = ((t_end - t0) / dt + 1e-9).floor() as usize;
    let mut v: Vec<f64> = (0..=n).map(|k| t0 + k as f64 * dt).collect();
    if t_end - v[n] > 1e-9 * dt.max(1.0) {
        v.push(t_end);
    } else {
        v[n] = t_end;
    }
    v
}

/// Integrates a plant under the current program `current` from `y0` over `[t0, t_end]`.
pub fn simulate<P: Plant + ?Sized>(
    plant: &mut P,
    current: &dyn Fn(f64) -> f64,
    y0: &[f64],
    (t0, t_end): (f64, f64),
    opts: &RunOptions,
) -> Result<SimulationResult, DriverError> {
    if !(t_end > t0) {
        return Err(DriverError::Invalid(format!(
            "empty time span [{t0}, {t_end}]"
        )));
    }
    if !(opts.sample_dt > 0.0) {
        return Err(DriverError::Invalid(
            "sample interval must be positive".into(),
        ));
    }
    let samples = sample_grid(t0, t_end, opts.sample_dt);
    let mut runner = Runner::new(plant, y0, t0, opts)?;
    runner.advance(t_end, current, &samples)?;
    Ok(runner.finish())
}

/// Step-current run on the cell, started from the steady state at the initial level
/// (or from the rest state when that level is zero).
pub fn run_step(
    config: &FuelCellConfig,
    profile: &StepProfile,
    horizon: f64,
    opts: &RunOptions,
) -> Result<SimulationResult, DriverError> {
    profile.validate().map_err(DriverError::Invalid)?;
    if !(horizon > 0.0) {
        return Err(DriverError::Invalid("horizon must be positive".into()));
    }
    let mut cell = Cell::new(config.clone())?;
    let y0 = if profile.i_init > 0.0 {
        steady_state(&cell.model, profile.i_init, None, &SteadyOptions::default())?
    } else {
        cell.model.rest_state()
    };
    let p = profile.clone();
    simulate(
        &mut cell,
        &move |t| p.current_at(t),
        &y0,
        (0.0, horizon),
        opts,
    )
}
