use crate::config::{FuelCellConfig, OperatingConditions};
use crate::model::Model;
use crate::physics::PhysicsError;

use super::plant::{Cell, Plant};
use super::profile::{ramp, PolarizationProfile};
use super::runner::Runner;
use super::steady::{steady_state, SteadyOptions};
use super::{DriverError, RunOptions, RunStatus};

/// Voltage against current density.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationCurve {
    /// `(i A·m⁻², U V)` in increasing current.
    pub points: Vec<(f64, f64)>,
    pub operating: OperatingConditions,
    /// The staircase stopped because the voltage collapsed.
    pub collapsed: bool,
}

impl PolarizationCurve {
    pub fn currents(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn voltages(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    /// Linear interpolation of the voltage at `i`; `None` outside the curve.
    pub fn voltage_at(&self, i: f64) -> Option<f64> {
        interpolate(&self.points, i)
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> Option<f64> {
    let first = points.first()?;
    let last = points.last()?;
    if x < first.0 || x > last.0 {
        return None;
    }
    let k = points.partition_point(|p| p.0 < x);
    if k < points.len() && points[k].0 == x {
        return Some(points[k].1);
    }
    let (a, b) = (points[k - 1], points[k]);
    Some(a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0))
}

/// Least-squares slope of the trailing `window` of a series, compared to `tol`.
/// A series shorter than the window is never quasi-steady.
pub fn quasi_steady_detect(times: &[f64], values: &[f64], window: f64, tol: f64) -> bool {
    let (Some(&t_last), Some(&t_first)) = (times.last(), times.first()) else {
        return false;
    };
    if t_last - t_first < window * (1.0 - 1e-12) {
        return false;
    }
    let start = times.partition_point(|&t| t < t_last - window * (1.0 + 1e-12));
    let (t, v) = (&times[start..], &values[start..]);
    if t.len() < 2 {
        return false;
    }
    let n = t.len() as f64;
    let mt = t.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in t.iter().zip(v) {
        sxy += (a - mt) * (b - mv);
        sxx += (a - mt) * (a - mt);
    }
    (sxy / sxx).abs() < tol
}

/// Largest voltage gap between two curves over their common current range,
/// interpolating each linearly at every current of either curve.
pub fn delta_u_max(a: &[(f64, f64)], b: &[(f64, f64)]) -> Option<f64> {
    let lo = a.first()?.0.max(b.first()?.0);
    let hi = a.last()?.0.min(b.last()?.0);
    if lo > hi {
        return None;
    }
    a.iter()
        .chain(b)
        .map(|p| p.0)
        .filter(|&i| i >= lo && i <= hi)
        .map(|i| (interpolate(a, i).unwrap() - interpolate(b, i).unwrap()).abs())
        .reduce(f64::max)
}

/// Staircase polarization curve: each level is held until the voltage is
/// quasi-steady or the hold time runs out, and the end-of-hold voltage recorded.
pub fn run_polarization(
    config: &FuelCellConfig,
    profile: &PolarizationProfile,
    opts: &RunOptions,
) -> Result<PolarizationCurve, DriverError> {
    profile.validate().map_err(DriverError::Invalid)?;
    let levels = profile.levels();
    let mut cell = Cell::new(config.clone())?;
    let mut curve = PolarizationCurve {
        points: Vec::new(),
        operating: config.operating.clone(),
        collapsed: false,
    };
    let y0 = steady_state(&cell.model, levels[0], None, &SteadyOptions::default())?;
    match cell.voltage(&y0, levels[0]) {
        Ok(u) => curve.points.push((levels[0], u)),
        Err(PhysicsError::VoltageCollapse { .. }) => {
            curve.collapsed = true;
            return Ok(curve);
        }
        Err(e) => return Err(e.into()),
    }
    let mut runner = Runner::new(&mut cell, &y0, 0.0, opts)?;
    let check = 1.0f64;
    for w in levels.windows(2) {
        let (prev, level) = (w[0], w[1]);
        let t_start = runner.t();
        let ts = profile.t_smooth;
        let current = move |t: f64| prev + (level - prev) * ramp(t, t_start + 0.5 * ts, ts);
        let from = runner.result().len();
        let mut t = t_start;
        let end = t_start + profile.hold;
        while t < end {
            let next = (t + check).min(end);
            let samples = [next - 0.5 * check, next];
            if runner.advance(next, &current, &samples)? != RunStatus::Completed {
                curve.collapsed = true;
                return Ok(curve);
            }
            t = next;
            let r = runner.result();
            if t - t_start >= ts + profile.window
                && quasi_steady_detect(
                    &r.times[from..],
                    &r.voltage[from..],
                    profile.window,
                    profile.tol,
                )
            {
                break;
            }
        }
        let u = *runner.result().voltage.last().expect("samples recorded");
        curve.points.push((level, u));
    }
    Ok(curve)
}

/// Polarization curve made of steady states at the given currents, solved by
/// continuation from one level to the next.
pub fn run_polarization_steady(
    config: &FuelCellConfig,
    currents: &[f64],
    opts: &SteadyOptions,
) -> Result<PolarizationCurve, DriverError> {
    run_polarization_steady_from(config, currents, opts, None)
}

/// As [`run_polarization_steady`], with a guess for the state at the first current.
pub fn run_polarization_steady_from(
    config: &FuelCellConfig,
    currents: &[f64],
    opts: &SteadyOptions,
    start: Option<&[f64]>,
) -> Result<PolarizationCurve, DriverError> {
    if currents.is_empty() || currents.windows(2).any(|w| w[1] <= w[0]) || currents[0] <= 0.0 {
        return Err(DriverError::Invalid(
            "currents must be positive and strictly increasing".into(),
        ));
    }
    config.validate()?;
    let model = Model::new(config.clone())?;
    let mut curve = PolarizationCurve {
        points: Vec::new(),
        operating: config.operating.clone(),
        collapsed: false,
    };
    let mut y: Option<Vec<f64>> = start.map(<[f64]>::to_vec);
    for &i in currents {
        let next = steady_state(&model, i, y.as_deref(), opts)?;
        match model.voltage(&next, i) {
            Ok(u) => curve.points.push((i, u)),
            Err(PhysicsError::VoltageCollapse { .. }) => {
                curve.collapsed = true;
                break;
            }
            Err(e) => return Err(e.into()),
        }
        y = Some(next);
    }
    Ok(curve)
}
