//! Imposed current-density programs.

use std::f64::consts::PI;
use std::sync::Arc;

/// Logistic ramp rescaled to run exactly from 0 to 1 over `[t_k − w/2, t_k + w/2]`.
pub fn ramp(t: f64, t_k: f64, width: f64) -> f64 {
    let half = 0.5 * width;
    if t <= t_k - half {
        return 0.0;
    }
    if t >= t_k + half {
        return 1.0;
    }
    let sig = |z: f64| 1.0 / (1.0 + (-z).exp());
    let lo = sig(-6.0);
    let hi = sig(6.0);
    (sig(12.0 * (t - t_k) / width) - lo) / (hi - lo)
}

/// Piecewise-constant levels joined by smooth ramps centered on each switch time.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProfile {
    pub i_init: f64,
    /// `(t_switch, level)` pairs in increasing time.
    pub switches: Vec<(f64, f64)>,
    pub t_smooth: f64,
}

impl StepProfile {
    pub fn single(i_init: f64, i_final: f64, t_switch: f64, t_smooth: f64) -> Self {
        Self {
            i_init,
            switches: vec![(t_switch, i_final)],
            t_smooth,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.t_smooth > 0.0) {
            return Err("t_smooth must be positive".into());
        }
        if !(self.i_init >= 0.0) || self.switches.iter().any(|(_, l)| !(*l >= 0.0)) {
            return Err("current levels must be non-negative".into());
        }
        if self
            .switches
            .windows(2)
            .any(|w| w[1].0 - w[0].0 < self.t_smooth)
        {
            return Err("switches must be at least t_smooth apart".into());
        }
        Ok(())
    }

    pub fn current_at(&self, t: f64) -> f64 {
        let mut i = self.i_init;
        let mut prev = self.i_init;
        for &(ts, level) in &self.switches {
            i += (level - prev) * ramp(t, ts, self.t_smooth);
            prev = level;
        }
        i
    }

    pub fn final_level(&self) -> f64 {
        self.switches.last().map_or(self.i_init, |s| s.1)
    }
}

/// Staircase from `delta_i` up to `i_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationProfile {
    pub i_max: f64,
    pub delta_i: f64,
    /// Maximum hold per level, s.
    pub hold: f64,
    /// Quasi-steady window and slope tolerance for early exit.
    pub window: f64,
    pub tol: f64,
    pub t_smooth: f64,
}

impl Default for PolarizationProfile {
    fn default() -> Self {
        Self {
            i_max: 3e4,
            delta_i: 1000.0,
            hold: 30.0,
            window: 10.0,
            tol: 1e-4,
            t_smooth: 0.5,
        }
    }
}

impl PolarizationProfile {
    pub fn levels(&self) -> Vec<f64> {
        let n = (self.i_max / self.delta_i + 1e-9).floor() as usize;
        (1..=n).map(|k| k as f64 * self.delta_i).collect()
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.delta_i > 0.0 && self.i_max >= self.delta_i) {
            return Err("need 0 < delta_i ≤ i_max".into());
        }
        if !(self.window > 0.0 && self.window < self.hold) {
            return Err("quasi-steady window must be shorter than the hold".into());
        }
        if !(self.tol > 0.0 && self.t_smooth > 0.0) {
            return Err("tolerance and smoothing time must be positive".into());
        }
        Ok(())
    }
}

/// Small-signal sinusoidal perturbation around a DC current.
#[derive(Debug, Clone, PartialEq)]
pub struct EisProfile {
    pub i_dc: f64,
    /// Relative amplitude of the current perturbation.
    pub delta: f64,
    pub frequencies: Vec<f64>,
    /// Transient periods skipped before projecting.
    pub discard_periods: usize,
    pub measure_periods: usize,
    pub samples_per_period: usize,
    /// Extra settling time, s; the discard covers at least this long.
    pub settle_time: f64,
}

impl EisProfile {
    pub fn new(i_dc: f64, frequencies: Vec<f64>) -> Self {
        Self {
            i_dc,
            delta: 0.05,
            frequencies,
            discard_periods: 2,
            measure_periods: 5,
            samples_per_period: 32,
            settle_time: 0.0,
        }
    }

    /// Logarithmic grid, `per_decade` points per decade, from `f_hi` down to `f_lo`.
    pub fn log_grid(f_lo: f64, f_hi: f64, per_decade: usize) -> Vec<f64> {
        let decades = (f_hi / f_lo).log10();
        let n = (decades * per_decade as f64).round() as usize;
        (0..=n)
            .map(|k| f_hi * 10f64.powf(-(k as f64) / per_decade as f64))
            .collect()
    }

    pub fn default_grid() -> Vec<f64> {
        Self::log_grid(1e-3, 1e4, 10)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.i_dc > 0.0) {
            return Err("EIS needs a positive DC current".into());
        }
        if !(self.delta > 0.0 && self.delta <= 0.1) {
            return Err("amplitude ratio must lie in (0, 0.1]".into());
        }
        if self.discard_periods < 2 || self.measure_periods < 5 {
            return Err("need at least 2 discarded and 5 measured periods".into());
        }
        if self.samples_per_period < 8 {
            return Err("need at least 8 samples per period".into());
        }
        if self.frequencies.is_empty() || self.frequencies.iter().any(|f| !(*f > 0.0)) {
            return Err("frequencies must be positive".into());
        }
        let inc = self.frequencies.windows(2).all(|w| w[1] > w[0]);
        let dec = self.frequencies.windows(2).all(|w| w[1] < w[0]);
        if !(inc || dec) {
            return Err("frequencies must be strictly monotone".into());
        }
        Ok(())
    }

    pub fn current_at(&self, f: f64, t: f64) -> f64 {
        self.i_dc * (1.0 + self.delta * (2.0 * PI * f * t).sin())
    }
}

/// Any current program the drivers can integrate.
#[derive(Clone)]
pub enum CurrentProfile {
    Step(StepProfile),
    Polarization(PolarizationProfile),
    Eis(EisProfile),
    /// Arbitrary non-negative i(t).
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for CurrentProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurrentProfile::Step(p) => f.debug_tuple("Step").field(p).finish(),
            CurrentProfile::Polarization(p) => f.debug_tuple("Polarization").field(p).finish(),
            CurrentProfile::Eis(p) => f.debug_tuple("Eis").field(p).finish(),
            CurrentProfile::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}
