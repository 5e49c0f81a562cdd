//! Balance of plant: orifice flow, purge timing, and the operating-condition controller.

use crate::config::{ControlParameters, OperatingConditions};

/// Pressure ratio above which the orifice law is replaced by its chord to zero flow.
const LINEAR_ABOVE: f64 = 0.99;

/// Compressible orifice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nozzle {
    pub c_d: f64,
    pub gamma: f64,
}

impl Nozzle {
    pub fn critical_ratio(&self) -> f64 {
        let g = self.gamma;
        (2.0 / (g + 1.0)).powf(g / (g - 1.0))
    }

    /// Dimensionless flow function; constant below the critical ratio.
    pub fn psi(&self, pr: f64) -> f64 {
        let g = self.gamma;
        if pr >= 1.0 {
            return 0.0;
        }
        if pr > LINEAR_ABOVE {
            return self.psi(LINEAR_ABOVE) * (1.0 - pr) / (1.0 - LINEAR_ABOVE);
        }
        let pr = pr.max(self.critical_ratio());
        (2.0 / (g - 1.0) * (pr.powf(2.0 / g) - pr.powf((g + 1.0) / g))).sqrt()
    }

    /// Molar flow, mol·s⁻¹, through area `area` from `p_up` to `p_down` for a gas of molar mass `m`.
    pub fn molar_flow(&self, area: f64, p_up: f64, p_down: f64, r: f64, t: f64, m: f64) -> f64 {
        if area <= 0.0 || p_up <= 0.0 {
            return 0.0;
        }
        self.c_d * area * p_up * (self.gamma / (r * t * m)).sqrt() * self.psi(p_down / p_up)
    }
}

/// Periodic anode purge: the valve is open on `[k·Δ − t_purge, k·Δ]` for k ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurgeSchedule {
    pub enabled: bool,
    pub t_purge: f64,
    pub delta_t_purge: f64,
    pub area: f64,
}

impl PurgeSchedule {
    pub fn is_open(&self, t: f64) -> bool {
        if !self.enabled {
            return false;
        }
        let k = (t / self.delta_t_purge).ceil();
        k >= 1.0 && t >= k * self.delta_t_purge - self.t_purge && t < k * self.delta_t_purge
    }

    /// Open/close instants strictly after `t`, the earliest first.
    pub fn next_switch(&self, t: f64) -> Option<f64> {
        if !self.enabled {
            return None;
        }
        let d = self.delta_t_purge;
        let mut k = (t / d).floor().max(0.0);
        loop {
            let open = k * d - self.t_purge;
            let close = k * d;
            if k >= 1.0 && open > t {
                return Some(open);
            }
            if k >= 1.0 && close > t {
                return Some(close);
            }
            k += 1.0;
        }
    }

    /// Purge windows lying entirely inside `[0, horizon]`.
    pub fn windows(&self, horizon: f64) -> Vec<(f64, f64)> {
        if !self.enabled {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut k = 1.0;
        while k * self.delta_t_purge <= horizon {
            out.push((
                k * self.delta_t_purge - self.t_purge,
                k * self.delta_t_purge,
            ));
            k += 1.0;
        }
        out
    }

    /// Time events for the integrator, one per switching instant in `(t0, horizon]`.
    pub fn events<'a>(&self, t0: f64, horizon: f64) -> Vec<pemfc_solver::Event<'a>> {
        let mut out = Vec::new();
        let mut t = t0;
        while let Some(ts) = self.next_switch(t) {
            if ts > horizon {
                break;
            }
            out.push(pemfc_solver::Event::at_time(ts));
            t = ts;
        }
        out
    }
}

/// What the controller is allowed to see.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurements {
    /// Channel pressures, Pa, anode then cathode.
    pub pressure: [f64; 2],
    /// Supplied-gas humidities, anode then cathode.
    pub humidity: [f64; 2],
}

/// Actuator commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Actuation {
    pub a_bp: [f64; 2],
    pub phi_set: [f64; 2],
}

/// Discrete PI loop with clamped output and conditional integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiLoop {
    pub kp: f64,
    pub ki: f64,
    pub lo: f64,
    pub hi: f64,
    pub integral: f64,
    pub saturated: bool,
}

impl PiLoop {
    /// Loop whose integral reproduces `output` at zero error.
    pub fn starting_at(kp: f64, ki: f64, lo: f64, hi: f64, output: f64) -> Self {
        let integral = if ki > 0.0 { output / ki } else { 0.0 };
        Self {
            kp,
            ki,
            lo,
            hi,
            integral,
            saturated: false,
        }
    }

    pub fn output(&self, error: f64) -> f64 {
        (self.kp * error + self.ki * self.integral).clamp(self.lo, self.hi)
    }

    pub fn step(&mut self, error: f64, dt: f64) -> f64 {
        let trial = self.integral + error * dt;
        let raw = self.kp * error + self.ki * trial;
        self.saturated = raw < self.lo || raw > self.hi;
        // freeze the integral while the output is pinned and the error pushes further out
        let pushes_out = (raw > self.hi && error > 0.0) || (raw < self.lo && error < 0.0);
        if !pushes_out {
            self.integral = trial;
        }
        self.output(error)
    }
}

/// Controller memory for one run: pressure loops drive the back-pressure valves
/// (positive error opens the valve), humidity loops drive humidifier setpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Controller {
    pub pressure: [PiLoop; 2],
    pub humidity: [PiLoop; 2],
    /// Loops that act; the anode pressure loop is off in closed-anode mode.
    pub pressure_active: [bool; 2],
    pub dt: f64,
    pub saturations: usize,
}

impl Controller {
    pub fn new(
        gains: &ControlParameters,
        a_bp_max: [f64; 2],
        initial: Actuation,
        pressure_active: [bool; 2],
    ) -> Self {
        let pressure = [0, 1].map(|k| {
            PiLoop::starting_at(
                gains.kp_pressure,
                gains.ki_pressure,
                0.0,
                a_bp_max[k],
                initial.a_bp[k],
            )
        });
        let humidity = [0, 1].map(|k| {
            PiLoop::starting_at(
                gains.kp_humidity,
                gains.ki_humidity,
                0.0,
                1.0,
                initial.phi_set[k],
            )
        });
        Self {
            pressure,
            humidity,
            pressure_active,
            dt: gains.dt,
            saturations: 0,
        }
    }

    /// One sample: new actuator values from the measurements and targets.
    pub fn control_step(
        &mut self,
        measured: &Measurements,
        targets: &OperatingConditions,
        current: Actuation,
    ) -> Actuation {
        let mut out = current;
        let phi_des = [targets.phi_a_des, targets.phi_c_des];
        for k in 0..2 {
            if self.pressure_active[k] {
                let e = measured.pressure[k] - targets.p_des;
                out.a_bp[k] = self.pressure[k].step(e, self.dt);
                if self.pressure[k].saturated {
                    self.saturations += 1;
                }
            }
            let e = phi_des[k] - measured.humidity[k];
            out.phi_set[k] = self.humidity[k].step(e, self.dt);
        }
        out
    }
}
