use crate::bop::{Controller, Measurements};
use crate::config::FuelCellConfig;
use crate::model::{Drive, Model, Side};
use crate::physics::PhysicsError;

use super::{DriverError, LogEvent};

/// A dynamical system driven by a current density, with a voltage output.
///
/// The drivers only talk to this trait, so analytic stand-ins can replace the
/// cell when checking the measurement chain.
pub trait Plant {
    fn dim(&self) -> usize;
    fn labels(&self) -> Vec<String>;
    /// Per-slot absolute tolerances for the given scale.
    fn atol(&self, scale: f64) -> Vec<f64>;
    fn max_step(&self) -> f64 {
        f64::INFINITY
    }
    fn rhs(&self, t: f64, y: &[f64], i: f64, dy: &mut [f64]);
    fn voltage(&self, y: &[f64], i: f64) -> Result<f64, PhysicsError>;
    /// Arms discrete logic (controller memory, valve states) at the start of a run.
    fn start(&mut self, _t: f64, _y: &mut [f64], _log: &mut Vec<LogEvent>) {}
    /// Next instant after `t` at which discrete logic must run.
    fn next_switch(&self, _t: f64) -> Option<f64> {
        None
    }
    fn on_switch(&mut self, _t: f64, _y: &mut [f64], _log: &mut Vec<LogEvent>) {}
    fn derived_labels(&self) -> Vec<String> {
        Vec::new()
    }
    fn derived(&self, _y: &[f64], _i: f64, _out: &mut Vec<f64>) {}
}

/// `U = u0 − r·i` with no dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resistor {
    pub u0: f64,
    pub r: f64,
}

impl Plant for Resistor {
    fn dim(&self) -> usize {
        1
    }
    fn labels(&self) -> Vec<String> {
        vec!["dummy".into()]
    }
    fn atol(&self, scale: f64) -> Vec<f64> {
        vec![scale]
    }
    fn rhs(&self, _t: f64, _y: &[f64], _i: f64, dy: &mut [f64]) {
        dy[0] = 0.0;
    }
    fn voltage(&self, _y: &[f64], i: f64) -> Result<f64, PhysicsError> {
        Ok(self.u0 - self.r * i)
    }
}

/// Resistor `r` in parallel with capacitance `c`, both per unit area.
/// The state is the overpotential across the pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParallelRc {
    pub u0: f64,
    pub r: f64,
    pub c: f64,
}

impl Plant for ParallelRc {
    fn dim(&self) -> usize {
        1
    }
    fn labels(&self) -> Vec<String> {
        vec!["eta".into()]
    }
    fn atol(&self, scale: f64) -> Vec<f64> {
        vec![scale * 1e-3]
    }
    fn rhs(&self, _t: f64, y: &[f64], i: f64, dy: &mut [f64]) {
        dy[0] = (i - y[0] / self.r) / self.c;
    }
    fn voltage(&self, y: &[f64], _i: f64) -> Result<f64, PhysicsError> {
        Ok(self.u0 - y[0])
    }
}

/// The fuel cell with its balance of plant, controller and purge valve.
#[derive(Clone)]
pub struct Cell {
    pub model: Model,
    controller: Option<Controller>,
    phi_set: [f64; 2],
    purge_open: bool,
    saturated: [bool; 2],
    atol_unit: Vec<f64>,
}

const DERIVED: [&str; 16] = [
    "H2_in",
    "H2_out",
    "H2_react",
    "H2_inventory",
    "O2_in",
    "O2_out",
    "O2_react",
    "O2_inventory",
    "H2O_in",
    "H2O_out",
    "H2O_react",
    "H2O_inventory",
    "P_gc_a",
    "P_gc_c",
    "W_out_a",
    "W_out_c",
];

impl Cell {
    pub fn new(config: FuelCellConfig) -> Result<Self, DriverError> {
        config.validate()?;
        Ok(Self::from_model(Model::new(config)?))
    }

    pub fn from_model(model: Model) -> Self {
        let op = &model.config.operating;
        let phi_set = [op.phi_a_des, op.phi_c_des];
        let atol_unit = model.atol(1.0);
        Self {
            model,
            controller: None,
            phi_set,
            purge_open: false,
            saturated: [false; 2],
            atol_unit,
        }
    }

    pub fn config(&self) -> &FuelCellConfig {
        &self.model.config
    }

    pub fn drive(&self, i: f64) -> Drive {
        Drive {
            i,
            phi_set: self.phi_set,
            purge_open: self.purge_open,
        }
    }

    pub fn phi_set(&self) -> [f64; 2] {
        self.phi_set
    }

    pub fn purge_open(&self) -> bool {
        self.purge_open
    }

    pub fn controller(&self) -> Option<&Controller> {
        self.controller.as_ref()
    }

    fn control_active(&self) -> bool {
        self.model.config.options.control
    }

    fn next_sample(&self, t: f64) -> f64 {
        let dt = self.model.config.control.dt;
        let mut k = (t / dt).floor() + 1.0;
        if k * dt <= t + 1e-9 * dt {
            k += 1.0;
        }
        k * dt
    }

    fn is_sample(&self, t: f64) -> bool {
        let dt = self.model.config.control.dt;
        let k = (t / dt).round();
        (t - k * dt).abs() <= 1e-9 * dt
    }

    fn measure(&self, y: &[f64], i: f64) -> Measurements {
        let flows = self.model.flows(y, &self.drive(i));
        let l = &self.model.layout;
        Measurements {
            pressure: [flows.side[0].p_gc, flows.side[1].p_gc],
            humidity: [y[l.phi_sm(Side::Anode)], y[l.phi_sm(Side::Cathode)]],
        }
    }
}

impl Plant for Cell {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn labels(&self) -> Vec<String> {
        self.model.layout.labels()
    }

    fn atol(&self, scale: f64) -> Vec<f64> {
        self.atol_unit.iter().map(|a| a * scale).collect()
    }

    fn max_step(&self) -> f64 {
        self.model.config.computing.max_step
    }

    fn rhs(&self, _t: f64, y: &[f64], i: f64, dy: &mut [f64]) {
        self.model.rhs(y, &self.drive(i), dy);
    }

    fn voltage(&self, y: &[f64], i: f64) -> Result<f64, PhysicsError> {
        self.model.voltage(y, i)
    }

    fn start(&mut self, t: f64, y: &mut [f64], log: &mut Vec<LogEvent>) {
        self.purge_open = self.model.purge.is_open(t);
        if self.purge_open {
            log.push(LogEvent::new(
                t,
                "purge_open",
                "run starts inside a purge window",
            ));
        }
        self.saturated = [false; 2];
        self.controller = if self.control_active() {
            let m = &self.model;
            Some(Controller::new(
                &m.config.control,
                m.a_bp_max,
                m.actuation(y, self.phi_set),
                [!m.closed_anode(), true],
            ))
        } else {
            None
        };
    }

    fn next_switch(&self, t: f64) -> Option<f64> {
        let purge = self.model.purge.next_switch(t);
        let control = self.controller.as_ref().map(|_| self.next_sample(t));
        match (purge, control) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    fn on_switch(&mut self, t: f64, y: &mut [f64], log: &mut Vec<LogEvent>) {
        let open = self.model.purge.is_open(t);
        if open != self.purge_open {
            self.purge_open = open;
            let kind = if open { "purge_open" } else { "purge_close" };
            log.push(LogEvent::new(t, kind, "anode purge valve"));
        }
        if self.controller.is_none() || !self.is_sample(t) {
            return;
        }
        // the controller sees the current only through the states
        let measured = self.measure(y, 0.0);
        let current = self.model.actuation(y, self.phi_set);
        let ctrl = self.controller.as_mut().expect("checked above");
        let act = ctrl.control_step(&measured, &self.model.config.operating, current);
        let l = &self.model.layout;
        for side in Side::BOTH {
            let k = side as usize;
            y[l.a_bp(side)] = act.a_bp[k];
            let sat = ctrl.pressure_active[k] && ctrl.pressure[k].saturated;
            if sat != self.saturated[k] {
                self.saturated[k] = sat;
                let kind = if sat {
                    "valve_saturated"
                } else {
                    "valve_released"
                };
                log.push(LogEvent::new(
                    t,
                    kind,
                    format!("back-pressure valve {}", side.tag()),
                ));
            }
        }
        self.phi_set = act.phi_set;
    }

    fn derived_labels(&self) -> Vec<String> {
        DERIVED.iter().map(|s| s.to_string()).collect()
    }

    fn derived(&self, y: &[f64], i: f64, out: &mut Vec<f64>) {
        let drive = self.drive(i);
        let acc = self.model.account(y, &drive);
        for s in [acc.h2, acc.o2, acc.h2o] {
            out.extend([s.inflow, s.outflow, s.reacted, s.inventory]);
        }
        let flows = self.model.flows(y, &drive);
        out.extend([flows.side[0].p_gc, flows.side[1].p_gc]);
        for f in &flows.side {
            out.push((f.valve + f.purge) * f.m_gc);
        }
    }
}
