use nalgebra::{DMatrix, DVector};
use pemfc_solver::{Bdf, SolverSettings};

use crate::model::{Drive, Model, Side};

use super::DriverError;

/// Settings of the steady-state search.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyOptions {
    /// Convergence threshold on every time derivative, in units of the slot's
    /// natural magnitude per second.
    pub tol: f64,
    pub max_newton: usize,
    /// First relaxation horizon, s; later ones grow tenfold up to `max_horizon`.
    pub first_horizon: f64,
    pub max_horizon: f64,
    /// Rate of the continuous valve law standing in for the controller, s⁻¹.
    pub relax_rate: f64,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_newton: 12,
            first_horizon: 10.0,
            max_horizon: 1e6,
            relax_rate: 1.0,
        }
    }
}

/// Steady-state problem: the cell balances with humidifiers at their targets,
/// the purge valve shut, and, under control, each active back-pressure valve
/// opened just enough to hold the channel at the desired pressure.
struct Problem<'a> {
    model: &'a Model,
    drive: Drive,
    regulated: Vec<Side>,
    free: Vec<usize>,
    scale: Vec<f64>,
    rate: f64,
}

impl<'a> Problem<'a> {
    fn new(model: &'a Model, i: f64, rate: f64) -> Self {
        let op = &model.config.operating;
        let drive = Drive {
            i,
            phi_set: [op.phi_a_des, op.phi_c_des],
            purge_open: false,
        };
        let l = &model.layout;
        let mut regulated = Vec::new();
        if model.config.options.control {
            if !model.closed_anode() {
                regulated.push(Side::Anode);
            }
            regulated.push(Side::Cathode);
        }
        let mut pinned = model.frozen_slots();
        pinned.retain(|&s| !regulated.iter().any(|&side| l.a_bp(side) == s));
        let free = (0..model.dim()).filter(|s| !pinned.contains(s)).collect();
        Self {
            model,
            drive,
            regulated,
            free,
            scale: model.atol(1.0),
            rate,
        }
    }

    /// Relaxed right-hand side: the controller replaced by a continuous valve law.
    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let m = self.model;
        m.rhs(y, &self.drive, dy);
        if self.regulated.is_empty() {
            return;
        }
        let flows = m.flows(y, &self.drive);
        let p_des = m.config.operating.p_des;
        for &side in &self.regulated {
            let k = side as usize;
            dy[m.layout.a_bp(side)] =
                self.rate * m.a_bp_nominal[k] * (flows.side[k].p_gc - p_des) / p_des;
        }
    }

    /// Scaled derivatives of the free slots.
    fn residual(&self, y: &[f64], full: &mut [f64], out: &mut [f64]) -> bool {
        self.rhs(y, full);
        for (o, &s) in out.iter_mut().zip(&self.free) {
            *o = full[s] / self.scale[s];
        }
        out.iter().all(|v| v.is_finite())
    }

    fn jacobian(&self, y: &mut [f64], f: &[f64], jac: &mut DMatrix<f64>) -> bool {
        let n = self.free.len();
        let mut full = vec![0.0; y.len()];
        let mut f_trial = vec![0.0; n];
        for (c, &s) in self.free.iter().enumerate() {
            let h = (1e-8 * y[s].abs()).max(1e-8 * self.scale[s]);
            let keep = y[s];
            y[s] = keep + h;
            let ok = self.residual(y, &mut full, &mut f_trial);
            y[s] = keep;
            if !ok {
                return false;
            }
            for row in 0..n {
                jac[(row, c)] = (f_trial[row] - f[row]) / h * self.scale[s];
            }
        }
        true
    }

    /// Damped Newton iteration on the scaled derivatives.
    fn newton(&self, y0: &[f64], tol: f64, max_iter: usize) -> Option<Vec<f64>> {
        let n = self.free.len();
        let mut y = y0.to_vec();
        let mut full = vec![0.0; y.len()];
        let mut f = vec![0.0; n];
        let mut f_trial = vec![0.0; n];
        if !self.residual(&y, &mut full, &mut f) {
            return None;
        }
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let inf = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let mut merit = norm(&f);
        let mut jac = DMatrix::<f64>::zeros(n, n);
        let mut trial = y.clone();
        for _ in 0..max_iter {
            if inf(&f) < tol {
                return Some(y);
            }
            if !self.jacobian(&mut y, &f, &mut jac) {
                return None;
            }
            let delta = jac
                .clone()
                .lu()
                .solve(&DVector::from_iterator(n, f.iter().map(|v| -v)))?;
            if !delta.iter().all(|v| v.is_finite()) {
                return None;
            }
            let mut lambda = 1.0;
            loop {
                for (&s, d) in self.free.iter().zip(delta.iter()) {
                    trial[s] = y[s] + lambda * d * self.scale[s];
                }
                if self.residual(&trial, &mut full, &mut f_trial) {
                    let m = norm(&f_trial);
                    if m <= (1.0 - 1e-4 * lambda) * merit {
                        merit = m;
                        break;
                    }
                }
                lambda *= 0.5;
                if lambda < 1e-4 {
                    return None;
                }
            }
            y.copy_from_slice(&trial);
            f.copy_from_slice(&f_trial);
        }
        None
    }

    /// Integrates the relaxed dynamics over growing horizons, trying Newton
    /// after each one.
    fn settle(&self, y0: &[f64], opts: &SteadyOptions) -> Option<Vec<f64>> {
        let settings = SolverSettings {
            rtol: 1e-6,
            atol_per_slot: Some(self.scale.iter().map(|s| s * 1e-6).collect()),
            ..Default::default()
        };
        let mut bdf = Bdf::new(settings);
        let mut y = y0.to_vec();
        let mut t = 0.0;
        let mut horizon = opts.first_horizon;
        while horizon <= opts.max_horizon {
            let out = bdf
                .integrate(|_, y, dy| self.rhs(y, dy), &y, t, horizon, &[], Some(&[]))
                .ok()?;
            y = out.y_final;
            t = horizon;
            if let Some(ys) = self.newton(&y, opts.tol, opts.max_newton) {
                return Some(ys);
            }
            horizon *= 10.0;
        }
        None
    }
}

/// Steady state of the cell at current density `i` > 0, searched from `guess`
/// (or from the zero-current starting state).
pub fn steady_state(
    model: &Model,
    i: f64,
    guess: Option<&[f64]>,
    opts: &SteadyOptions,
) -> Result<Vec<f64>, DriverError> {
    if !(i > 0.0 && i.is_finite()) {
        return Err(DriverError::Invalid(format!(
            "steady states need a positive current density, got {i}"
        )));
    }
    if let Some(g) = guess {
        if g.len() != model.dim() {
            return Err(DriverError::Invalid("guess has the wrong length".into()));
        }
    }
    let problem = Problem::new(model, i, opts.relax_rate);
    if let Some(g) = guess {
        if let Some(y) = problem.newton(g, opts.tol, opts.max_newton) {
            return Ok(y);
        }
    }
    let start = guess
        .map(<[f64]>::to_vec)
        .unwrap_or_else(|| model.initial_state());
    problem
        .settle(&start, opts)
        .ok_or_else(|| DriverError::NoSteadyState {
            i,
            reason: "relaxation and Newton iteration did not converge".into(),
        })
}
