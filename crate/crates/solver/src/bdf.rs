use nalgebra::{DMatrix, DVector, LU};

use crate::dense::DenseSegment;
use crate::event::{Event, EventRecord};
use crate::{SolverError, SolverSettings, MAX_ORDER};

const NEWTON_MAXITER: usize = 4;
const MAX_JAC_REFRESH: usize = 2;
const MIN_FACTOR: f64 = 0.1;
const MAX_FACTOR: f64 = 10.0;
const SAFETY: f64 = 0.9;
const ROWS: usize = MAX_ORDER + 3;

/// Counters accumulated over an integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub newton_iters: usize,
    pub jac_evals: usize,
    pub lu_decomps: usize,
}

impl std::ops::AddAssign for StepStats {
    fn add_assign(&mut self, o: Self) {
        self.steps += o.steps;
        self.rejected += o.rejected;
        self.rhs_evals += o.rhs_evals;
        self.newton_iters += o.newton_iters;
        self.jac_evals += o.jac_evals;
        self.lu_decomps += o.lu_decomps;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    Event { index: usize, t: f64 },
}

#[derive(Debug, Clone)]
pub struct IntegrationOutput {
    /// Sample times: the requested ones, or every accepted step.
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub t_final: f64,
    pub y_final: Vec<f64>,
    pub stats: StepStats,
    pub termination: Termination,
    /// Non-terminal crossings located during the run, plus the terminal one.
    pub events: Vec<EventRecord>,
    pub last_step: f64,
    pub last_order: usize,
}

/// A BDF integrator that keeps its Jacobian and step size between calls,
/// so a run split into segments (at discrete control updates, say) restarts
/// at order one without re-deriving the step scale from scratch.
pub struct Bdf {
    settings: SolverSettings,
    jac: Option<DMatrix<f64>>,
    last_step: Option<f64>,
    stats: StepStats,
}

struct Coefficients {
    gamma: [f64; MAX_ORDER + 2],
    alpha: [f64; MAX_ORDER + 2],
    error_const: [f64; MAX_ORDER + 2],
}

impl Coefficients {
    fn new() -> Self {
        let mut gamma = [0.0; MAX_ORDER + 2];
        for k in 1..MAX_ORDER + 2 {
            gamma[k] = gamma[k - 1] + 1.0 / k as f64;
        }
        let mut error_const = [0.0; MAX_ORDER + 2];
        for (k, e) in error_const.iter_mut().enumerate() {
            *e = 1.0 / (k + 1) as f64;
        }
        Self {
            gamma,
            alpha: gamma,
            error_const,
        }
    }
}

fn rms_norm(x: &[f64], scale: &[f64]) -> f64 {
    let s: f64 = x.iter().zip(scale).map(|(a, b)| (a / b).powi(2)).sum();
    (s / x.len().max(1) as f64).sqrt()
}

fn compute_r(order: usize, factor: f64) -> Vec<f64> {
    let m = order + 1;
    let mut mat = vec![0.0; m * m];
    for j in 0..m {
        mat[j] = 1.0;
    }
    for i in 1..m {
        for j in 1..m {
            mat[i * m + j] = (i as f64 - 1.0 - factor * j as f64) / i as f64;
        }
    }
    for i in 1..m {
        for j in 0..m {
            mat[i * m + j] *= mat[(i - 1) * m + j];
        }
    }
    mat
}

/// Rescale the difference array for a step-size change by `factor`.
fn change_d(d: &mut [f64], n: usize, order: usize, factor: f64) {
    let m = order + 1;
    let r = compute_r(order, factor);
    let u = compute_r(order, 1.0);
    let mut ru = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let mut s = 0.0;
            for k in 0..m {
                s += r[i * m + k] * u[k * m + j];
            }
            ru[i * m + j] = s;
        }
    }
    let old = d[..m * n].to_vec();
    for i in 0..m {
        let row = &mut d[i * n..(i + 1) * n];
        row.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..m {
            let w = ru[k * m + i];
            if w != 0.0 {
                for (v, o) in row.iter_mut().zip(&old[k * n..(k + 1) * n]) {
                    *v += w * o;
                }
            }
        }
    }
}

fn first_bad(v: &[f64]) -> Option<usize> {
    v.iter().position(|x| !x.is_finite())
}

struct Workspace<'f, F> {
    rhs: &'f mut F,
    n: usize,
    stats: StepStats,
    f: Vec<f64>,
    tmp: Vec<f64>,
}

impl<'f, F: FnMut(f64, &[f64], &mut [f64])> Workspace<'f, F> {
    fn eval(&mut self, t: f64, y: &[f64]) -> bool {
        self.stats.rhs_evals += 1;
        (self.rhs)(t, y, &mut self.f);
        first_bad(&self.f).is_none()
    }

    /// Forward-difference Jacobian with column perturbation max(1e-8, 1e-8·|y_j|).
    fn jacobian(&mut self, t: f64, y: &[f64]) -> Option<DMatrix<f64>> {
        self.stats.jac_evals += 1;
        if !self.eval(t, y) {
            return None;
        }
        let f0 = self.f.clone();
        let mut jac = DMatrix::zeros(self.n, self.n);
        let mut yp = y.to_vec();
        for j in 0..self.n {
            let delta = (1e-8 * y[j].abs()).max(1e-8);
            yp[j] = y[j] + delta;
            let step = yp[j] - y[j];
            if !self.eval(t, &yp) {
                return None;
            }
            for i in 0..self.n {
                jac[(i, j)] = (self.f[i] - f0[i]) / step;
            }
            yp[j] = y[j];
        }
        Some(jac)
    }

    fn factor(&mut self, jac: &DMatrix<f64>, c: f64) -> LU<f64, nalgebra::Dyn, nalgebra::Dyn> {
        self.stats.lu_decomps += 1;
        let mut m = jac * (-c);
        for i in 0..self.n {
            m[(i, i)] += 1.0;
        }
        m.lu()
    }
}

impl Bdf {
    pub fn new(settings: SolverSettings) -> Self {
        Self {
            settings,
            jac: None,
            last_step: None,
            stats: StepStats::default(),
        }
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    /// Cumulative counters over every call on this instance.
    pub fn stats(&self) -> StepStats {
        self.stats
    }

    /// Drop the cached Jacobian and step size.
    pub fn reset(&mut self) {
        self.jac = None;
        self.last_step = None;
    }

    /// Integrate from `t0` to `tf`, stopping early at the first terminal event.
    ///
    /// With `samples`, the output holds the states at those times (those
    /// inside the integrated interval); otherwise it holds every accepted step.
    pub fn integrate<F>(
        &mut self,
        mut rhs: F,
        y0: &[f64],
        t0: f64,
        tf: f64,
        events: &[Event<'_>],
        samples: Option<&[f64]>,
    ) -> Result<IntegrationOutput, SolverError>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y0.len();
        self.settings.validate(n)?;
        if !(tf > t0) {
            return Err(SolverError::InvalidSettings(format!(
                "t_span must satisfy t0 < tf, got [{t0}, {tf}]"
            )));
        }
        if let Some(j) = &self.jac {
            if j.nrows() != n {
                self.jac = None;
            }
        }
        let settings = self.settings.clone();
        let rtol = settings.rtol;
        let atol: Vec<f64> = (0..n).map(|i| settings.atol_at(i)).collect();
        let span = tf - t0;
        let coef = Coefficients::new();
        let newton_tol = (10.0 * f64::EPSILON / rtol).max(0.03f64.min(rtol.sqrt()));

        let mut ws = Workspace {
            rhs: &mut rhs,
            n,
            stats: StepStats::default(),
            f: vec![0.0; n],
            tmp: vec![0.0; n],
        };

        if !ws.eval(t0, y0) {
            let slot = first_bad(&ws.f).unwrap_or(0);
            self.stats += ws.stats;
            return Err(SolverError::NonFiniteDerivative { slot, t: t0 });
        }
        let f0 = ws.f.clone();

        let mut h_abs = match (settings.initial_step, self.last_step) {
            (Some(h), _) => h,
            (None, Some(h)) => h,
            (None, None) => select_initial_step(&mut ws, t0, y0, &f0, span, rtol, &atol),
        };
        h_abs = h_abs.min(settings.max_step).min(span);
        let min_step_floor = 1e-14 * span;

        let mut current_jac = self.jac.is_none();
        let mut jac = match self.jac.take() {
            Some(j) => j,
            None => match ws.jacobian(t0, y0) {
                Some(j) => j,
                None => {
                    let slot = first_bad(&ws.f).unwrap_or(0);
                    self.stats += ws.stats;
                    return Err(SolverError::NonFiniteDerivative { slot, t: t0 });
                }
            },
        };

        let mut d = vec![0.0; ROWS * n];
        d[..n].copy_from_slice(y0);
        for i in 0..n {
            d[n + i] = f0[i] * h_abs;
        }
        let mut order = 1usize;
        let mut n_equal_steps = 0usize;
        let mut t = t0;
        let mut lu: Option<LU<f64, nalgebra::Dyn, nalgebra::Dyn>> = None;
        let mut lu_c = f64::NAN;

        let mut times = Vec::new();
        let mut states = Vec::new();
        let sample_list: Vec<f64> = samples
            .map(|s| s.iter().copied().filter(|&x| x >= t0 && x <= tf).collect())
            .unwrap_or_default();
        let mut next_sample = 0usize;
        if samples.is_none() {
            times.push(t0);
            states.push(y0.to_vec());
        } else {
            while next_sample < sample_list.len() && sample_list[next_sample] <= t0 {
                times.push(sample_list[next_sample]);
                states.push(y0.to_vec());
                next_sample += 1;
            }
        }

        let mut g_old: Vec<f64> = events.iter().map(|e| e.value(t0, y0)).collect();
        let mut event_log = Vec::new();
        let mut termination = Termination::Completed;

        let mut y_predict = vec![0.0; n];
        let mut psi = vec![0.0; n];
        let mut scale = vec![0.0; n];
        let mut y_new = vec![0.0; n];
        let mut dcorr = vec![0.0; n];

        loop {
            if t >= tf {
                break;
            }
            let min_step = (10.0 * (next_up(t) - t)).max(min_step_floor);
            if h_abs > settings.max_step {
                change_d(&mut d, n, order, settings.max_step / h_abs);
                h_abs = settings.max_step;
                n_equal_steps = 0;
                lu = None;
            } else if h_abs < min_step {
                change_d(&mut d, n, order, min_step / h_abs);
                h_abs = min_step;
                n_equal_steps = 0;
                lu = None;
            }

            let mut refreshes = 0usize;
            let t_new;
            let error_norm;
            let safety;
            loop {
                if h_abs < min_step {
                    self.stats += ws.stats;
                    return Err(SolverError::StepSizeUnderflow {
                        t,
                        step: h_abs,
                        min_step,
                    });
                }
                let mut tn = t + h_abs;
                if tn > tf {
                    tn = tf;
                    change_d(&mut d, n, order, (tn - t) / h_abs);
                    n_equal_steps = 0;
                    lu = None;
                }
                let h = tn - t;
                h_abs = h;

                for i in 0..n {
                    let mut s = 0.0;
                    for k in 0..=order {
                        s += d[k * n + i];
                    }
                    y_predict[i] = s;
                    scale[i] = atol[i] + rtol * s.abs();
                    let mut p = 0.0;
                    for k in 1..=order {
                        p += coef.gamma[k] * d[k * n + i];
                    }
                    psi[i] = p / coef.alpha[order];
                }
                let c = h / coef.alpha[order];

                let mut converged;
                let mut n_iter;
                loop {
                    if lu.is_none() || lu_c != c {
                        lu = Some(ws.factor(&jac, c));
                        lu_c = c;
                    }
                    let res = newton(
                        &mut ws,
                        tn,
                        &y_predict,
                        c,
                        &psi,
                        lu.as_ref().unwrap(),
                        &scale,
                        newton_tol,
                        &mut y_new,
                        &mut dcorr,
                    );
                    converged = res.0;
                    n_iter = res.1;
                    if converged || current_jac || refreshes >= MAX_JAC_REFRESH {
                        break;
                    }
                    match ws.jacobian(tn, &y_predict) {
                        Some(j) => jac = j,
                        None => break,
                    }
                    refreshes += 1;
                    current_jac = true;
                    lu = None;
                }

                if !converged {
                    ws.stats.rejected += 1;
                    if h_abs * 0.5 < min_step && refreshes > 0 {
                        self.stats += ws.stats;
                        return Err(SolverError::NewtonDivergence { t });
                    }
                    h_abs *= 0.5;
                    change_d(&mut d, n, order, 0.5);
                    n_equal_steps = 0;
                    lu = None;
                    continue;
                }

                let sf =
                    SAFETY * (2 * NEWTON_MAXITER + 1) as f64 / (2 * NEWTON_MAXITER + n_iter) as f64;
                for i in 0..n {
                    scale[i] = atol[i] + rtol * y_new[i].abs();
                    ws.tmp[i] = coef.error_const[order] * dcorr[i];
                }
                let en = rms_norm(&ws.tmp, &scale);
                if en > 1.0 {
                    ws.stats.rejected += 1;
                    let factor = (sf * en.powf(-1.0 / (order as f64 + 1.0))).max(MIN_FACTOR);
                    h_abs *= factor;
                    change_d(&mut d, n, order, factor);
                    n_equal_steps = 0;
                    lu = None;
                    continue;
                }
                t_new = tn;
                error_norm = en;
                safety = sf;
                break;
            }

            // accepted
            ws.stats.steps += 1;
            n_equal_steps += 1;
            let t_old = t;
            t = t_new;
            for i in 0..n {
                d[(order + 2) * n + i] = dcorr[i] - d[(order + 1) * n + i];
                d[(order + 1) * n + i] = dcorr[i];
            }
            for k in (0..=order).rev() {
                for i in 0..n {
                    d[k * n + i] += d[(k + 1) * n + i];
                }
            }
            current_jac = false;

            let seg = DenseSegment::new(t_old, t, h_abs, order, n, &d);
            let y_now = &d[..n];

            // events
            let mut earliest: Option<(usize, f64)> = None;
            let mut g_new = Vec::with_capacity(events.len());
            for (idx, ev) in events.iter().enumerate() {
                let g = ev.value(t, y_now);
                g_new.push(g);
                if ev.crossed(g_old[idx], g) {
                    let root = locate_root(ev, &seg, t_old, t, g_old[idx], g, 1e-9 * span);
                    if ev.terminal {
                        if earliest.map_or(true, |(_, te)| root < te) {
                            earliest = Some((idx, root));
                        }
                    } else {
                        event_log.push(EventRecord {
                            index: idx,
                            t: root,
                            y: seg.eval(root),
                        });
                    }
                }
            }
            g_old = g_new;

            let t_stop = earliest.map_or(t, |(_, te)| te);
            if samples.is_some() {
                while next_sample < sample_list.len() && sample_list[next_sample] <= t_stop {
                    let ts = sample_list[next_sample];
                    times.push(ts);
                    states.push(if ts == t {
                        y_now.to_vec()
                    } else {
                        seg.eval(ts)
                    });
                    next_sample += 1;
                }
            }

            if let Some((idx, te)) = earliest {
                let ye = seg.eval(te);
                if samples.is_none() {
                    times.push(te);
                    states.push(ye.clone());
                }
                event_log.retain(|r| r.t <= te);
                event_log.push(EventRecord {
                    index: idx,
                    t: te,
                    y: ye.clone(),
                });
                termination = Termination::Event { index: idx, t: te };
                self.finish(jac, h_abs, ws.stats);
                return Ok(IntegrationOutput {
                    times,
                    states,
                    t_final: te,
                    y_final: ye,
                    stats: ws.stats,
                    termination,
                    events: event_log,
                    last_step: h_abs,
                    last_order: order,
                });
            }
            if samples.is_none() {
                times.push(t);
                states.push(y_now.to_vec());
            }

            if n_equal_steps < order + 1 {
                continue;
            }

            let em = if order > 1 {
                for i in 0..n {
                    ws.tmp[i] = coef.error_const[order - 1] * d[order * n + i];
                }
                rms_norm(&ws.tmp, &scale)
            } else {
                f64::INFINITY
            };
            let ep = if order < settings.max_order {
                for i in 0..n {
                    ws.tmp[i] = coef.error_const[order + 1] * d[(order + 2) * n + i];
                }
                rms_norm(&ws.tmp, &scale)
            } else {
                f64::INFINITY
            };
            let norms = [em, error_norm, ep];
            let mut best = 0usize;
            let mut best_factor = f64::NEG_INFINITY;
            for (k, en) in norms.iter().enumerate() {
                let p = (order + k) as f64;
                let f = if *en == 0.0 {
                    f64::INFINITY
                } else if en.is_infinite() || p == 0.0 {
                    0.0
                } else {
                    en.powf(-1.0 / p)
                };
                if f > best_factor {
                    best_factor = f;
                    best = k;
                }
            }
            order = (order as isize + best as isize - 1) as usize;
            let factor = (safety * best_factor).min(MAX_FACTOR);
            h_abs *= factor;
            change_d(&mut d, n, order, factor);
            n_equal_steps = 0;
            lu = None;
        }

        let y_final = d[..n].to_vec();
        self.finish(jac, h_abs, ws.stats);
        Ok(IntegrationOutput {
            times,
            states,
            t_final: t,
            y_final,
            stats: ws.stats,
            termination,
            events: event_log,
            last_step: h_abs,
            last_order: order,
        })
    }

    fn finish(&mut self, jac: DMatrix<f64>, h_abs: f64, stats: StepStats) {
        self.jac = Some(jac);
        self.last_step = Some(h_abs);
        self.stats += stats;
    }
}

fn next_up(t: f64) -> f64 {
    if t.is_nan() || t == f64::INFINITY {
        return t;
    }
    if t == 0.0 {
        return f64::from_bits(1);
    }
    let bits = t.to_bits();
    if t > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}

fn select_initial_step<F: FnMut(f64, &[f64], &mut [f64])>(
    ws: &mut Workspace<'_, F>,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    span: f64,
    rtol: f64,
    atol: &[f64],
) -> f64 {
    let n = y0.len();
    let scale: Vec<f64> = (0..n).map(|i| atol[i] + y0[i].abs() * rtol).collect();
    let d0 = rms_norm(y0, &scale);
    let d1 = rms_norm(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span);
    let y1: Vec<f64> = (0..n).map(|i| y0[i] + h0 * f0[i]).collect();
    if !ws.eval(t0 + h0, &y1) {
        return h0;
    }
    let diff: Vec<f64> = (0..n).map(|i| ws.f[i] - f0[i]).collect();
    let d2 = rms_norm(&diff, &scale) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.5)
    };
    (100.0 * h0).min(h1).min(span)
}

#[allow(clippy::too_many_arguments)]
fn newton<F: FnMut(f64, &[f64], &mut [f64])>(
    ws: &mut Workspace<'_, F>,
    t_new: f64,
    y_predict: &[f64],
    c: f64,
    psi: &[f64],
    lu: &LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    scale: &[f64],
    tol: f64,
    y: &mut [f64],
    d: &mut [f64],
) -> (bool, usize) {
    let n = y.len();
    y.copy_from_slice(y_predict);
    d.iter_mut().for_each(|v| *v = 0.0);
    let mut dy_norm_old: Option<f64> = None;
    let mut rhs_vec = DVector::zeros(n);
    let mut iters = 0;
    for k in 0..NEWTON_MAXITER {
        iters = k + 1;
        ws.stats.newton_iters += 1;
        if !ws.eval(t_new, y) {
            return (false, iters);
        }
        for i in 0..n {
            rhs_vec[i] = c * ws.f[i] - psi[i] - d[i];
        }
        if !lu.solve_mut(&mut rhs_vec) {
            return (false, iters);
        }
        let mut acc = 0.0;
        for i in 0..n {
            acc += (rhs_vec[i] / scale[i]).powi(2);
        }
        let dy_norm = (acc / n as f64).sqrt();
        let rate = dy_norm_old.map(|old| dy_norm / old);
        if let Some(r) = rate {
            if r >= 1.0 || r.powi((NEWTON_MAXITER - k) as i32) / (1.0 - r) * dy_norm > tol {
                return (false, iters);
            }
        }
        for i in 0..n {
            y[i] += rhs_vec[i];
            d[i] += rhs_vec[i];
        }
        if dy_norm == 0.0 || rate.is_some_and(|r| r / (1.0 - r) * dy_norm < tol) {
            return (true, iters);
        }
        dy_norm_old = Some(dy_norm);
    }
    (false, iters)
}

/// Illinois-modified regula falsi on the dense output.
fn locate_root(
    ev: &Event<'_>,
    seg: &DenseSegment,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
) -> f64 {
    if fb == 0.0 {
        return b;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let fx = ev.value(x, &seg.eval(x));
        if fx == 0.0 {
            return x;
        }
        if (fx > 0.0) == (fb > 0.0) {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    b
}

/// One-shot integration with a fresh integrator.
pub fn integrate<F>(
    rhs: F,
    y0: &[f64],
    t_span: (f64, f64),
    settings: &SolverSettings,
    events: &[Event<'_>],
) -> Result<IntegrationOutput, SolverError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    Bdf::new(settings.clone()).integrate(rhs, y0, t_span.0, t_span.1, events, None)
}

/// Fixed-step, fixed-order BDF for verification.
///
/// `history[j]` is the state at `t0 - j·h` for `j = 0..=order`; the Newton
/// iteration is driven to round-off on every step.
pub fn integrate_fixed<F>(
    mut rhs: F,
    history: &[Vec<f64>],
    t0: f64,
    h: f64,
    steps: usize,
    order: usize,
) -> Result<Vec<f64>, SolverError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(SolverError::InvalidSettings(format!(
            "order {order} out of range"
        )));
    }
    if history.len() < order + 1 {
        return Err(SolverError::InvalidSettings(format!(
            "BDF-{order} needs {} history states, got {}",
            order + 1,
            history.len()
        )));
    }
    let n = history[0].len();
    let coef = Coefficients::new();
    let mut ws = Workspace {
        rhs: &mut rhs,
        n,
        stats: StepStats::default(),
        f: vec![0.0; n],
        tmp: vec![0.0; n],
    };

    // backward differences of the supplied history
    let mut d = vec![0.0; ROWS * n];
    let mut diffs: Vec<Vec<f64>> = history[..=order].to_vec();
    for k in 0..=order {
        d[k * n..(k + 1) * n].copy_from_slice(&diffs[0]);
        let next: Vec<Vec<f64>> = (0..diffs.len().saturating_sub(1))
            .map(|j| (0..n).map(|i| diffs[j][i] - diffs[j + 1][i]).collect())
            .collect();
        diffs = next;
    }

    let c = h / coef.alpha[order];
    let mut t = t0;
    let mut y = vec![0.0; n];
    let mut dc = vec![0.0; n];
    for _ in 0..steps {
        let t_new = t + h;
        let mut y_predict = vec![0.0; n];
        let mut psi = vec![0.0; n];
        for i in 0..n {
            for k in 0..=order {
                y_predict[i] += d[k * n + i];
            }
            for k in 1..=order {
                psi[i] += coef.gamma[k] * d[k * n + i];
            }
            psi[i] /= coef.alpha[order];
        }
        let jac = ws
            .jacobian(t_new, &y_predict)
            .ok_or(SolverError::NonFiniteDerivative { slot: 0, t: t_new })?;
        let lu = ws.factor(&jac, c);
        y.copy_from_slice(&y_predict);
        dc.iter_mut().for_each(|v| *v = 0.0);
        let mut converged = false;
        for _ in 0..50 {
            if !ws.eval(t_new, &y) {
                let slot = first_bad(&ws.f).unwrap_or(0);
                return Err(SolverError::NonFiniteDerivative { slot, t: t_new });
            }
            let mut r = DVector::from_iterator(n, (0..n).map(|i| c * ws.f[i] - psi[i] - dc[i]));
            if !lu.solve_mut(&mut r) {
                return Err(SolverError::NewtonDivergence { t: t_new });
            }
            let ymax = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let step = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..n {
                y[i] += r[i];
                dc[i] += r[i];
            }
            if step <= 1e-15 * ymax {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(SolverError::NewtonDivergence { t: t_new });
        }
        for i in 0..n {
            d[(order + 2) * n + i] = dc[i] - d[(order + 1) * n + i];
            d[(order + 1) * n + i] = dc[i];
        }
        for k in (0..=order).rev() {
            for i in 0..n {
                d[k * n + i] += d[(k + 1) * n + i];
            }
        }
        t = t_new;
    }
    Ok(d[..n].to_vec())
}
