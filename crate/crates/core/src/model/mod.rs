//! Method-of-lines cell model: channel, GDL cells and catalyst layer on each
//! side, three membrane water nodes, and the 0D supply/exhaust manifolds.

mod account;
mod audit;
mod layout;

pub use account::{Account, SpeciesAccount};
pub use audit::{mass_audit, AuditError, SpeciesResidual, AUDIT_SPECIES};
pub use layout::{Side, StateLayout};

use crate::bop::{Actuation, Nozzle, PurgeSchedule};
use crate::config::{Auxiliaries, FuelCellConfig};
use crate::constants::Constants;
use crate::physics::{
    self, condensation_block, d_lambda, drag_coefficient, lambda_eq_with, medium_factor,
    phase_exchange_with, Diffusivities, InterfaceStates, PhysState, PhysicsError,
};

/// Time-dependent inputs the right-hand side needs besides the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drive {
    /// Current density, A·m⁻².
    pub i: f64,
    /// Humidifier setpoints, anode then cathode.
    pub phi_set: [f64; 2],
    pub purge_open: bool,
}

/// Molar flows across the system boundaries and between the 0D volumes, mol·s⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SideFlows {
    pub p_gc: f64,
    /// Compressor dry-gas inflow into the supply manifold.
    pub dry_in: f64,
    /// Vapor mole fraction in the supply manifold.
    pub x_v_sm: f64,
    pub sm_to_gc: f64,
    pub gc_to_em: f64,
    /// Exhaust manifold to ambient through the back-pressure valve.
    pub valve: f64,
    /// Channel to ambient through the purge valve.
    pub purge: f64,
    /// Channel mole fractions: vapor, reactant (H2 or O2), nitrogen.
    pub x_gc: [f64; 3],
    pub m_gc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Flows {
    pub side: [SideFlows; 2],
}

/// Per-area fluxes through one electrode, evaluated alongside the balances.
#[derive(Debug, Clone, Copy, Default)]
struct ElectrodeFluxes {
    /// Vapor entering the GDL from the channel.
    vapor_from_gc: f64,
    /// Liquid entering the GDL from the channel (negative when draining).
    liquid_from_gc: f64,
    /// Reactant transport resistance channel → CL, s·m⁻¹.
    reactant_resistance: f64,
}

#[derive(Clone)]
pub struct Model {
    pub config: FuelCellConfig,
    pub layout: StateLayout,
    pub consts: Constants,
    pub nozzle: Nozzle,
    pub purge: PurgeSchedule,
    /// Back-pressure valve area sized at the nominal current, m².
    pub a_bp_nominal: [f64; 2],
    pub a_bp_max: [f64; 2],
    t: f64,
    rt: f64,
    p_sat: f64,
    c_sat: f64,
    dx: f64,
    eps_cl: f64,
    d_free: Diffusivities,
    cap_gdl: f64,
    s_lim: f64,
    c_m: f64,
    rho_m: f64,
    v_gc: f64,
    m_dry: [f64; 2],
    closed_anode: bool,
}

impl Model {
    pub fn new(config: FuelCellConfig) -> Result<Self, PhysicsError> {
        Self::with_constants(config, Constants::standard().clone())
    }

    pub fn with_constants(config: FuelCellConfig, consts: Constants) -> Result<Self, PhysicsError> {
        let c = &consts;
        let op = &config.operating;
        let t = op.t_fc;
        let p_sat = physics::p_sat_with(c, t)?;
        let rt = c.r * t;
        let u = &config.undetermined;
        let g = &config.accessible;
        let eps_cl = 1.0 - u.eps_mc - c.eps_cl_solid;
        let nozzle = Nozzle {
            c_d: c.c_d,
            gamma: c.gamma_gas,
        };
        let cap = |eps: f64| {
            c.sigma_lw * c.theta_c.to_radians().cos().abs() / c.mu_l * (eps * c.k_gdl).sqrt()
        };
        let m_dry = [c.m_h2, c.m_air()];
        let closed_anode = config.options.auxiliaries == Auxiliaries::ClosedAnodeWithPurge;

        // valve areas passing the nominal inlet flow at the desired pressure
        let mut a_bp_nominal = [0.0; 2];
        let phi = [op.phi_a_des, op.phi_c_des];
        for side in Side::BOTH {
            let k = side as usize;
            let dry = Self::stoich_dry_flow(c, &config, side, c.i_valve_nominal);
            let x_v = (phi[k] * p_sat / op.p_des).min(0.99);
            let n = dry / (1.0 - x_v);
            let m = x_v * c.m_h2o + (1.0 - x_v) * m_dry[k];
            let unit = nozzle.molar_flow(1.0, op.p_des, c.p_amb, c.r, t, m);
            a_bp_nominal[k] = n / unit;
        }
        let ratio = config.control.a_bp_max_ratio;
        let purge = PurgeSchedule {
            enabled: config.options.purge,
            t_purge: config.computing.t_purge,
            delta_t_purge: config.computing.delta_t_purge,
            area: c.a_purge,
        };
        Ok(Self {
            layout: StateLayout::new(config.computing.n_gdl),
            nozzle,
            purge,
            a_bp_nominal,
            a_bp_max: a_bp_nominal.map(|a| a * ratio),
            t,
            rt,
            p_sat,
            c_sat: p_sat / rt,
            dx: g.h_gdl / config.computing.n_gdl as f64,
            eps_cl,
            d_free: Diffusivities::free(c, t, op.p_des),
            cap_gdl: cap(u.eps_gdl),
            s_lim: u.s_lim(op.p_des),
            c_m: c.c_mem(),
            rho_m: c.rho_l / c.m_h2o,
            v_gc: g.v_gc(),
            m_dry,
            closed_anode,
            consts,
            config,
        })
    }

    pub fn dim(&self) -> usize {
        self.layout.len()
    }

    pub fn temperature(&self) -> f64 {
        self.t
    }

    pub fn p_sat(&self) -> f64 {
        self.p_sat
    }

    pub fn c_sat(&self) -> f64 {
        self.c_sat
    }

    pub fn s_lim(&self) -> f64 {
        self.s_lim
    }

    pub fn closed_anode(&self) -> bool {
        self.closed_anode
    }

    /// Stoichiometric dry-gas demand at current density `i`, mol·s⁻¹.
    fn stoich_dry_flow(c: &Constants, cfg: &FuelCellConfig, side: Side, i: f64) -> f64 {
        let a = cfg.accessible.a_act;
        let op = &cfg.operating;
        match side {
            Side::Anode => op.s_a * i * a / (2.0 * c.f),
            Side::Cathode => op.s_c * i * a / (4.0 * c.f) / c.y_o2_air,
        }
    }

    /// Target compressor mass flow, kg·s⁻¹.
    pub fn inlet_target(&self, side: Side, i: f64, y: &[f64]) -> f64 {
        let c = &self.consts;
        let dry = if side == Side::Anode && self.closed_anode {
            // dead-ended anode: replace what reacts, plus a proportional pressure regulator
            let a = self.config.accessible.a_act;
            let p_sm = y[self.layout.p_sm(Side::Anode)];
            (i * a / (2.0 * c.f) + c.k_regulator * (self.config.operating.p_des - p_sm)).max(0.0)
        } else {
            Self::stoich_dry_flow(c, &self.config, side, i)
        };
        dry * self.m_dry[side as usize]
    }

    pub fn actuation(&self, y: &[f64], phi_set: [f64; 2]) -> Actuation {
        Actuation {
            a_bp: [
                y[self.layout.a_bp(Side::Anode)],
                y[self.layout.a_bp(Side::Cathode)],
            ],
            phi_set,
        }
    }

    /// Gas species in the channel: vapor, reactant, nitrogen (mol·m⁻³).
    fn channel_species(&self, side: Side, y: &[f64]) -> [f64; 3] {
        let l = &self.layout;
        let cv = y[l.cv_gc(side)].max(0.0);
        match side {
            Side::Anode => [cv, y[l.c_h2_gc()].max(0.0), 0.0],
            Side::Cathode => [cv, y[l.c_o2_gc()].max(0.0), y[l.c_n2_gc()].max(0.0)],
        }
    }

    fn reactant_molar_mass(&self, side: Side) -> f64 {
        match side {
            Side::Anode => self.consts.m_h2,
            Side::Cathode => self.consts.m_o2,
        }
    }

    pub fn flows(&self, y: &[f64], drive: &Drive) -> Flows {
        let c = &self.consts;
        let l = &self.layout;
        let mut out = Flows::default();
        for side in Side::BOTH {
            let k = side as usize;
            let amounts = self.channel_species(side, y);
            let total = (amounts[0] + amounts[1] + amounts[2]).max(1e-12);
            let x_gc = amounts.map(|v| v / total);
            let m_gc =
                x_gc[0] * c.m_h2o + x_gc[1] * self.reactant_molar_mass(side) + x_gc[2] * c.m_n2;
            let p_gc = total * self.rt;
            let p_sm = y[l.p_sm(side)];
            let phi = y[l.phi_sm(side)].clamp(0.0, 1.0);
            let x_v_sm = if p_sm > 0.0 {
                (phi * self.p_sat / p_sm).min(1.0)
            } else {
                0.0
            };
            let sm_to_gc = c.k_nozzle * (p_sm - p_gc).max(0.0);
            let has_outlet = !(side == Side::Anode && self.closed_anode);
            let (gc_to_em, valve) = if has_outlet {
                let p_em = y[l.p_em(side)];
                let a_bp = y[l.a_bp(side)].max(0.0);
                (
                    c.k_nozzle * (p_gc - p_em).max(0.0),
                    self.nozzle
                        .molar_flow(a_bp, p_em, c.p_amb, c.r, self.t, m_gc),
                )
            } else {
                (0.0, 0.0)
            };
            let purge = if side == Side::Anode && drive.purge_open {
                self.nozzle
                    .molar_flow(self.purge.area, p_gc, c.p_amb, c.r, self.t, m_gc)
            } else {
                0.0
            };
            out.side[k] = SideFlows {
                p_gc,
                dry_in: y[l.w_in(side)].max(0.0) / self.m_dry[k],
                x_v_sm,
                sm_to_gc,
                gc_to_em,
                valve,
                purge,
                x_gc,
                m_gc,
            };
        }
        out
    }

    fn phase(&self, c_v: f64, s: f64) -> f64 {
        let pe = phase_exchange_with(&self.consts, c_v, s, self.c_sat);
        if pe < 0.0 {
            pe * condensation_block(&self.consts, s, self.s_lim)
        } else {
            pe
        }
    }

    fn capillary(&self, s_mean: f64, pref: f64) -> f64 {
        let c = &self.consts;
        let s = s_mean.clamp(0.0, 1.0);
        let dj = c.leverett_j1 + s * (c.leverett_j2 + s * c.leverett_j3);
        pref * s.powf(self.config.undetermined.e_cap) * dj.abs()
    }

    fn sorption(&self, c_v_cl: f64, s_cl: f64, lambda: f64) -> f64 {
        let c = &self.consts;
        let u = &self.config.undetermined;
        let a_w = c_v_cl.max(0.0) / self.c_sat;
        let leq = lambda_eq_with(c, a_w, s_cl.max(0.0));
        c.gamma_sorp * self.c_m * u.eps_mc * self.config.accessible.h_cl * (leq - lambda)
    }

    /// Vapor, liquid and reactant transport through one GDL and its catalyst layer.
    fn electrode(&self, side: Side, y: &[f64], i: f64, dy: &mut [f64]) -> ElectrodeFluxes {
        let l = &self.layout;
        let c = &self.consts;
        let u = &self.config.undetermined;
        let n = l.n_gdl();
        let dx = self.dx;
        let h_cl = self.config.accessible.h_cl;
        let eps = u.eps_gdl;
        let (dv, dr) = match side {
            Side::Anode => (self.d_free.vapor_anode, self.d_free.h2),
            Side::Cathode => (self.d_free.vapor_cathode, self.d_free.o2),
        };
        let s_prop = |s: f64| s.clamp(0.0, 0.999);

        let cv_gc = y[l.cv_gc(side)];
        let s_cl = y[l.s_cl(side)];
        let cv_cl = y[l.cv_cl(side)];
        let f_cl = medium_factor(self.eps_cl, c.tau_cl, s_prop(s_cl));
        let mut reactant_resistance = h_cl / (2.0 * dr * f_cl);

        // walk the faces from the channel to the CL, carrying the previous cell
        let mut prev_cv = cv_gc;
        let mut prev_s = 0.0;
        let mut prev_d = f64::NAN;
        let mut flux_v_in = 0.0;
        let mut flux_l_in = 0.0;
        let mut out = ElectrodeFluxes::default();
        for k in 0..n {
            let cv = y[l.cv_gdl(side, k)];
            let s = y[l.s_gdl(side, k)];
            let f = medium_factor(eps, u.tau, s_prop(s));
            let d = dv * f;
            reactant_resistance += dx / (dr * f);
            let (jv, jl) = if k == 0 {
                (
                    d * (cv_gc - cv) / (0.5 * dx),
                    self.rho_m * self.capillary(0.5 * s, self.cap_gdl) * (0.0 - s) / (0.5 * dx),
                )
            } else {
                let dh = 2.0 * prev_d * d / (prev_d + d);
                (
                    dh * (prev_cv - cv) / dx,
                    self.rho_m * self.capillary(0.5 * (prev_s + s), self.cap_gdl) * (prev_s - s)
                        / dx,
                )
            };
            if k == 0 {
                out.vapor_from_gc = jv;
                out.liquid_from_gc = jl;
            } else {
                let idx = k - 1;
                let pe = self.phase(prev_cv, prev_s);
                dy[l.cv_gdl(side, idx)] = (flux_v_in - jv) / (eps * dx) + pe;
                dy[l.s_gdl(side, idx)] = ((flux_l_in - jl) / (eps * dx) - pe) / self.rho_m;
            }
            flux_v_in = jv;
            flux_l_in = jl;
            prev_cv = cv;
            prev_s = s;
            prev_d = d;
        }
        // last GDL cell → CL
        let d_cl = dv * f_cl;
        let jv = (prev_cv - cv_cl) / (0.5 * dx / prev_d + 0.5 * h_cl / d_cl);
        let jl = self.rho_m * self.capillary(0.5 * (prev_s + s_cl), self.cap_gdl) * (prev_s - s_cl)
            / (0.5 * dx + 0.5 * h_cl);
        let pe = self.phase(prev_cv, prev_s);
        dy[l.cv_gdl(side, n - 1)] = (flux_v_in - jv) / (eps * dx) + pe;
        dy[l.s_gdl(side, n - 1)] = ((flux_l_in - jl) / (eps * dx) - pe) / self.rho_m;

        // catalyst layer
        let lam = y[l.lambda(if side == Side::Anode { 0 } else { 2 })];
        let sorp = self.sorption(cv_cl, s_cl, lam);
        let prod = if side == Side::Cathode {
            i / (2.0 * c.f)
        } else {
            0.0
        };
        let pe_cl = self.phase(cv_cl, s_cl);
        let store = self.eps_cl * h_cl;
        dy[l.cv_cl(side)] = (jv - sorp + prod) / store + pe_cl;
        dy[l.s_cl(side)] = (jl / store - pe_cl) / self.rho_m;
        out.reactant_resistance = reactant_resistance;
        out
    }

    /// Interfacial sorption flux into the ionomer of one CL, mol·m⁻²·s⁻¹.
    pub fn sorption_flux(&self, side: Side, y: &[f64]) -> f64 {
        let l = &self.layout;
        let lam = y[l.lambda(if side == Side::Anode { 0 } else { 2 })];
        self.sorption(y[l.cv_cl(side)], y[l.s_cl(side)], lam)
    }

    /// Right-hand side: writes dy/dt for every slot.
    pub fn rhs(&self, y: &[f64], drive: &Drive, dy: &mut [f64]) {
        let l = &self.layout;
        let c = &self.consts;
        let g = &self.config.accessible;
        let u = &self.config.undetermined;
        let i = drive.i;
        let a_act = g.a_act;

        let fa = self.electrode(Side::Anode, y, i, dy);
        let fc = self.electrode(Side::Cathode, y, i, dy);

        // membrane water
        let lam = [y[l.lambda(0)], y[l.lambda(1)], y[l.lambda(2)]];
        let dist = 0.5 * (g.h_cl + g.h_mem);
        let mem_flux = |la: f64, lb: f64| {
            let mean = (0.5 * (la + lb)).max(0.0);
            drag_coefficient(c, mean) * i / c.f
                - self.c_m * d_lambda(c, mean, self.t) * (lb - la) / dist
        };
        let j_am = mem_flux(lam[0], lam[1]);
        let j_mc = mem_flux(lam[1], lam[2]);
        let sorp_a = self.sorption_flux(Side::Anode, y);
        let sorp_c = self.sorption_flux(Side::Cathode, y);
        let store_cl = self.c_m * u.eps_mc * g.h_cl;
        dy[l.lambda(0)] = (sorp_a - j_am) / store_cl;
        dy[l.lambda(1)] = (j_am - j_mc) / (self.c_m * g.h_mem);
        dy[l.lambda(2)] = (j_mc + sorp_c) / store_cl;

        // reactants at the catalyst layers
        let store_gas = self.eps_cl * g.h_cl;
        let j_h2 = (y[l.c_h2_gc()] - y[l.c_h2_cl()]) / fa.reactant_resistance;
        let j_o2 = (y[l.c_o2_gc()] - y[l.c_o2_cl()]) / fc.reactant_resistance;
        dy[l.c_h2_cl()] = (j_h2 - i / (2.0 * c.f)) / store_gas;
        dy[l.c_o2_cl()] = (j_o2 - i / (4.0 * c.f)) / store_gas;

        // channels and manifolds
        let flows = self.flows(y, drive);
        for side in Side::BOTH {
            let k = side as usize;
            let f = &flows.side[k];
            let ef = if side == Side::Anode { &fa } else { &fc };
            let out_gc = f.gc_to_em + f.purge;
            let cv_gc = y[l.cv_gc(side)];
            let condense = phase_exchange_with(c, cv_gc, 0.0, self.c_sat).min(0.0);
            dy[l.cv_gc(side)] =
                (f.sm_to_gc * f.x_v_sm - out_gc * f.x_gc[0] - a_act * ef.vapor_from_gc) / self.v_gc
                    + condense;
            let dry_gc = f.sm_to_gc * (1.0 - f.x_v_sm);
            match side {
                Side::Anode => {
                    dy[l.c_h2_gc()] = (dry_gc - out_gc * f.x_gc[1] - a_act * j_h2) / self.v_gc;
                }
                Side::Cathode => {
                    let y_o2 = c.y_o2_air;
                    dy[l.c_o2_gc()] =
                        (dry_gc * y_o2 - out_gc * f.x_gc[1] - a_act * j_o2) / self.v_gc;
                    dy[l.c_n2_gc()] = (dry_gc * (1.0 - y_o2) - out_gc * f.x_gc[2]) / self.v_gc;
                }
            }

            let phi = y[l.phi_sm(side)];
            let dphi = (drive.phi_set[k] - phi) / c.tau_hum;
            dy[l.phi_sm(side)] = dphi;
            let v_sm = if side == Side::Anode {
                g.v_sm_a
            } else {
                g.v_sm_c
            };
            dy[l.p_sm(side)] =
                self.rt / v_sm * (f.dry_in - (1.0 - f.x_v_sm) * f.sm_to_gc) + self.p_sat * dphi;
            let w = y[l.w_in(side)];
            dy[l.w_in(side)] = (self.inlet_target(side, i, y) - w) / c.tau_act;
            let v_em = if side == Side::Anode {
                g.v_em_a
            } else {
                g.v_em_c
            };
            dy[l.p_em(side)] = if side == Side::Anode && self.closed_anode {
                0.0
            } else {
                self.rt / v_em * (f.gc_to_em - f.valve)
            };
            dy[l.a_bp(side)] = 0.0;
        }
    }

    pub fn interface_states(&self, y: &[f64]) -> InterfaceStates {
        let l = &self.layout;
        let node = |side: Side, lam: usize, c_h2: f64, c_o2: f64| PhysState {
            c_v: y[l.cv_cl(side)],
            s: y[l.s_cl(side)],
            lambda_m: y[l.lambda(lam)],
            c_h2,
            c_o2,
            t: self.t,
        };
        InterfaceStates {
            anode_cl: node(Side::Anode, 0, y[l.c_h2_cl()], 0.0),
            cathode_cl: node(Side::Cathode, 2, 0.0, y[l.c_o2_cl()]),
            lambda_mem: 0.25 * (y[l.lambda(0)] + 2.0 * y[l.lambda(1)] + y[l.lambda(2)]),
        }
    }

    pub fn voltage(&self, y: &[f64], i: f64) -> Result<f64, PhysicsError> {
        physics::cell_voltage_with(
            &self.consts,
            i,
            &self.interface_states(y),
            &self.config.undetermined,
            self.config.accessible.h_mem,
            self.t,
        )
    }

    /// Zero-current state with one water activity everywhere, closed valves and no flow.
    pub fn uniform_state(&self, a_w: f64) -> Vec<f64> {
        self.state_with_activity([a_w, a_w], false)
    }

    /// Zero-current state at the desired inlet humidities with closed valves.
    pub fn rest_state(&self) -> Vec<f64> {
        let op = &self.config.operating;
        self.state_with_activity([op.phi_a_des, op.phi_c_des], false)
    }

    /// Zero-current starting state at the desired inlet humidities with nominal valve areas.
    pub fn initial_state(&self) -> Vec<f64> {
        let op = &self.config.operating;
        self.state_with_activity([op.phi_a_des, op.phi_c_des], true)
    }

    fn state_with_activity(&self, a: [f64; 2], open_valves: bool) -> Vec<f64> {
        let l = &self.layout;
        let c = &self.consts;
        let p = self.config.operating.p_des;
        let mut y = vec![0.0; l.len()];
        for side in Side::BOTH {
            let k = side as usize;
            let cv = a[k] * self.c_sat;
            y[l.cv_gc(side)] = cv;
            y[l.cv_cl(side)] = cv;
            for j in 0..l.n_gdl() {
                y[l.cv_gdl(side, j)] = cv;
            }
            y[l.p_sm(side)] = p;
            y[l.p_em(side)] = p;
            y[l.phi_sm(side)] = a[k];
            y[l.a_bp(side)] = if open_valves && !(side == Side::Anode && self.closed_anode) {
                self.a_bp_nominal[k]
            } else {
                0.0
            };
        }
        let dry_a = (p - a[0] * self.p_sat) / self.rt;
        let dry_c = (p - a[1] * self.p_sat) / self.rt;
        y[l.c_h2_gc()] = dry_a;
        y[l.c_h2_cl()] = dry_a;
        y[l.c_o2_gc()] = dry_c * c.y_o2_air;
        y[l.c_o2_cl()] = dry_c * c.y_o2_air;
        y[l.c_n2_gc()] = dry_c * (1.0 - c.y_o2_air);
        let la = lambda_eq_with(c, a[0], 0.0);
        let lc = lambda_eq_with(c, a[1], 0.0);
        y[l.lambda(0)] = la;
        y[l.lambda(2)] = lc;
        y[l.lambda(1)] = 0.5 * (la + lc);
        y
    }

    /// Slots whose derivative is identically zero for this configuration.
    pub fn frozen_slots(&self) -> Vec<usize> {
        let l = &self.layout;
        let mut v = vec![l.a_bp(Side::Anode), l.a_bp(Side::Cathode)];
        if self.closed_anode {
            v.push(l.p_em(Side::Anode));
        }
        v
    }

    /// Per-slot absolute tolerances scaled to each variable's natural magnitude.
    pub fn atol(&self, rel: f64) -> Vec<f64> {
        let l = &self.layout;
        let p = self.config.operating.p_des;
        let c_gas = p / self.rt;
        let mut v = vec![rel * self.c_sat; l.len()];
        for side in Side::BOTH {
            for j in 0..l.n_gdl() {
                v[l.s_gdl(side, j)] = rel;
            }
            v[l.s_cl(side)] = rel;
            v[l.p_sm(side)] = rel * p;
            v[l.p_em(side)] = rel * p;
            v[l.phi_sm(side)] = rel;
            let w_scale = self.inlet_target(side, self.consts.i_valve_nominal, &vec![p; l.len()]);
            v[l.w_in(side)] = rel * w_scale.max(1e-12);
            v[l.a_bp(side)] = rel * self.a_bp_nominal[side as usize].max(1e-12);
        }
        for k in 0..3 {
            v[l.lambda(k)] = rel * 10.0;
        }
        for s in [
            l.c_h2_gc(),
            l.c_h2_cl(),
            l.c_o2_gc(),
            l.c_o2_cl(),
            l.c_n2_gc(),
        ] {
            v[s] = rel * c_gas;
        }
        v
    }
}
