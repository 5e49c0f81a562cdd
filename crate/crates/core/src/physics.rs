//! Scalar property correlations and the cell voltage model.
//!
//! Every function is pure. The `_with` variants take an explicit constants
//! table; the plain ones use [`Constants::standard`].

use thiserror::Error;

use crate::config::UndeterminedParameters;
use crate::constants::Constants;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("{quantity} = {value} outside the correlation range [{lo}, {hi}]")]
    Domain {
        quantity: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("voltage collapse: cathode O2 concentration {c_o2:.3e} mol/m³ at or below the floor")]
    VoltageCollapse { c_o2: f64 },
}

/// Local state at one node.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhysState {
    pub c_v: f64,
    pub s: f64,
    pub lambda_m: f64,
    pub c_h2: f64,
    pub c_o2: f64,
    pub t: f64,
}

/// What the voltage model sees: both catalyst layers and the mean membrane water content.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InterfaceStates {
    pub anode_cl: PhysState,
    pub cathode_cl: PhysState,
    pub lambda_mem: f64,
}

pub fn p_sat(t: f64) -> Result<f64, PhysicsError> {
    p_sat_with(Constants::standard(), t)
}

pub fn p_sat_with(c: &Constants, t: f64) -> Result<f64, PhysicsError> {
    if !(t > c.psat_t_min && t < c.psat_t_max) {
        return Err(PhysicsError::Domain {
            quantity: "T",
            value: t,
            lo: c.psat_t_min,
            hi: c.psat_t_max,
        });
    }
    Ok(p_sat_raw(c, t))
}

/// Unchecked saturation pressure, Pa.
pub(crate) fn p_sat_raw(c: &Constants, t: f64) -> f64 {
    let tc = t - 273.15;
    let log10_bar = c.psat_c0 + tc * (c.psat_c1 + tc * (c.psat_c2 + tc * c.psat_c3));
    1e5 * 10f64.powf(log10_bar)
}

/// Saturated vapor concentration, mol·m⁻³.
pub fn c_sat(t: f64) -> Result<f64, PhysicsError> {
    let c = Constants::standard();
    Ok(p_sat_with(c, t)? / (c.r * t))
}

pub fn lambda_eq(a_w: f64, s: f64) -> f64 {
    lambda_eq_with(Constants::standard(), a_w, s)
}

/// Sorption isotherm with the liquid-equilibrated blend near unit activity.
pub fn lambda_eq_with(c: &Constants, a_w: f64, s: f64) -> f64 {
    let a = a_w.clamp(0.0, 1.0);
    let cubic = c.lam_c0 + a * (c.lam_c1 + a * (c.lam_c2 + a * c.lam_c3));
    let x = ((a - (1.0 - c.lam_blend_width)) / c.lam_blend_width).clamp(0.0, 1.0);
    let ramp = x * x * (3.0 - 2.0 * x);
    let w = s.clamp(0.0, 1.0) * ramp;
    (1.0 - w) * cubic + w * c.lam_liquid
}

pub fn sigma_mem(lambda_m: f64, t: f64) -> f64 {
    sigma_mem_with(Constants::standard(), lambda_m, t)
}

/// Protonic conductivity, S·m⁻¹, floored at `sigma_min`.
pub fn sigma_mem_with(c: &Constants, lambda_m: f64, t: f64) -> f64 {
    let raw =
        (c.sigma_a * lambda_m + c.sigma_b) * (c.sigma_e * (1.0 / c.sigma_t_ref - 1.0 / t)).exp();
    raw.max(c.sigma_min)
}

/// Electro-osmotic drag coefficient.
pub fn drag_coefficient(c: &Constants, lambda_m: f64) -> f64 {
    c.nd_a * lambda_m.max(0.0) / c.nd_b
}

/// Membrane water diffusivity, m²·s⁻¹.
pub fn d_lambda(c: &Constants, lambda_m: f64, t: f64) -> f64 {
    let l = lambda_m.max(0.0);
    let base = if l <= c.dlam_split {
        c.dlam_a1 * l * ((c.dlam_k1 * l).exp() - 1.0)
    } else {
        c.dlam_a2 * l * (1.0 + c.dlam_k2 * (-l).exp())
    };
    base * (c.dlam_e * (1.0 / c.dlam_t_ref - 1.0 / t)).exp()
}

/// Reversible cell voltage, V.
pub fn e_eq(c: &Constants, t: f64) -> f64 {
    c.e0 + c.de_dt * (t - c.e_t_ref)
}

/// Reference O2 concentration: air at one atmosphere and `C_O2_T_ref`.
pub fn c_o2_ref(c: &Constants) -> f64 {
    c.y_o2_air * c.p_amb / (c.r * c.c_o2_t_ref)
}

/// Cathode activation overpotential, V.
pub fn eta_act(c: &Constants, i_fc: f64, c_o2: f64, p: &UndeterminedParameters, t: f64) -> f64 {
    let ratio = (c_o2 / c_o2_ref(c)).powf(p.kappa_c);
    let arg = (i_fc + p.kappa_co) / (2.0 * p.i0_c_ref * ratio);
    c.r * t / (c.alpha_c * c.f) * arg.asinh()
}

pub fn cell_voltage(
    i_fc: f64,
    states: &InterfaceStates,
    params: &UndeterminedParameters,
    h_mem: f64,
    t: f64,
) -> Result<f64, PhysicsError> {
    cell_voltage_with(Constants::standard(), i_fc, states, params, h_mem, t)
}

/// U = E_eq − η_act − i·(H_mem/σ + R_elec).
pub fn cell_voltage_with(
    c: &Constants,
    i_fc: f64,
    states: &InterfaceStates,
    params: &UndeterminedParameters,
    h_mem: f64,
    t: f64,
) -> Result<f64, PhysicsError> {
    let c_o2 = states.cathode_cl.c_o2;
    if c_o2 <= c.c_floor {
        return Err(PhysicsError::VoltageCollapse { c_o2 });
    }
    let eta = eta_act(c, i_fc, c_o2, params, t);
    let r_mem = h_mem / sigma_mem_with(c, states.lambda_mem, t);
    Ok(e_eq(c, t) - eta - i_fc * (r_mem + params.r_elec))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    H2,
    O2,
    N2,
    H2O,
}

impl Species {
    fn lj(self, c: &Constants) -> (f64, f64, f64) {
        match self {
            Species::H2 => (c.lj_sigma_h2, c.lj_eps_h2, c.m_h2),
            Species::O2 => (c.lj_sigma_o2, c.lj_eps_o2, c.m_o2),
            Species::N2 => (c.lj_sigma_n2, c.lj_eps_n2, c.m_n2),
            Species::H2O => (c.lj_sigma_h2o, c.lj_eps_h2o, c.m_h2o),
        }
    }
}

/// Collision integral for diffusion (Neufeld et al. fit).
fn omega_d(t_star: f64) -> f64 {
    1.06036 / t_star.powf(0.15610)
        + 0.19300 / (0.47635 * t_star).exp()
        + 1.03587 / (1.52996 * t_star).exp()
        + 1.76474 / (3.89411 * t_star).exp()
}

/// Chapman–Enskog binary diffusivity in free gas, m²·s⁻¹.
pub fn binary_diffusivity(c: &Constants, a: Species, b: Species, t: f64, p: f64) -> f64 {
    let (sa, ea, ma) = a.lj(c);
    let (sb, eb, mb) = b.lj(c);
    let sigma = 0.5 * (sa + sb);
    let t_star = t / (ea * eb).sqrt();
    // molar masses in g/mol, pressure in atm, result in cm²/s
    let inv_m = 1e-3 / ma + 1e-3 / mb;
    let d_cm2 =
        0.0018583 * (t.powi(3) * inv_m).sqrt() / ((p / 101325.0) * sigma * sigma * omega_d(t_star));
    d_cm2 * 1e-4
}

/// Effective diffusivities in a porous layer, m²·s⁻¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diffusivities {
    /// Vapor in the cathode gas (nitrogen background).
    pub vapor_cathode: f64,
    /// Vapor in the anode gas (hydrogen background).
    pub vapor_anode: f64,
    pub o2: f64,
    pub h2: f64,
}

impl Diffusivities {
    pub fn free(c: &Constants, t: f64, p: f64) -> Self {
        Self {
            vapor_cathode: binary_diffusivity(c, Species::H2O, Species::N2, t, p),
            vapor_anode: binary_diffusivity(c, Species::H2O, Species::H2, t, p),
            o2: binary_diffusivity(c, Species::O2, Species::N2, t, p),
            h2: binary_diffusivity(c, Species::H2, Species::H2O, t, p),
        }
    }

    pub fn scaled(self, f: f64) -> Self {
        Self {
            vapor_cathode: self.vapor_cathode * f,
            vapor_anode: self.vapor_anode * f,
            o2: self.o2 * f,
            h2: self.h2 * f,
        }
    }
}

/// Bruggeman-type correction eps^tau·(1 − s)^tau.
pub fn medium_factor(eps: f64, tau: f64, s: f64) -> f64 {
    (eps * (1.0 - s.clamp(0.0, 1.0))).powf(tau)
}

pub fn diffusivities(eps: f64, tau: f64, s: f64, t: f64, p: f64) -> Diffusivities {
    let c = Constants::standard();
    Diffusivities::free(c, t, p).scaled(medium_factor(eps, tau, s))
}

pub fn phase_exchange(c_v: f64, s: f64, t: f64) -> f64 {
    let c = Constants::standard();
    phase_exchange_with(c, c_v, s, p_sat_raw(c, t) / (c.r * t))
}

/// `max(x, 0)` with the corner rounded over `[0, w]` so the derivative is continuous.
fn ramp_c1(x: f64, w: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < w {
        0.5 * x * x / w
    } else {
        x - 0.5 * w
    }
}

/// Interphase contribution to dC_v/dt, mol·m⁻³·s⁻¹, given the saturated concentration.
pub fn phase_exchange_with(c: &Constants, c_v: f64, s: f64, c_sat: f64) -> f64 {
    let excess = c_v - c_sat;
    let w = c.phase_switch_width * c_sat;
    // a negative trial saturation condenses back towards zero
    let evap = c.gamma_evap_coef * s * c.rho_l / c.m_h2o;
    evap * ramp_c1(-excess, w) - c.gamma_cond * ramp_c1(excess, w)
}

/// Condensation throttle that vanishes as `s` passes the limiting saturation.
pub fn condensation_block(c: &Constants, s: f64, s_lim: f64) -> f64 {
    let z = (s - s_lim) / c.s_block_width;
    if z > 700.0 {
        0.0
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// Capillary diffusivity of liquid saturation, m²·s⁻¹.
pub fn capillary_diffusivity(c: &Constants, s: f64, eps: f64, e_cap: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    let dj = c.leverett_j1 + s * (c.leverett_j2 + s * c.leverett_j3);
    let cos = c.theta_c.to_radians().cos().abs();
    c.sigma_lw * cos / c.mu_l * (eps * c.k_gdl).sqrt() * s.powf(e_cap) * dj.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drag_zero_for_dry_membrane() {
        let c = Constants::standard();
        assert_eq!(drag_coefficient(c, 0.0), 0.0);
        assert!((drag_coefficient(c, 22.0) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn condensation_block_is_half_at_limit() {
        let c = Constants::standard();
        assert!((condensation_block(c, 0.3, 0.3) - 0.5).abs() < 1e-15);
        assert!(condensation_block(c, 0.0, 0.3) > 0.999);
        assert!(condensation_block(c, 0.5, 0.3) < 1e-6);
    }
}
