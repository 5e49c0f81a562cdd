//! Empirical coefficients loaded from the shipped constants file.

use std::sync::OnceLock;

use crate::config::{ConfigError, Entries};

pub const CONSTANTS_TEXT: &str = include_str!("../constants.cfg");

macro_rules! constants {
    ($($field:ident => $key:literal),* $(,)?) => {
        /// Every empirical coefficient the model uses, in SI units.
        #[derive(Debug, Clone, PartialEq)]
        pub struct Constants {
            $(pub $field: f64,)*
        }

        impl Constants {
            pub fn parse(text: &str) -> Result<Self, ConfigError> {
                let e = Entries::parse(text)?;
                const KEYS: &[&str] = &[$($key),*];
                if let Some(k) = e.keys().find(|k| !KEYS.contains(k)) {
                    return Err(ConfigError::UnknownKey(k.to_string()));
                }
                Ok(Self { $($field: e.req_f64($key)?,)* })
            }
        }
    };
}

constants! {
    f => "F",
    r => "R",
    p_amb => "P_amb",
    m_h2o => "M_H2O",
    m_h2 => "M_H2",
    m_o2 => "M_O2",
    m_n2 => "M_N2",
    y_o2_air => "y_O2_air",
    rho_l => "rho_l",
    psat_c0 => "psat_c0",
    psat_c1 => "psat_c1",
    psat_c2 => "psat_c2",
    psat_c3 => "psat_c3",
    psat_t_min => "psat_T_min",
    psat_t_max => "psat_T_max",
    lam_c0 => "lam_c0",
    lam_c1 => "lam_c1",
    lam_c2 => "lam_c2",
    lam_c3 => "lam_c3",
    lam_liquid => "lam_liquid",
    lam_blend_width => "lam_blend_width",
    sigma_a => "sigma_a",
    sigma_b => "sigma_b",
    sigma_e => "sigma_E",
    sigma_t_ref => "sigma_T_ref",
    sigma_min => "sigma_min",
    nd_a => "nd_a",
    nd_b => "nd_b",
    dlam_a1 => "Dlam_a1",
    dlam_k1 => "Dlam_k1",
    dlam_a2 => "Dlam_a2",
    dlam_k2 => "Dlam_k2",
    dlam_split => "Dlam_split",
    dlam_e => "Dlam_E",
    dlam_t_ref => "Dlam_T_ref",
    rho_mem => "rho_mem",
    ew => "EW",
    gamma_sorp => "gamma_sorp",
    e0 => "E0",
    de_dt => "dE_dT",
    e_t_ref => "E_T_ref",
    alpha_c => "alpha_c",
    c_o2_t_ref => "C_O2_T_ref",
    c_floor => "C_floor",
    gamma_cond => "gamma_cond",
    gamma_evap_coef => "gamma_evap_coef",
    phase_switch_width => "phase_switch_width",
    s_block_width => "s_block_width",
    sigma_lw => "sigma_lw",
    theta_c => "theta_c",
    mu_l => "mu_l",
    k_gdl => "K_gdl",
    leverett_j1 => "leverett_j1",
    leverett_j2 => "leverett_j2",
    leverett_j3 => "leverett_j3",
    eps_cl_solid => "eps_cl_solid",
    tau_cl => "tau_cl",
    lj_sigma_h2 => "lj_sigma_H2",
    lj_eps_h2 => "lj_eps_H2",
    lj_sigma_o2 => "lj_sigma_O2",
    lj_eps_o2 => "lj_eps_O2",
    lj_sigma_n2 => "lj_sigma_N2",
    lj_eps_n2 => "lj_eps_N2",
    lj_sigma_h2o => "lj_sigma_H2O",
    lj_eps_h2o => "lj_eps_H2O",
    tau_act => "tau_act",
    tau_hum => "tau_hum",
    c_d => "C_d",
    gamma_gas => "gamma_gas",
    k_nozzle => "k_nozzle",
    a_purge => "A_purge",
    k_regulator => "k_regulator",
    i_valve_nominal => "i_valve_nominal",
    eps_neg => "eps_neg",
}

impl Constants {
    /// The shipped constants, parsed once.
    pub fn standard() -> &'static Constants {
        static STD: OnceLock<Constants> = OnceLock::new();
        STD.get_or_init(|| Constants::parse(CONSTANTS_TEXT).expect("shipped constants file parses"))
    }

    /// Fixed-site concentration of the ionomer, mol·m⁻³.
    pub fn c_mem(&self) -> f64 {
        self.rho_mem / self.ew
    }

    /// Dry-air molar mass, kg·mol⁻¹.
    pub fn m_air(&self) -> f64 {
        self.y_o2_air * self.m_o2 + (1.0 - self.y_o2_air) * self.m_n2
    }
}
