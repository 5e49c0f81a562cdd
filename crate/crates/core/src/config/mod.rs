//! Cell configuration: operating point, geometry, fitted parameters,
//! numerics and system options, plus the settings-file format and presets.

mod format;
mod presets;

use std::path::Path;

use thiserror::Error;

pub use format::{Entries, Writer};
pub use presets::{preset, preset_names, preset_text};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

impl ConfigError {
    /// Name of the offending field for validation failures.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Validation { field, .. } => Some(field),
            ConfigError::Missing(k) | ConfigError::UnknownKey(k) => Some(k),
            _ => None,
        }
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatingConditions {
    /// Cell temperature, K.
    pub t_fc: f64,
    /// Desired gas pressure on both sides, Pa.
    pub p_des: f64,
    pub s_a: f64,
    pub s_c: f64,
    pub phi_a_des: f64,
    pub phi_c_des: f64,
}

impl OperatingConditions {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.t_fc > 273.15 && self.t_fc < 373.15) {
            return Err(invalid(
                "T_fc",
                format!("{} K outside (273.15, 373.15)", self.t_fc),
            ));
        }
        if !(self.p_des >= 101325.0 && self.p_des.is_finite()) {
            return Err(invalid("P_des", format!("{} Pa below 101325", self.p_des)));
        }
        for (name, v) in [("S_a", self.s_a), ("S_c", self.s_c)] {
            if !(v >= 1.0 && v.is_finite()) {
                return Err(invalid(name, format!("stoichiometric ratio {v} < 1")));
            }
        }
        for (name, v) in [("Phi_a_des", self.phi_a_des), ("Phi_c_des", self.phi_c_des)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(name, format!("humidity {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccessibleParameters {
    /// Active area, m².
    pub a_act: f64,
    pub h_gdl: f64,
    pub h_mem: f64,
    pub h_cl: f64,
    pub h_gc: f64,
    pub w_gc: f64,
    /// Cumulated channel length, m.
    pub l_gc: f64,
    pub v_sm_a: f64,
    pub v_sm_c: f64,
    pub v_em_a: f64,
    pub v_em_c: f64,
}

impl AccessibleParameters {
    fn fields(&self) -> [(&'static str, f64); 11] {
        [
            ("A_act", self.a_act),
            ("H_gdl", self.h_gdl),
            ("H_mem", self.h_mem),
            ("H_cl", self.h_cl),
            ("H_gc", self.h_gc),
            ("W_gc", self.w_gc),
            ("L_gc", self.l_gc),
            ("V_sm_a", self.v_sm_a),
            ("V_sm_c", self.v_sm_c),
            ("V_em_a", self.v_em_a),
            ("V_em_c", self.v_em_c),
        ]
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in self.fields() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("{v} must be strictly positive")));
            }
        }
        Ok(())
    }

    /// Gas-channel volume, m³.
    pub fn v_gc(&self) -> f64 {
        self.h_gc * self.w_gc * self.l_gc
    }
}

/// The ten calibratable scalars, in genome order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    Tau,
    EpsGdl,
    EpsMc,
    I0cRef,
    KappaCo,
    KappaC,
    RElec,
    ECap,
    ASlim,
    BSlim,
}

impl Param {
    pub const ALL: [Param; 10] = [
        Param::Tau,
        Param::EpsGdl,
        Param::EpsMc,
        Param::I0cRef,
        Param::KappaCo,
        Param::KappaC,
        Param::RElec,
        Param::ECap,
        Param::ASlim,
        Param::BSlim,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Param::Tau => "tau",
            Param::EpsGdl => "eps_gdl",
            Param::EpsMc => "eps_mc",
            Param::I0cRef => "i0_c_ref",
            Param::KappaCo => "kappa_co",
            Param::KappaC => "kappa_c",
            Param::RElec => "R_elec",
            Param::ECap => "e_cap",
            Param::ASlim => "a_slim",
            Param::BSlim => "b_slim",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn default_bounds(self) -> (f64, f64) {
        match self {
            Param::Tau => (1.0, 4.0),
            Param::EpsGdl => (0.5, 0.9),
            Param::EpsMc => (0.15, 0.4),
            Param::I0cRef => (1e-3, 500.0),
            Param::KappaCo => (0.01, 40.0),
            Param::KappaC => (0.25, 4.0),
            Param::RElec => (1e-7, 1e-4),
            Param::ECap => (1.0, 5.0),
            Param::ASlim => (0.0, 0.2),
            Param::BSlim => (0.0, 1.0),
        }
    }
}

/// Fitted parameters with their admissible ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct UndeterminedParameters {
    /// GDL tortuosity.
    pub tau: f64,
    pub eps_gdl: f64,
    /// Ionomer volume fraction in the catalyst layer.
    pub eps_mc: f64,
    /// Reference cathode exchange current density, A·m⁻².
    pub i0_c_ref: f64,
    /// Crossover-equivalent current density, A·m⁻².
    pub kappa_co: f64,
    pub kappa_c: f64,
    /// Electronic ohmic resistance, Ω·m².
    pub r_elec: f64,
    pub e_cap: f64,
    pub a_slim: f64,
    pub b_slim: f64,
    /// `bounds[p.index()]` for each [`Param`].
    pub bounds: [(f64, f64); 10],
}

impl UndeterminedParameters {
    pub fn get(&self, p: Param) -> f64 {
        match p {
            Param::Tau => self.tau,
            Param::EpsGdl => self.eps_gdl,
            Param::EpsMc => self.eps_mc,
            Param::I0cRef => self.i0_c_ref,
            Param::KappaCo => self.kappa_co,
            Param::KappaC => self.kappa_c,
            Param::RElec => self.r_elec,
            Param::ECap => self.e_cap,
            Param::ASlim => self.a_slim,
            Param::BSlim => self.b_slim,
        }
    }

    pub fn set(&mut self, p: Param, v: f64) {
        let slot = match p {
            Param::Tau => &mut self.tau,
            Param::EpsGdl => &mut self.eps_gdl,
            Param::EpsMc => &mut self.eps_mc,
            Param::I0cRef => &mut self.i0_c_ref,
            Param::KappaCo => &mut self.kappa_co,
            Param::KappaC => &mut self.kappa_c,
            Param::RElec => &mut self.r_elec,
            Param::ECap => &mut self.e_cap,
            Param::ASlim => &mut self.a_slim,
            Param::BSlim => &mut self.b_slim,
        };
        *slot = v;
    }

    pub fn values(&self) -> [f64; 10] {
        Param::ALL.map(|p| self.get(p))
    }

    pub fn bounds_of(&self, p: Param) -> (f64, f64) {
        self.bounds[p.index()]
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for p in Param::ALL {
            let (lo, hi) = self.bounds_of(p);
            let key = p.key();
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(invalid(
                    &format!("{key}.bounds"),
                    format!("[{lo}, {hi}] is not a finite range"),
                ));
            }
            let v = self.get(p);
            if !(v >= lo && v <= hi) {
                return Err(invalid(key, format!("{v} outside bounds [{lo}, {hi}]")));
            }
        }
        // physical admissibility on top of the user bounds
        if !(self.tau >= 1.0) {
            return Err(invalid("tau", "tortuosity must be at least 1"));
        }
        if !(self.eps_gdl > 0.0 && self.eps_gdl < 1.0) {
            return Err(invalid("eps_gdl", "porosity must lie in (0, 1)"));
        }
        if !(self.eps_mc > 0.0 && self.eps_mc < 0.6) {
            return Err(invalid("eps_mc", "ionomer fraction must lie in (0, 0.6)"));
        }
        if !(self.i0_c_ref > 0.0) {
            return Err(invalid(
                "i0_c_ref",
                "exchange current density must be positive",
            ));
        }
        if !(self.kappa_co >= 0.0) {
            return Err(invalid(
                "kappa_co",
                "crossover current must be non-negative",
            ));
        }
        if !(self.r_elec >= 0.0) {
            return Err(invalid("R_elec", "resistance must be non-negative"));
        }
        if !(self.a_slim >= 0.0 && self.b_slim >= 0.0) {
            let f = if self.a_slim < 0.0 {
                "a_slim"
            } else {
                "b_slim"
            };
            return Err(invalid(f, "coefficient must be non-negative"));
        }
        Ok(())
    }

    /// Limiting liquid saturation at desired pressure `p_des`.
    pub fn s_lim(&self, p_des: f64) -> f64 {
        self.a_slim * p_des / 1e5 + self.b_slim
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComputingParameters {
    pub n_gdl: usize,
    pub t_purge: f64,
    pub delta_t_purge: f64,
    pub max_step: f64,
    /// Polarization staircase increment, A·m⁻².
    pub i_step_resolution: f64,
}

impl ComputingParameters {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_gdl < 2 {
            return Err(invalid("n_gdl", format!("{} < 2", self.n_gdl)));
        }
        if !(self.t_purge > 0.0 && self.t_purge.is_finite()) {
            return Err(invalid("t_purge", "must be positive"));
        }
        if !(self.t_purge < self.delta_t_purge && self.delta_t_purge.is_finite()) {
            return Err(invalid("delta_t_purge", "must exceed t_purge"));
        }
        if !(self.max_step > 0.0) {
            return Err(invalid("max_step", "must be positive"));
        }
        if !(self.i_step_resolution > 0.0 && self.i_step_resolution.is_finite()) {
            return Err(invalid("i_step_resolution", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Auxiliaries {
    /// Both sides fed continuously and vented through back-pressure valves.
    FlowThrough,
    /// Dead-ended, pressure-regulated anode vented only through the purge valve.
    ClosedAnodeWithPurge,
}

impl Auxiliaries {
    pub fn tag(self) -> &'static str {
        match self {
            Auxiliaries::FlowThrough => "flow-through",
            Auxiliaries::ClosedAnodeWithPurge => "closed-anode-with-purge",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "flow-through" => Some(Auxiliaries::FlowThrough),
            "closed-anode-with-purge" => Some(Auxiliaries::ClosedAnodeWithPurge),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOptions {
    pub auxiliaries: Auxiliaries,
    pub control: bool,
    pub purge: bool,
}

/// PI gains and actuator limits for the operating-condition controller.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlParameters {
    /// Back-pressure valve proportional gain, m²·Pa⁻¹.
    pub kp_pressure: f64,
    /// Back-pressure valve integral gain, m²·Pa⁻¹·s⁻¹.
    pub ki_pressure: f64,
    pub kp_humidity: f64,
    pub ki_humidity: f64,
    /// Controller sample time, s.
    pub dt: f64,
    /// Valve area limit as a multiple of the area sized at the nominal point.
    pub a_bp_max_ratio: f64,
}

impl Default for ControlParameters {
    fn default() -> Self {
        Self {
            kp_pressure: 2e-12,
            ki_pressure: 2e-11,
            kp_humidity: 0.5,
            ki_humidity: 1.0,
            dt: 0.1,
            a_bp_max_ratio: 4.0,
        }
    }
}

impl ControlParameters {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("Kp_pressure", self.kp_pressure),
            ("Ki_pressure", self.ki_pressure),
            ("Kp_humidity", self.kp_humidity),
            ("Ki_humidity", self.ki_humidity),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, "gain must be finite and non-negative"));
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("control_dt", "must be positive"));
        }
        if !(self.a_bp_max_ratio >= 1.0 && self.a_bp_max_ratio.is_finite()) {
            return Err(invalid("A_bp_max_ratio", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuelCellConfig {
    pub operating: OperatingConditions,
    pub accessible: AccessibleParameters,
    pub undetermined: UndeterminedParameters,
    pub computing: ComputingParameters,
    pub options: SimulationOptions,
    pub control: ControlParameters,
}

impl FuelCellConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.operating.validate()?;
        self.accessible.validate()?;
        self.undetermined.validate()?;
        self.computing.validate()?;
        self.control.validate()
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let e = Entries::parse(text)?;
        let allowed = known_keys();
        if let Some(k) = e.keys().find(|k| !allowed.iter().any(|a| a == k)) {
            return Err(ConfigError::UnknownKey(k.to_string()));
        }

        let operating = OperatingConditions {
            t_fc: e.req_f64("T_fc")?,
            p_des: e.req_f64("P_des")?,
            s_a: e.req_f64("S_a")?,
            s_c: e.req_f64("S_c")?,
            phi_a_des: e.req_f64("Phi_a_des")?,
            phi_c_des: e.req_f64("Phi_c_des")?,
        };
        let accessible = AccessibleParameters {
            a_act: e.req_f64("A_act")?,
            h_gdl: e.req_f64("H_gdl")?,
            h_mem: e.req_f64("H_mem")?,
            h_cl: e.req_f64("H_cl")?,
            h_gc: e.req_f64("H_gc")?,
            w_gc: e.req_f64("W_gc")?,
            l_gc: e.req_f64("L_gc")?,
            v_sm_a: e.req_f64("V_sm_a")?,
            v_sm_c: e.req_f64("V_sm_c")?,
            v_em_a: e.req_f64("V_em_a")?,
            v_em_c: e.req_f64("V_em_c")?,
        };
        let mut bounds = [(0.0, 0.0); 10];
        for p in Param::ALL {
            bounds[p.index()] = e
                .pair(&format!("{}.bounds", p.key()))?
                .unwrap_or(p.default_bounds());
        }
        let mut undetermined = UndeterminedParameters {
            tau: 0.0,
            eps_gdl: 0.0,
            eps_mc: 0.0,
            i0_c_ref: 0.0,
            kappa_co: 0.0,
            kappa_c: 0.0,
            r_elec: 0.0,
            e_cap: 0.0,
            a_slim: 0.0,
            b_slim: 0.0,
            bounds,
        };
        for p in Param::ALL {
            undetermined.set(p, e.req_f64(p.key())?);
        }
        let computing = ComputingParameters {
            n_gdl: e.usize("n_gdl")?.unwrap_or(5),
            t_purge: e.req_f64("t_purge")?,
            delta_t_purge: e.req_f64("delta_t_purge")?,
            max_step: e.f64("max_step")?.unwrap_or(1.0),
            i_step_resolution: e.f64("i_step_resolution")?.unwrap_or(1000.0),
        };
        let aux_tag = e
            .raw("auxiliaries")
            .ok_or_else(|| ConfigError::Missing("auxiliaries".into()))?;
        let auxiliaries = Auxiliaries::from_tag(aux_tag).ok_or_else(|| {
            invalid(
                "auxiliaries",
                format!("`{aux_tag}` is not one of flow-through, closed-anode-with-purge"),
            )
        })?;
        let options = SimulationOptions {
            auxiliaries,
            control: e.bool("control")?.unwrap_or(true),
            purge: e.bool("purge")?.unwrap_or(false),
        };
        let d = ControlParameters::default();
        let control = ControlParameters {
            kp_pressure: e.f64("Kp_pressure")?.unwrap_or(d.kp_pressure),
            ki_pressure: e.f64("Ki_pressure")?.unwrap_or(d.ki_pressure),
            kp_humidity: e.f64("Kp_humidity")?.unwrap_or(d.kp_humidity),
            ki_humidity: e.f64("Ki_humidity")?.unwrap_or(d.ki_humidity),
            dt: e.f64("control_dt")?.unwrap_or(d.dt),
            a_bp_max_ratio: e.f64("A_bp_max_ratio")?.unwrap_or(d.a_bp_max_ratio),
        };
        let cfg = FuelCellConfig {
            operating,
            accessible,
            undetermined,
            computing,
            options,
            control,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Settings text that [`FuelCellConfig::parse`] maps back to `self`.
    pub fn to_settings_string(&self) -> String {
        let mut w = Writer::default();
        let o = &self.operating;
        w.section("operating conditions");
        w.f64("T_fc", o.t_fc);
        w.f64("P_des", o.p_des);
        w.f64("S_a", o.s_a);
        w.f64("S_c", o.s_c);
        w.f64("Phi_a_des", o.phi_a_des);
        w.f64("Phi_c_des", o.phi_c_des);

        w.section("geometry");
        for (k, v) in self.accessible.fields() {
            w.f64(k, v);
        }

        w.section("undetermined parameters");
        for p in Param::ALL {
            w.f64(p.key(), self.undetermined.get(p));
        }
        for p in Param::ALL {
            w.pair(
                &format!("{}.bounds", p.key()),
                self.undetermined.bounds_of(p),
            );
        }

        let c = &self.computing;
        w.section("computing");
        w.display("n_gdl", c.n_gdl);
        w.f64("t_purge", c.t_purge);
        w.f64("delta_t_purge", c.delta_t_purge);
        w.f64("max_step", c.max_step);
        w.f64("i_step_resolution", c.i_step_resolution);

        w.section("options");
        w.display("auxiliaries", self.options.auxiliaries.tag());
        w.display("control", self.options.control);
        w.display("purge", self.options.purge);

        let k = &self.control;
        w.section("control");
        w.f64("Kp_pressure", k.kp_pressure);
        w.f64("Ki_pressure", k.ki_pressure);
        w.f64("Kp_humidity", k.kp_humidity);
        w.f64("Ki_humidity", k.ki_humidity);
        w.f64("control_dt", k.dt);
        w.f64("A_bp_max_ratio", k.a_bp_max_ratio);
        w.finish()
    }

    /// Replace the fitted parameters listed in a settings fragment.
    pub fn apply_fragment(&mut self, text: &str) -> Result<(), ConfigError> {
        let e = Entries::parse(text)?;
        for k in e.keys() {
            if !Param::ALL.iter().any(|p| p.key() == k) {
                return Err(ConfigError::UnknownKey(k.to_string()));
            }
        }
        for p in Param::ALL {
            if let Some(v) = e.f64(p.key())? {
                self.undetermined.set(p, v);
            }
        }
        self.validate()
    }
}

fn known_keys() -> Vec<String> {
    let mut keys: Vec<String> = [
        "T_fc",
        "P_des",
        "S_a",
        "S_c",
        "Phi_a_des",
        "Phi_c_des",
        "A_act",
        "H_gdl",
        "H_mem",
        "H_cl",
        "H_gc",
        "W_gc",
        "L_gc",
        "V_sm_a",
        "V_sm_c",
        "V_em_a",
        "V_em_c",
        "n_gdl",
        "t_purge",
        "delta_t_purge",
        "max_step",
        "i_step_resolution",
        "auxiliaries",
        "control",
        "purge",
        "Kp_pressure",
        "Ki_pressure",
        "Kp_humidity",
        "Ki_humidity",
        "control_dt",
        "A_bp_max_ratio",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for p in Param::ALL {
        keys.push(p.key().to_string());
        keys.push(format!("{}.bounds", p.key()));
    }
    keys
}

pub fn load_config(path: &Path) -> Result<FuelCellConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    FuelCellConfig::parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_error_reports_line() {
        let err = Entries::parse("a = 1\n\nnot a pair\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::Parse {
                line: 3,
                message: "expected `key = value`, found `not a pair`".into()
            }
        );
    }

    #[test]
    fn duplicate_keys_rejected() {
        assert!(Entries::parse("a = 1\na = 2").is_err());
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let e = Entries::parse("# header\n  x = 2.5 # trailing\n\n").unwrap();
        assert_eq!(e.f64("x").unwrap(), Some(2.5));
    }

    #[test]
    fn s_lim_is_linear_in_pressure() {
        let p = preset("EH-31").unwrap().undetermined;
        let a = p.s_lim(1e5);
        let b = p.s_lim(2e5);
        assert!((b - a - p.a_slim).abs() < 1e-15);
    }
}
