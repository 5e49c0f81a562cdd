use sha2::{Digest, Sha256};

use crate::config::{FuelCellConfig, OperatingConditions, Param};
use crate::experiment::{run_polarization_steady_from, steady_state, SteadyOptions};
use crate::model::Model;

use super::ga::Objective;
use super::CalibrationError;

/// Score given to genomes whose simulation fails or collapses early.
pub const FAILURE_PENALTY: f64 = 10.0;

pub const MIN_CURVES: usize = 3;
pub const MIN_POINTS: usize = 5;

/// One measured polarization curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub operating: OperatingConditions,
    /// (i A·m⁻², U V), strictly increasing in i.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scalarization {
    /// Largest |U_sim − U_exp| / U_exp over every point of every curve.
    MaxRelative,
}

/// How a parameter appears in the genome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gene {
    pub param: Param,
    /// Gene holds log10 of the value.
    pub log: bool,
    pub lo: f64,
    pub hi: f64,
}

impl Gene {
    pub fn decode(&self, g: f64) -> f64 {
        if self.log {
            10f64.powf(g).clamp(self.lo, self.hi)
        } else {
            g
        }
    }

    pub fn encode(&self, v: f64) -> f64 {
        if self.log {
            v.log10()
        } else {
            v
        }
    }

    pub fn gene_bounds(&self) -> (f64, f64) {
        (self.encode(self.lo), self.encode(self.hi))
    }
}

/// Parameters spanning more than two decades with a positive lower bound are
/// searched on a log scale.
fn gene_for(param: Param, (lo, hi): (f64, f64)) -> Gene {
    Gene {
        param,
        log: lo > 0.0 && hi / lo > 100.0,
        lo,
        hi,
    }
}

#[derive(Debug, Clone)]
pub struct CalibrationProblem {
    pub base: FuelCellConfig,
    pub experiments: Vec<Experiment>,
    pub genes: Vec<Gene>,
    pub objective: Scalarization,
    pub steady: SteadyOptions,
    /// Steady state of the base configuration at each curve's first current,
    /// used as the starting guess for every genome.
    warm: Vec<Option<Vec<f64>>>,
}

impl CalibrationProblem {
    /// Calibrates every fitted parameter within the bounds carried by `base`.
    pub fn new(
        base: FuelCellConfig,
        experiments: Vec<Experiment>,
    ) -> Result<Self, CalibrationError> {
        Self::with_params(base, experiments, &Param::ALL)
    }

    pub fn with_params(
        base: FuelCellConfig,
        experiments: Vec<Experiment>,
        params: &[Param],
    ) -> Result<Self, CalibrationError> {
        base.validate()
            .map_err(|e| CalibrationError::Invalid(format!("base configuration: {e}")))?;
        if experiments.len() < MIN_CURVES {
            return Err(CalibrationError::TooFewCurves(experiments.len()));
        }
        for e in &experiments {
            if e.points.len() < MIN_POINTS {
                return Err(CalibrationError::Invalid(format!(
                    "curve `{}` has {} points, at least {MIN_POINTS} required",
                    e.name,
                    e.points.len()
                )));
            }
            if e.points
                .iter()
                .any(|&(i, u)| !(i > 0.0 && i.is_finite() && u > 0.0 && u.is_finite()))
            {
                return Err(CalibrationError::Invalid(format!(
                    "curve `{}` needs positive finite currents and voltages",
                    e.name
                )));
            }
            if e.points.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(CalibrationError::Invalid(format!(
                    "curve `{}` currents must be strictly increasing",
                    e.name
                )));
            }
            e.operating
                .validate()
                .map_err(|err| CalibrationError::Invalid(format!("curve `{}`: {err}", e.name)))?;
        }
        if params.is_empty() {
            return Err(CalibrationError::Invalid(
                "no parameters to calibrate".into(),
            ));
        }
        let genes = params
            .iter()
            .map(|&p| gene_for(p, base.undetermined.bounds_of(p)))
            .collect();
        let steady = SteadyOptions::default();
        let warm = experiments
            .iter()
            .map(|e| {
                let mut c = base.clone();
                c.operating = e.operating.clone();
                let model = Model::new(c).ok()?;
                steady_state(&model, e.points[0].0, None, &steady).ok()
            })
            .collect();
        Ok(Self {
            base,
            experiments,
            genes,
            objective: Scalarization::MaxRelative,
            steady,
            warm,
        })
    }

    /// Configuration with the genome's parameter values.
    pub fn config_for(&self, genome: &[f64]) -> FuelCellConfig {
        let mut cfg = self.base.clone();
        for (gene, &g) in self.genes.iter().zip(genome) {
            cfg.undetermined.set(gene.param, gene.decode(g));
        }
        cfg
    }

    pub fn genome_of(&self, cfg: &FuelCellConfig) -> Vec<f64> {
        self.genes
            .iter()
            .map(|g| g.encode(cfg.undetermined.get(g.param)))
            .collect()
    }

    /// Score of a configuration; failures map to [`FAILURE_PENALTY`].
    pub fn score(&self, cfg: &FuelCellConfig) -> f64 {
        let mut worst = 0.0f64;
        for (e, warm) in self.experiments.iter().zip(&self.warm) {
            let mut c = cfg.clone();
            c.operating = e.operating.clone();
            let currents: Vec<f64> = e.points.iter().map(|p| p.0).collect();
            let curve =
                match run_polarization_steady_from(&c, &currents, &self.steady, warm.as_deref()) {
                    Ok(curve) if curve.points.len() == currents.len() => curve,
                    _ => return FAILURE_PENALTY,
                };
            for (&(_, u_exp), &(_, u_sim)) in e.points.iter().zip(&curve.points) {
                worst = worst.max((u_sim - u_exp).abs() / u_exp);
            }
        }
        if worst.is_finite() {
            worst.min(FAILURE_PENALTY)
        } else {
            FAILURE_PENALTY
        }
    }

    /// Settings fragment with the calibrated values, loadable onto a configuration.
    pub fn fragment(&self, genome: &[f64]) -> String {
        let cfg = self.config_for(genome);
        let mut w = crate::config::Writer::default();
        w.section("calibrated parameters");
        for g in &self.genes {
            w.f64(g.param.key(), cfg.undetermined.get(g.param));
        }
        w.finish()
    }
}

impl Objective for CalibrationProblem {
    fn bounds(&self) -> Vec<(f64, f64)> {
        self.genes.iter().map(Gene::gene_bounds).collect()
    }

    fn fitness(&self, genome: &[f64]) -> f64 {
        self.score(&self.config_for(genome))
    }

    fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.base.to_settings_string().as_bytes());
        for g in &self.genes {
            h.update(g.param.key().as_bytes());
            h.update([g.log as u8]);
            h.update(g.lo.to_le_bytes());
            h.update(g.hi.to_le_bytes());
        }
        for e in &self.experiments {
            h.update(e.name.as_bytes());
            let o = &e.operating;
            for v in [o.t_fc, o.p_des, o.s_a, o.s_c, o.phi_a_des, o.phi_c_des] {
                h.update(v.to_le_bytes());
            }
            for &(i, u) in &e.points {
                h.update(i.to_le_bytes());
                h.update(u.to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
