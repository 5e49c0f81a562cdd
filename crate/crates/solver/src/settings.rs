use crate::{SolverError, MAX_ORDER};

/// Tolerances and step limits for one integration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub rtol: f64,
    /// Absolute tolerance applied to every slot unless `atol_per_slot` is set.
    pub atol: f64,
    pub atol_per_slot: Option<Vec<f64>>,
    pub max_order: usize,
    pub max_step: f64,
    /// `None` selects the first step automatically.
    pub initial_step: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            rtol: 1e-6,
            atol: 1e-9,
            atol_per_slot: None,
            max_order: MAX_ORDER,
            max_step: f64::INFINITY,
            initial_step: None,
        }
    }
}

impl SolverSettings {
    pub fn with_rtol(mut self, rtol: f64) -> Self {
        self.rtol = rtol;
        self
    }

    pub fn with_atol(mut self, atol: f64) -> Self {
        self.atol = atol;
        self
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }

    pub fn with_max_order(mut self, max_order: usize) -> Self {
        self.max_order = max_order;
        self
    }

    pub fn validate(&self, dim: usize) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::InvalidSettings(msg));
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return bad(format!("rtol must lie in (0, 1), got {}", self.rtol));
        }
        if !(self.atol > 0.0) {
            return bad(format!("atol must be positive, got {}", self.atol));
        }
        if let Some(per_slot) = &self.atol_per_slot {
            if per_slot.len() != dim {
                return bad(format!(
                    "atol_per_slot has {} entries for a {dim}-dimensional system",
                    per_slot.len()
                ));
            }
            if per_slot.iter().any(|&a| !(a > 0.0)) {
                return bad("every per-slot atol must be positive".into());
            }
        }
        if !(1..=MAX_ORDER).contains(&self.max_order) {
            return bad(format!(
                "max_order must lie in 1..=5, got {}",
                self.max_order
            ));
        }
        if !(self.max_step > 0.0) {
            return bad(format!("max_step must be positive, got {}", self.max_step));
        }
        if let Some(h) = self.initial_step {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("initial_step must be positive, got {h}"));
            }
        }
        Ok(())
    }

    pub(crate) fn atol_at(&self, slot: usize) -> f64 {
        match &self.atol_per_slot {
            Some(v) => v[slot],
            None => self.atol,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SolverSettings::default().validate(3).unwrap();
    }

    #[test]
    fn rejects_out_of_range_values() {
        assert!(SolverSettings::default()
            .with_rtol(0.0)
            .validate(1)
            .is_err());
        assert!(SolverSettings::default()
            .with_rtol(1.0)
            .validate(1)
            .is_err());
        assert!(SolverSettings::default()
            .with_atol(-1.0)
            .validate(1)
            .is_err());
        assert!(SolverSettings::default()
            .with_max_order(0)
            .validate(1)
            .is_err());
        assert!(SolverSettings::default()
            .with_max_order(6)
            .validate(1)
            .is_err());
        assert!(SolverSettings::default()
            .with_max_step(0.0)
            .validate(1)
            .is_err());
        let s = SolverSettings {
            atol_per_slot: Some(vec![1e-9]),
            ..Default::default()
        };
        assert!(s.validate(2).is_err());
    }
}
