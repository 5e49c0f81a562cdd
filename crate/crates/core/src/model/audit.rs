use thiserror::Error;

use crate::experiment::SimulationResult;

pub const AUDIT_SPECIES: [&str; 3] = ["H2", "O2", "H2O"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AuditError {
    #[error("window holds {found} samples, at least {required} needed")]
    InsufficientSamples { found: usize, required: usize },
    #[error("result has no `{0}` column")]
    MissingColumn(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesResidual {
    pub species: &'static str,
    /// Inventory change over the window, mol.
    pub accumulation: f64,
    /// Integrated inflow, mol.
    pub inflow: f64,
    pub outflow: f64,
    /// Integrated consumption (negative for a product), mol.
    pub reacted: f64,
    /// |accumulation − (in − out − reacted)| / max(in, |reacted|).
    pub residual: f64,
}

fn trapezoid(t: &[f64], v: &[f64]) -> f64 {
    t.windows(2)
        .zip(v.windows(2))
        .map(|(tt, vv)| 0.5 * (tt[1] - tt[0]) * (vv[0] + vv[1]))
        .sum()
}

/// Species balances over `window` from the flow and inventory columns of a result.
pub fn mass_audit(
    result: &SimulationResult,
    window: (f64, f64),
) -> Result<Vec<SpeciesResidual>, AuditError> {
    let idx: Vec<usize> = (0..result.times.len())
        .filter(|&k| result.times[k] >= window.0 && result.times[k] <= window.1)
        .collect();
    if idx.len() < 10 {
        return Err(AuditError::InsufficientSamples {
            found: idx.len(),
            required: 10,
        });
    }
    let t: Vec<f64> = idx.iter().map(|&k| result.times[k]).collect();
    let col = |name: String| -> Result<Vec<f64>, AuditError> {
        let c = result
            .derived(&name)
            .ok_or(AuditError::MissingColumn(name))?;
        Ok(idx.iter().map(|&k| c[k]).collect())
    };
    let mut out = Vec::new();
    for sp in AUDIT_SPECIES {
        let inflow = trapezoid(&t, &col(format!("{sp}_in"))?);
        let outflow = trapezoid(&t, &col(format!("{sp}_out"))?);
        let reacted = trapezoid(&t, &col(format!("{sp}_react"))?);
        let inv = col(format!("{sp}_inventory"))?;
        let accumulation = inv[inv.len() - 1] - inv[0];
        let scale = inflow.abs().max(reacted.abs());
        let gap = (accumulation - (inflow - outflow - reacted)).abs();
        let residual = if scale > 0.0 {
            gap / scale
        } else if gap == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        out.push(SpeciesResidual {
            species: sp,
            accumulation,
            inflow,
            outflow,
            reacted,
            residual,
        });
    }
    Ok(out)
}
