//! Empirical order-of-accuracy check for the fixed-step BDF formulas.

use crate::bdf::integrate_fixed;
use crate::SolverError;

/// Least-squares slope of `log(error)` against `log(h)` for BDF-`order`
/// on a problem with known solution `exact`, integrated over `[t0, t_end]`
/// with each of `step_counts` uniform steps. History is seeded exactly.
pub fn convergence_order<F, S>(
    mut rhs: F,
    exact: S,
    t0: f64,
    t_end: f64,
    order: usize,
    step_counts: &[usize],
) -> Result<f64, SolverError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    S: Fn(f64) -> Vec<f64>,
{
    if step_counts.len() < 2 {
        return Err(SolverError::InvalidSettings(
            "at least two step counts are needed".into(),
        ));
    }
    let y_end = exact(t_end);
    let mut pts = Vec::with_capacity(step_counts.len());
    for &m in step_counts {
        let h = (t_end - t0) / m as f64;
        // start `order - 1` steps in so history lies on the exact curve
        let start = t0 + (order - 1) as f64 * h;
        let steps = m - (order - 1);
        let history: Vec<Vec<f64>> = (0..=order).map(|j| exact(start - j as f64 * h)).collect();
        let y = integrate_fixed(&mut rhs, &history, start, h, steps, order)?;
        let err = y
            .iter()
            .zip(&y_end)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        pts.push((h.ln(), err.max(f64::MIN_POSITIVE).ln()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
