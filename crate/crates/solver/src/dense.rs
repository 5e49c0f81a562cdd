/// Interpolating polynomial over one accepted step.
///
/// Holds the backward-difference array at the end of the step; evaluation
/// uses the Newton form whose degree equals the BDF order of the step.
#[derive(Debug, Clone)]
pub struct DenseSegment {
    pub t_old: f64,
    pub t: f64,
    h: f64,
    order: usize,
    n: usize,
    d: Vec<f64>,
}

impl DenseSegment {
    pub(crate) fn new(t_old: f64, t: f64, h: f64, order: usize, n: usize, d: &[f64]) -> Self {
        Self {
            t_old,
            t,
            h,
            order,
            n,
            d: d[..(order + 1) * n].to_vec(),
        }
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.d[..self.n]);
        let mut p = 1.0;
        for j in 0..self.order {
            let shift = self.t - self.h * j as f64;
            let denom = self.h * (j + 1) as f64;
            p *= (t - shift) / denom;
            let row = &self.d[(j + 1) * self.n..(j + 2) * self.n];
            for (o, r) in out.iter_mut().zip(row) {
                *o += p * r;
            }
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.eval_into(t, &mut out);
        out
    }
}
