//! Gaussian naive Bayes.

use serde::{Deserialize, Serialize};

use crate::matrix::NumericMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    /// log prior per class, index 0 = negative, 1 = positive
    pub log_prior: [f64; 2],
    pub mean: [Vec<f64>; 2],
    pub var: [Vec<f64>; 2],
}

impl GaussianNb {
    /// Per-class variances get `var_smoothing * max feature variance` added.
    pub fn fit(x: &NumericMatrix, y: &[bool], var_smoothing: f64) -> GaussianNb {
        let d = x.cols();
        let n = x.rows() as f64;
        let epsilon = {
            let max_var = (0..d)
                .map(|j| population_var(&x.column(j)))
                .fold(0.0, f64::max);
            let e = var_smoothing * max_var;
            if e > 0.0 { e } else { var_smoothing.max(f64::MIN_POSITIVE) }
        };

        let mut mean = [vec![0.0; d], vec![0.0; d]];
        let mut var = [vec![0.0; d], vec![0.0; d]];
        let mut count = [0usize; 2];
        for (row, &label) in x.row_iter().zip(y) {
            let c = label as usize;
            count[c] += 1;
            for (m, v) in mean[c].iter_mut().zip(row) {
                *m += v;
            }
        }
        for c in 0..2 {
            mean[c].iter_mut().for_each(|m| *m /= count[c] as f64);
        }
        for (row, &label) in x.row_iter().zip(y) {
            let c = label as usize;
            for j in 0..d {
                let diff = row[j] - mean[c][j];
                var[c][j] += diff * diff;
            }
        }
        for c in 0..2 {
            var[c].iter_mut().for_each(|v| *v = *v / count[c] as f64 + epsilon);
        }

        GaussianNb {
            log_prior: [(count[0] as f64 / n).ln(), (count[1] as f64 / n).ln()],
            mean,
            var,
        }
    }

    /// Joint log-likelihood per class.
    pub fn log_joint(&self, row: &[f64]) -> [f64; 2] {
        let mut out = self.log_prior;
        for c in 0..2 {
            for j in 0..row.len() {
                let v = self.var[c][j];
                let diff = row[j] - self.mean[c][j];
                out[c] -= 0.5 * ((2.0 * std::f64::consts::PI * v).ln() + diff * diff / v);
            }
        }
        out
    }
}

fn population_var(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64
}
