//! L2-regularized logistic regression trained by gradient descent.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::PredictionModel;
use crate::tabular::{ClassId, Dataset, FeatureSchema, Instance};

/// Per-feature affine scaling `(x - mean) / half_range`, derived from the
/// schema domains so that every in-domain value lands in `[-1, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureScale {
    pub mean: Vec<f64>,
    pub half_range: Vec<f64>,
}

impl FeatureScale {
    fn from_schema(schema: &FeatureSchema) -> FeatureScale {
        let mut mean = Vec::with_capacity(schema.arity());
        let mut half_range = Vec::with_capacity(schema.arity());
        for i in 0..schema.arity() {
            let (lo, hi) = schema.domain(i);
            mean.push((lo + hi) as f64 / 2.0);
            // Singleton domains scale to 0 whatever the divisor.
            half_range.push(if hi > lo { (hi - lo) as f64 / 2.0 } else { 1.0 });
        }
        FeatureScale { mean, half_range }
    }

    fn apply(&self, x: &Instance, out: &mut [f64]) {
        for (i, &v) in x.values().iter().enumerate() {
            out[i] = (v as f64 - self.mean[i]) / self.half_range[i];
        }
    }
}

/// Trained logistic classifier: `predict(x) = 1` iff `sigmoid(w·x̂ + b) ≥ 0.5`
/// where `x̂` is the scaled input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub scale: FeatureScale,
}

impl LogisticModel {
    /// Raw decision value `w·x̂ + b`.
    pub fn decision_value(&self, x: &Instance) -> f64 {
        let mut z = self.bias;
        for (i, &v) in x.values().iter().enumerate() {
            z += self.weights[i] * (v as f64 - self.scale.mean[i]) / self.scale.half_range[i];
        }
        z
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<LogisticModel> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

impl PredictionModel for LogisticModel {
    fn predict(&self, x: &Instance) -> Result<ClassId> {
        Ok(if self.decision_value(x) >= 0.0 { 1 } else { 0 })
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + exp(t)) without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// Train a logistic regression on the full dataset.
///
/// Minimizes `Σ_i log(1 + exp(-y_i (w·x̂_i + b))) + l2/2 ‖w‖²` (intercept
/// unpenalized) by gradient descent with a backtracking line search, starting
/// from zero weights. Stops when the gradient max-norm drops below `tol` or
/// after `max_iter` iterations. Inputs are standardized to `[-1, 1]` per
/// feature from the schema domains, so the result is deterministic.
pub fn train_logistic(data: &Dataset, l2: f64, max_iter: usize, tol: f64) -> Result<LogisticModel> {
    let n = data.len();
    let arity = data.schema.arity();
    if n < 2 || data.labels.iter().all(|&l| l == data.labels[0]) {
        return Err(Error::DegenerateLabels(*data.labels.first().unwrap_or(&0)));
    }

    let scale = FeatureScale::from_schema(&data.schema);
    let mut xs = vec![0.0; n * arity];
    for (r, row) in data.rows.iter().enumerate() {
        scale.apply(row, &mut xs[r * arity..(r + 1) * arity]);
    }
    // y in {-1, +1}
    let ys: Vec<f64> = data.labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();

    let objective = |w: &[f64], b: f64| -> f64 {
        let mut loss = 0.0;
        for r in 0..n {
            let x = &xs[r * arity..(r + 1) * arity];
            let z: f64 = b + w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>();
            loss += softplus(-ys[r] * z);
        }
        loss + 0.5 * l2 * w.iter().map(|wi| wi * wi).sum::<f64>()
    };

    let gradient = |w: &[f64], b: f64, gw: &mut [f64], gb: &mut f64| {
        gw.iter_mut().zip(w).for_each(|(g, wi)| *g = l2 * wi);
        *gb = 0.0;
        for r in 0..n {
            let x = &xs[r * arity..(r + 1) * arity];
            let z: f64 = b + w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>();
            // d/dz softplus(-y z) = -y * sigmoid(-y z)
            let coeff = -ys[r] * sigmoid(-ys[r] * z);
            for (g, xi) in gw.iter_mut().zip(x) {
                *g += coeff * xi;
            }
            *gb += coeff;
        }
    };

    let mut w = vec![0.0; arity];
    let mut b = 0.0;
    let mut gw = vec![0.0; arity];
    let mut gb = 0.0;
    let mut value = objective(&w, b);
    let mut step = 1.0;

    for iter in 0..max_iter {
        gradient(&w, b, &mut gw, &mut gb);
        let max_norm = gw
            .iter()
            .chain(std::iter::once(&gb))
            .fold(0.0f64, |m, g| m.max(g.abs()));
        if max_norm < tol {
            log::debug!("logistic training converged after {iter} iterations");
            break;
        }
        let sq_norm: f64 = gw.iter().map(|g| g * g).sum::<f64>() + gb * gb;

        // Backtracking line search (Armijo): shrink until the step gives at
        // least half the first-order predicted decrease.
        step *= 2.0;
        loop {
            let cand_w: Vec<f64> = w.iter().zip(&gw).map(|(wi, gi)| wi - step * gi).collect();
            let cand_b = b - step * gb;
            let cand_value = objective(&cand_w, cand_b);
            if cand_value <= value - 0.5 * step * sq_norm {
                w = cand_w;
                b = cand_b;
                value = cand_value;
                break;
            }
            step *= 0.5;
            if step < 1e-18 {
                // Gradient is numerically flat; further progress is noise.
                return Ok(LogisticModel { weights: w, bias: b, scale });
            }
        }
    }

    Ok(LogisticModel { weights: w, bias: b, scale })
}
