//! l1-regularized linear classifier (hinge loss) trained by proximal
//! gradient descent; used for the feature-selection comparison against
//! conserved features.

use serde::{Deserialize, Serialize};

use super::{DecisionModel, LearnerError};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearL1Model {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub reg_strength: f64,
}

impl DecisionModel for LinearL1Model {
    fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }
}

fn objective(w: &[f64], b: f64, xs: &[Vec<f64>], ys: &[f64], reg: f64) -> f64 {
    let n = xs.len() as f64;
    let hinge: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let margin = y * (w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b);
            (1.0 - margin).max(0.0)
        })
        .sum::<f64>()
        / n;
    hinge + reg * w.iter().map(|wi| wi.abs()).sum::<f64>()
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Proximal gradient descent on mean hinge loss + reg * ||w||_1. The step is
/// halved whenever an epoch fails to reduce the objective, so the recorded
/// objective is nonincreasing.
pub fn train_linear_l1(
    xs: &[Vec<f64>],
    ys: &[f64],
    reg: f64,
    epochs: usize,
    step: f64,
) -> Result<LinearL1Model, LearnerError> {
    if xs.is_empty() || !ys.iter().any(|y| *y > 0.0) || !ys.iter().any(|y| *y < 0.0) {
        return Err(LearnerError::DegenerateData);
    }
    let dim = xs[0].len();
    let n = xs.len() as f64;
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut step = step;
    let mut best = objective(&w, b, xs, ys, reg);
    for _ in 0..epochs {
        let mut grad_w = vec![0.0; dim];
        let mut grad_b = 0.0;
        for (x, y) in xs.iter().zip(ys) {
            let margin = y * (w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b);
            if margin < 1.0 {
                for (g, xi) in grad_w.iter_mut().zip(x) {
                    *g -= y * xi / n;
                }
                grad_b -= y / n;
            }
        }
        let cand_w: Vec<f64> = w
            .iter()
            .zip(&grad_w)
            .map(|(wi, g)| soft_threshold(wi - step * g, step * reg))
            .collect();
        let cand_b = b - step * grad_b;
        let cand_obj = objective(&cand_w, cand_b, xs, ys, reg);
        if cand_obj <= best + 1e-12 {
            w = cand_w;
            b = cand_b;
            best = cand_obj;
        } else {
            step /= 2.0;
            if step < 1e-12 {
                break;
            }
        }
    }
    Ok(LinearL1Model {
        weights: w,
        bias: b,
        reg_strength: reg,
    })
}

/// Coordinates with weight magnitude above 1e-8.
pub fn selected_features(model: &LinearL1Model) -> Vec<usize> {
    model
        .weights
        .iter()
        .enumerate()
        .filter(|(_, w)| w.abs() > 1e-8)
        .map(|(i, _)| i)
        .collect()
}
