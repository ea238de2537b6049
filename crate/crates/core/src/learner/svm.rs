//! RBF-kernel SVM trained by sequential minimal optimization.
//!
//! Pair selection is Platt-style: the first index comes from a KKT-violation
//! scan, the second maximizes |E1 - E2| with deterministic tie-breaking, with
//! a seeded rotation fallback when that pair makes no progress.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{DecisionModel, LearnerError};
use crate::rng::rng_from;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    pub tol: f64,
    pub max_passes: usize,
    pub rng_seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 12.0,
            gamma: 0.0025,
            tol: 1e-3,
            max_passes: 10,
            rng_seed: 0,
        }
    }
}

/// Trained model: support vectors with dual coefficients (alpha_i * y_i),
/// bias, and the kernel width.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
    pub space_tag: String,
    pub schema_version: u32,
}

fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let mut d2 = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        d2 += d * d;
    }
    (-gamma * d2).exp()
}

impl SvmModel {
    pub fn score(&self, x: &[f64]) -> Result<f64, LearnerError> {
        let dim = self.support_vectors.first().map(|v| v.len()).unwrap_or(0);
        if !self.support_vectors.is_empty() && x.len() != dim {
            return Err(LearnerError::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        let mut s = self.bias;
        for (sv, coef) in self.support_vectors.iter().zip(&self.dual_coefs) {
            s += coef * rbf(self.gamma, sv, x);
        }
        Ok(s)
    }

    pub fn predict(&self, x: &[f64], threshold: f64) -> Result<f64, LearnerError> {
        Ok(if self.score(x)? > threshold { 1.0 } else { -1.0 })
    }
}

impl DecisionModel for SvmModel {
    fn decision(&self, x: &[f64]) -> f64 {
        self.score(x).expect("dimension mismatch in decision")
    }
}

/// Training result with the per-point alphas and the per-sweep dual objective
/// (nondecreasing), kept for KKT and convergence checks.
#[derive(Debug, Clone)]
pub struct TrainedSvm {
    pub model: SvmModel,
    pub alphas: Vec<f64>,
    pub dual_objective_history: Vec<f64>,
}

struct Smo<'a> {
    kernel: Vec<Vec<f64>>,
    ys: &'a [f64],
    alphas: Vec<f64>,
    bias: f64,
    /// decision value cache f(x_i) for every training point
    fx: Vec<f64>,
    c: f64,
    tol: f64,
}

impl<'a> Smo<'a> {
    fn error(&self, i: usize) -> f64 {
        self.fx[i] - self.ys[i]
    }

    fn violates_kkt(&self, i: usize) -> bool {
        let r = self.error(i) * self.ys[i];
        (r < -self.tol && self.alphas[i] < self.c) || (r > self.tol && self.alphas[i] > 0.0)
    }

    fn dual_objective(&self) -> f64 {
        let n = self.alphas.len();
        let mut obj: f64 = self.alphas.iter().sum();
        for i in 0..n {
            if self.alphas[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if self.alphas[j] == 0.0 {
                    continue;
                }
                obj -= 0.5
                    * self.alphas[i]
                    * self.alphas[j]
                    * self.ys[i]
                    * self.ys[j]
                    * self.kernel[i][j];
            }
        }
        obj
    }

    /// Joint optimization of the (i1, i2) pair. Returns true on progress.
    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (a1_old, a2_old) = (self.alphas[i1], self.alphas[i2]);
        let (y1, y2) = (self.ys[i1], self.ys[i2]);
        let (e1, e2) = (self.error(i1), self.error(i2));
        let s = y1 * y2;
        let (lo, hi) = if (y1 - y2).abs() > f64::EPSILON {
            let d = a2_old - a1_old;
            (d.max(0.0), (self.c + d).min(self.c))
        } else {
            let sum = a1_old + a2_old;
            ((sum - self.c).max(0.0), sum.min(self.c))
        };
        if hi - lo < 1e-12 {
            return false;
        }
        let k11 = self.kernel[i1][i1];
        let k12 = self.kernel[i1][i2];
        let k22 = self.kernel[i2][i2];
        let eta = k11 + k22 - 2.0 * k12;
        let mut a2 = if eta > 1e-12 {
            (a2_old + y2 * (e1 - e2) / eta).clamp(lo, hi)
        } else {
            // objective at the segment ends (Platt's degenerate case)
            let f1 = y1 * (e1 + self.bias) - a1_old * k11 - s * a2_old * k12;
            let f2 = y2 * (e2 + self.bias) - s * a1_old * k12 - a2_old * k22;
            let l1 = a1_old + s * (a2_old - lo);
            let h1 = a1_old + s * (a2_old - hi);
            let obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22
                + s * lo * l1 * k12;
            let obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22
                + s * hi * h1 * k12;
            if obj_lo < obj_hi - 1e-12 {
                lo
            } else if obj_hi < obj_lo - 1e-12 {
                hi
            } else {
                return false;
            }
        };
        if a2 < 1e-10 {
            a2 = 0.0;
        } else if a2 > self.c - 1e-10 {
            a2 = self.c;
        }
        if (a2 - a2_old).abs() < 1e-12 * (a2 + a2_old + 1e-12) {
            return false;
        }
        let a1 = a1_old + s * (a2_old - a2);
        let b1 = self.bias - e1 - y1 * (a1 - a1_old) * k11 - y2 * (a2 - a2_old) * k12;
        let b2 = self.bias - e2 - y1 * (a1 - a1_old) * k12 - y2 * (a2 - a2_old) * k22;
        let new_bias = if a1 > 0.0 && a1 < self.c {
            b1
        } else if a2 > 0.0 && a2 < self.c {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        let db = new_bias - self.bias;
        for k in 0..self.fx.len() {
            self.fx[k] +=
                y1 * (a1 - a1_old) * self.kernel[i1][k] + y2 * (a2 - a2_old) * self.kernel[i2][k]
                    + db;
        }
        self.alphas[i1] = a1;
        self.alphas[i2] = a2;
        self.bias = new_bias;
        true
    }
}

/// Train an RBF SVM with SMO. Deterministic given `params.rng_seed`.
pub fn train_svm(
    xs: &[Vec<f64>],
    ys: &[f64],
    params: &SvmParams,
    space_tag: &str,
) -> Result<TrainedSvm, LearnerError> {
    let n = xs.len();
    if n == 0
        || !ys.iter().any(|y| *y > 0.0)
        || !ys.iter().any(|y| *y < 0.0)
    {
        return Err(LearnerError::DegenerateData);
    }
    let mut kernel = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let k = rbf(params.gamma, &xs[i], &xs[j]);
            kernel[i][j] = k;
            kernel[j][i] = k;
        }
    }
    let mut smo = Smo {
        kernel,
        ys,
        alphas: vec![0.0; n],
        bias: 0.0,
        fx: vec![0.0; n],
        c: params.c,
        tol: params.tol,
    };
    let mut rng = rng_from(params.rng_seed);
    let mut history = Vec::new();
    let mut stalled_sweeps = 0usize;
    const SWEEP_CAP: usize = 500;

    for _ in 0..SWEEP_CAP {
        let mut violations = 0usize;
        let mut changed = 0usize;
        for i in 0..n {
            if !smo.violates_kkt(i) {
                continue;
            }
            violations += 1;
            let e1 = smo.error(i);
            // second choice: maximize |E1 - E2| among non-bound points,
            // lowest index on ties
            let mut best: Option<(f64, usize)> = None;
            for j in 0..n {
                if j == i || (smo.alphas[j] <= 0.0 || smo.alphas[j] >= smo.c) {
                    continue;
                }
                let gap = (e1 - smo.error(j)).abs();
                if best.map_or(true, |(g, _)| gap > g + 1e-15) {
                    best = Some((gap, j));
                }
            }
            let mut stepped = best.map_or(false, |(_, j)| smo.take_step(i, j));
            if !stepped {
                let offset = rng.gen_range(0..n);
                for k in 0..n {
                    let j = (k + offset) % n;
                    if j != i && smo.take_step(i, j) {
                        stepped = true;
                        break;
                    }
                }
            }
            if stepped {
                changed += 1;
            }
        }
        history.push(smo.dual_objective());
        if violations == 0 {
            break;
        }
        if changed == 0 {
            stalled_sweeps += 1;
            if stalled_sweeps >= params.max_passes {
                break;
            }
        } else {
            stalled_sweeps = 0;
        }
    }

    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for i in 0..n {
        if smo.alphas[i] > 1e-12 {
            support_vectors.push(xs[i].clone());
            dual_coefs.push(smo.alphas[i] * ys[i]);
        }
    }
    let model = SvmModel {
        support_vectors,
        dual_coefs,
        bias: smo.bias,
        gamma: params.gamma,
        c: params.c,
        space_tag: space_tag.to_string(),
        schema_version: 1,
    };
    Ok(TrainedSvm {
        model,
        alphas: smo.alphas,
        dual_objective_history: history,
    })
}
