//! Feature-space evasion: minimize Q(x) = f(x) + lambda * c(x_M, x) by
//! coordinate-wise greedy descent with random restarts, optionally holding a
//! conserved coordinate set fixed and/or forbidding feature removal.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::learner::DecisionModel;
use crate::rng::{derive_seed, rng_from};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FsAttackError {
    #[error("feature vector dimension mismatch")]
    DimensionMismatch,
    #[error("search space too large: {0} free coordinates")]
    TooLarge(usize),
}

/// Move set for one coordinate: binary flip, or the best value on a
/// per-feature grid (used for standardized real-valued content features).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttackMode {
    Binary,
    /// One ascending candidate-value grid per feature.
    RealGrid { grids: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FsAttackConfig {
    pub lambda: f64,
    pub restarts: usize,
    pub conserved: BTreeSet<usize>,
    pub mode: AttackMode,
    pub insertion_only: bool,
    pub rng_seed: u64,
}

impl FsAttackConfig {
    pub fn binary(lambda: f64, rng_seed: u64) -> Self {
        FsAttackConfig {
            lambda,
            restarts: 10,
            conserved: BTreeSet::new(),
            mode: AttackMode::Binary,
            insertion_only: false,
            rng_seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FsAttackResult {
    pub x_star: Vec<f64>,
    pub q_value: f64,
    pub score: f64,
    pub flips: Vec<(usize, f64, f64)>,
    pub evaded: bool,
}

/// Squared l2 movement cost.
pub fn cost(x_m: &[f64], x: &[f64]) -> Result<f64, FsAttackError> {
    if x_m.len() != x.len() {
        return Err(FsAttackError::DimensionMismatch);
    }
    Ok(x_m
        .iter()
        .zip(x)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>())
}

/// Default grid: `points` evenly spaced values spanning each feature's
/// training min/max (collapsed to a single value for constant features).
pub fn grids_from_training(train: &[Vec<f64>], points: usize) -> Vec<Vec<f64>> {
    assert!(points >= 2 && !train.is_empty());
    let dim = train[0].len();
    (0..dim)
        .map(|i| {
            let lo = train.iter().map(|x| x[i]).fold(f64::INFINITY, f64::min);
            let hi = train.iter().map(|x| x[i]).fold(f64::NEG_INFINITY, f64::max);
            if lo == hi {
                vec![lo]
            } else {
                (0..points)
                    .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
                    .collect()
            }
        })
        .collect()
}

fn candidate_values(cfg: &FsAttackConfig, x_m: &[f64], i: usize, current: f64) -> Vec<f64> {
    let mut vals = match &cfg.mode {
        AttackMode::Binary => vec![0.0, 1.0],
        AttackMode::RealGrid { grids } => grids[i].clone(),
    };
    if cfg.insertion_only {
        vals.retain(|v| *v >= x_m[i]);
    }
    if !vals.iter().any(|v| *v == current) {
        vals.push(current);
    }
    vals
}

fn q_of(model: &dyn DecisionModel, x_m: &[f64], x: &[f64], lambda: f64) -> f64 {
    model.decision(x) + lambda * cost(x_m, x).expect("dimensions checked by caller")
}

/// Coordinate Greedy with random restarts. `threshold` is the classifier's
/// decision boundary; the result is evaded iff its score falls below it.
pub fn coordinate_greedy(
    model: &dyn DecisionModel,
    x_m: &[f64],
    cfg: &FsAttackConfig,
    threshold: f64,
) -> Result<FsAttackResult, FsAttackError> {
    let dim = x_m.len();
    if let AttackMode::RealGrid { grids } = &cfg.mode {
        if grids.len() != dim {
            return Err(FsAttackError::DimensionMismatch);
        }
    }
    if cfg.conserved.iter().any(|i| *i >= dim) {
        return Err(FsAttackError::DimensionMismatch);
    }
    let start_score = model.decision(x_m);
    if start_score < threshold {
        return Ok(FsAttackResult {
            x_star: x_m.to_vec(),
            q_value: start_score,
            score: start_score,
            flips: Vec::new(),
            evaded: true,
        });
    }

    let free: Vec<usize> = (0..dim).filter(|i| !cfg.conserved.contains(i)).collect();
    let mut best_x = x_m.to_vec();
    let mut best_q = q_of(model, x_m, x_m, cfg.lambda);

    for restart in 0..cfg.restarts.max(1) {
        let mut rng = rng_from(derive_seed(cfg.rng_seed, restart as u64));
        let mut x = x_m.to_vec();
        if restart > 0 {
            for &i in &free {
                if rng.gen::<f64>() < 0.5 {
                    let vals = candidate_values(cfg, x_m, i, x[i]);
                    x[i] = match &cfg.mode {
                        AttackMode::Binary => {
                            if vals.contains(&(1.0 - x_m[i])) {
                                1.0 - x_m[i]
                            } else {
                                x_m[i]
                            }
                        }
                        AttackMode::RealGrid { .. } => vals[rng.gen_range(0..vals.len())],
                    };
                }
            }
        }
        let mut q = q_of(model, x_m, &x, cfg.lambda);
        loop {
            let mut order = free.clone();
            order.shuffle(&mut rng);
            let mut improved = false;
            for &i in &order {
                let current = x[i];
                let mut coord_best = (q, current);
                for v in candidate_values(cfg, x_m, i, current) {
                    if v == current {
                        continue;
                    }
                    x[i] = v;
                    let cand = q_of(model, x_m, &x, cfg.lambda);
                    if cand < coord_best.0 {
                        coord_best = (cand, v);
                    }
                }
                x[i] = coord_best.1;
                if coord_best.0 < q {
                    q = coord_best.0;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        if q < best_q {
            best_q = q;
            best_x = x;
        }
    }

    let score = model.decision(&best_x);
    let flips = x_m
        .iter()
        .zip(&best_x)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, (a, b))| (i, *a, *b))
        .collect();
    Ok(FsAttackResult {
        x_star: best_x,
        q_value: best_q,
        score,
        flips,
        evaded: score < threshold,
    })
}

/// Elementwise `coordinate_greedy` with per-seed derived RNG streams, so the
/// result for a seed is independent of batch composition and order.
pub fn batch_attack(
    model: &dyn DecisionModel,
    seeds: &[Vec<f64>],
    cfg: &FsAttackConfig,
    threshold: f64,
) -> Result<Vec<FsAttackResult>, FsAttackError> {
    seeds
        .iter()
        .enumerate()
        .map(|(i, x_m)| {
            let mut per_seed = cfg.clone();
            per_seed.rng_seed = derive_seed(cfg.rng_seed, 0x5eed_0000 + i as u64);
            coordinate_greedy(model, x_m, &per_seed, threshold)
        })
        .collect()
}
