//! Iterative adversarial retraining and robustness evaluation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::attacks::{
    gp_attack, hex_obfuscate, mimicry_attack, FileClassifier, GpConfig, MimicryVariant,
    MutationTrace, HEX_TABLE,
};
use crate::fs_attack::{coordinate_greedy, FsAttackConfig};
use crate::learner::{compute_roc, LearnerError, RocCurve, SvmParams};
use crate::oracle::Oracle;
use crate::pdf::{serialize_document, PdfDocument};
use crate::rng::derive_seed;

use super::corpus::Sample;
use super::pipeline::{dataset, Pipeline};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum AttackSpec {
    /// Coordinate Greedy in feature space; conserved constraints and the
    /// insertion-only mode live inside the config.
    FeatureSpace(FsAttackConfig),
    Gp(GpConfig),
    Mimicry {
        variant: MimicryVariant,
        n_targets: usize,
        rng_seed: u64,
    },
    Hex,
}

impl AttackSpec {
    pub fn label(&self) -> String {
        match self {
            AttackSpec::FeatureSpace(cfg) => {
                if !cfg.conserved.is_empty() {
                    "fs-conserved".to_string()
                } else if cfg.insertion_only {
                    "fs-insert-only".to_string()
                } else {
                    "fs".to_string()
                }
            }
            AttackSpec::Gp(_) => "gp".to_string(),
            AttackSpec::Mimicry { variant, .. } => match variant {
                MimicryVariant::Plain => "mimicry".to_string(),
                MimicryVariant::Plus => "mimicry-plus".to_string(),
            },
            AttackSpec::Hex => "hex".to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed_id: String,
    pub evaded: bool,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustnessResult {
    pub attack: String,
    pub model: String,
    pub outcomes: Vec<SeedOutcome>,
    pub robustness: f64,
}

impl RobustnessResult {
    fn from_outcomes(attack: String, model: String, outcomes: Vec<SeedOutcome>) -> Self {
        let held = outcomes.iter().filter(|o| !o.evaded).count();
        let robustness = if outcomes.is_empty() {
            1.0
        } else {
            held as f64 / outcomes.len() as f64
        };
        RobustnessResult {
            attack,
            model,
            outcomes,
            robustness,
        }
    }
}

/// Shared mutable state for attacks that learn across seeds.
#[derive(Debug, Default)]
pub struct AttackState {
    pub trace_pool: Vec<MutationTrace>,
}

/// Attack a single seed against the pipeline. `evaded` for feature-space
/// attacks means the optimized vector scores benign; for file-level attacks
/// it additionally requires the oracle to confirm the payload survived.
/// Returns the evading feature vector when there is one.
fn attack_seed(
    pipeline: &Pipeline,
    seed: &Sample,
    attack: &AttackSpec,
    stream: u64,
    oracle: &Oracle,
    donors: &[PdfDocument],
    state: &mut AttackState,
) -> (SeedOutcome, Option<Vec<f64>>) {
    let not_attackable = SeedOutcome {
        seed_id: seed.id.clone(),
        evaded: false,
        score: f64::INFINITY,
    };
    match attack {
        AttackSpec::FeatureSpace(cfg) => {
            let Some(x_m) = pipeline.features_of_doc(&seed.doc) else {
                return (not_attackable, None);
            };
            let mut per_seed = cfg.clone();
            per_seed.rng_seed = derive_seed(cfg.rng_seed, stream);
            match coordinate_greedy(&pipeline.model, &x_m, &per_seed, pipeline.threshold) {
                Ok(result) => {
                    let outcome = SeedOutcome {
                        seed_id: seed.id.clone(),
                        evaded: result.evaded,
                        score: result.score,
                    };
                    let vector = result.evaded.then_some(result.x_star);
                    (outcome, vector)
                }
                Err(_) => (not_attackable, None),
            }
        }
        AttackSpec::Gp(cfg) => {
            let mut per_seed = cfg.clone();
            per_seed.rng_seed = derive_seed(cfg.rng_seed, stream);
            match gp_attack(
                &seed.id,
                &seed.doc,
                pipeline,
                oracle,
                donors,
                &per_seed,
                &mut state.trace_pool,
            ) {
                Ok(outcome) => {
                    let vector = if outcome.evaded {
                        outcome
                            .best_variant
                            .as_deref()
                            .and_then(|b| pipeline.features_of_bytes(b))
                    } else {
                        None
                    };
                    (
                        SeedOutcome {
                            seed_id: seed.id.clone(),
                            evaded: outcome.evaded,
                            score: outcome.best_score,
                        },
                        vector,
                    )
                }
                Err(_) => (not_attackable, None),
            }
        }
        AttackSpec::Mimicry {
            variant,
            n_targets,
            rng_seed,
        } => match mimicry_attack(
            &seed.id,
            &seed.doc,
            donors,
            pipeline,
            oracle,
            *variant,
            *n_targets,
            derive_seed(*rng_seed, stream),
        ) {
            Ok(outcome) => {
                let vector = if outcome.evaded {
                    outcome
                        .best_variant
                        .as_deref()
                        .and_then(|b| pipeline.features_of_bytes(b))
                } else {
                    None
                };
                (
                    SeedOutcome {
                        seed_id: seed.id.clone(),
                        evaded: outcome.evaded,
                        score: outcome.best_score,
                    },
                    vector,
                )
            }
            Err(_) => (not_attackable, None),
        },
        AttackSpec::Hex => {
            let bytes = serialize_document(&seed.doc);
            match hex_obfuscate(&bytes, &HEX_TABLE) {
                Ok(obfuscated) => {
                    let score = pipeline.score_bytes(&obfuscated);
                    let evaded =
                        score < pipeline.threshold && oracle.assess(&obfuscated).is_malicious();
                    (
                        SeedOutcome {
                            seed_id: seed.id.clone(),
                            evaded,
                            score,
                        },
                        evaded
                            .then(|| pipeline.features_of_bytes(&obfuscated))
                            .flatten(),
                    )
                }
                Err(_) => (not_attackable, None),
            }
        }
    }
}

pub fn evaluate_robustness(
    pipeline: &Pipeline,
    model_name: &str,
    seeds: &[&Sample],
    attack: &AttackSpec,
    oracle: &Oracle,
    donors: &[PdfDocument],
) -> RobustnessResult {
    let mut state = AttackState::default();
    let outcomes = seeds
        .iter()
        .enumerate()
        .map(|(i, seed)| {
            attack_seed(pipeline, seed, attack, i as u64, oracle, donors, &mut state).0
        })
        .collect();
    RobustnessResult::from_outcomes(attack.label(), model_name.to_string(), outcomes)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub new_points: usize,
    pub train_size: usize,
    pub seed_robustness: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RetrainConfig {
    pub max_iterations: usize,
    pub params: SvmParams,
}

/// Iterative adversarial retraining: attack every retraining seed, add the
/// evading feature vectors as malicious points (exact duplicates against the
/// accumulated set are dropped), refit, repeat until a fixed point or the
/// iteration cap.
pub fn retrain_iteratively(
    pipeline: &mut Pipeline,
    train: &[Sample],
    seeds: &[&Sample],
    attack: &AttackSpec,
    oracle: &Oracle,
    donors: &[PdfDocument],
    cfg: &RetrainConfig,
) -> Result<Vec<IterationStats>, LearnerError> {
    let (mut xs, mut ys) = dataset(pipeline, train);
    let mut seen: BTreeSet<Vec<u64>> = xs
        .iter()
        .map(|x| x.iter().map(|v| v.to_bits()).collect())
        .collect();
    let mut history = Vec::new();
    for iteration in 1..=cfg.max_iterations {
        let mut state = AttackState::default();
        let mut evading: Vec<Vec<f64>> = Vec::new();
        let mut evaded_count = 0usize;
        for (i, seed) in seeds.iter().enumerate() {
            let stream = derive_seed(iteration as u64, i as u64);
            let (outcome, vector) =
                attack_seed(pipeline, seed, attack, stream, oracle, donors, &mut state);
            if outcome.evaded {
                evaded_count += 1;
            }
            if let Some(x) = vector {
                evading.push(x);
            }
        }
        let mut new_points = 0usize;
        for x in evading {
            let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
            if seen.insert(key) {
                xs.push(x);
                ys.push(1.0);
                new_points += 1;
            }
        }
        history.push(IterationStats {
            iteration,
            new_points,
            train_size: xs.len(),
            seed_robustness: 1.0 - evaded_count as f64 / seeds.len().max(1) as f64,
        });
        if new_points == 0 {
            break;
        }
        pipeline.refit(&xs, &ys, &cfg.params)?;
    }
    Ok(history)
}

/// Clean-data evaluation: ROC over the test split plus accuracy at the
/// pipeline threshold.
pub fn evaluate_clean(
    pipeline: &Pipeline,
    test: &[Sample],
) -> Result<(RocCurve, f64), LearnerError> {
    let (xs, ys) = dataset(pipeline, test);
    let scores: Vec<f64> = xs.iter().map(|x| pipeline.score_features(x)).collect();
    let roc = compute_roc(&scores, &ys)?;
    let correct = scores
        .iter()
        .zip(&ys)
        .filter(|(s, y)| (**s >= pipeline.threshold) == (**y > 0.0))
        .count();
    Ok((roc, correct as f64 / ys.len().max(1) as f64))
}
