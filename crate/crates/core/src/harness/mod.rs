//! Experiment harness: synthetic corpus, classifier pipelines, adversarial
//! retraining, and experiment orchestration.

pub mod corpus;
pub mod experiment;
pub mod pipeline;
pub mod retrain;

pub use corpus::{generate_benign, generate_corpus, generate_malicious, Corpus, CorpusConfig, Sample};
pub use experiment::{
    conserved_indices, default_donor_pool, find_conserved, js_subset, load_corpus, parse_attack,
    resolve_oracle, run_experiment, save_corpus, write_roc_csv, DefenseKind, ExperimentConfig,
    ExperimentError, ExperimentReport,
};
pub use pipeline::{
    dataset, default_params, hidost_rules, restricted_pipeline, train_pipeline, ClassifierKind,
    Pipeline,
};
pub use retrain::{
    evaluate_clean, evaluate_robustness, retrain_iteratively, AttackSpec, AttackState,
    IterationStats, RetrainConfig, RobustnessResult, SeedOutcome,
};
