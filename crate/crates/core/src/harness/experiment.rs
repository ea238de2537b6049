//! Experiment orchestration: config, conserved-analysis driver, defense
//! construction, attack matrix evaluation, and report persistence.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attacks::{GpConfig, MimicryVariant};
use crate::conserved::{
    analyze_seed_deletion, forward_elimination, refine_by_replacement, ConservedError,
    ConservedReport,
};
use crate::featurizer::{consolidate_path, FeatureVocabulary};
use crate::fs_attack::FsAttackConfig;
use crate::learner::{RocCurve, SvmParams};
use crate::oracle::{Oracle, SyntheticOracleConfig};
use crate::pdf::{parse_document, serialize_document, Dict, PdfName, PdfValue};

use super::corpus::{generate_corpus, Corpus, CorpusConfig, Sample};
use super::pipeline::{train_pipeline, ClassifierKind, Pipeline};
use super::retrain::{
    evaluate_clean, evaluate_robustness, retrain_iteratively, AttackSpec, IterationStats,
    RetrainConfig, RobustnessResult,
};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Learner(#[from] crate::learner::LearnerError),
    #[error(transparent)]
    Conserved(#[from] ConservedError),
}

/// The oracle for a corpus: synthetic by default, or the external command
/// adapter when PDFARMOR_ORACLE_CMD is set.
pub fn resolve_oracle(config: &SyntheticOracleConfig) -> Oracle {
    match std::env::var("PDFARMOR_ORACLE_CMD") {
        Ok(cmd) if !cmd.is_empty() => Oracle::external(&cmd),
        _ => Oracle::synthetic(config.clone()),
    }
}

/// Benign replacement donors for the conserved-feature replacement pass:
/// one value per common type, none of them reference-valued or payload-like.
pub fn default_donor_pool() -> Vec<PdfValue> {
    vec![
        PdfValue::Stream(crate::pdf::PdfStream {
            dict: Dict::new(),
            data: b"benign filler".to_vec(),
        }),
        PdfValue::Dictionary(
            [(PdfName::new("/Filler"), PdfValue::String(b"x".to_vec()))]
                .into_iter()
                .collect(),
        ),
        PdfValue::name("/GoTo"),
        PdfValue::Numeric(0.0),
        PdfValue::String(b"filler".to_vec()),
    ]
}

/// Appendix-style conserved analysis over the retraining seeds: deletion
/// pass, replacement pass, Forward Elimination.
pub fn find_conserved(
    corpus: &Corpus,
    vocab: &FeatureVocabulary,
    oracle: &Oracle,
    beta: f64,
) -> Result<ConservedReport, ConservedError> {
    let donor_pool = default_donor_pool();
    let mut analyses = Vec::new();
    for seed in corpus.retrain_seeds() {
        let prelim = analyze_seed_deletion(&seed.id, &seed.doc, vocab, oracle)?;
        analyses.push(refine_by_replacement(
            &seed.doc,
            &prelim,
            &donor_pool,
            oracle,
        )?);
    }
    Ok(forward_elimination(&analyses, beta))
}

/// Uniform conserved paths mapped into a pipeline vocabulary's index space
/// (consolidating first when the vocabulary has rules).
pub fn conserved_indices(report: &ConservedReport, vocab: &FeatureVocabulary) -> BTreeSet<usize> {
    report
        .uniform
        .iter()
        .filter_map(|p| vocab.index_of(&consolidate_path(p, &vocab.rules)))
        .collect()
}

/// The JavaScript-involving subset of a conserved set (the expert-knowledge
/// defense variant).
pub fn js_subset(paths: &BTreeSet<String>) -> BTreeSet<String> {
    paths
        .iter()
        .filter(|p| {
            let lower = p.to_ascii_lowercase();
            p.contains("JavaScript") || p.contains("/JS") || lower.contains("javascript") || {
                // content feature names
                lower.contains("_js")
            }
        })
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefenseKind {
    None,
    Rar,
    Fsr,
    Cfr,
    CfrJs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub corpus: CorpusConfig,
    pub classifier: String,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub defense: DefenseKind,
    /// Attack labels: fs | fs-conserved | fs-insert-only | gp | mimicry |
    /// mimicry-plus | hex
    pub attacks: Vec<String>,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub rng_seed: u64,
    pub output_dir: PathBuf,
}

fn default_c() -> f64 {
    12.0
}
fn default_gamma() -> f64 {
    0.0025
}
fn default_tol() -> f64 {
    1e-3
}
fn default_iterations() -> usize {
    10
}
fn default_lambda() -> f64 {
    0.05
}
fn default_beta() -> f64 {
    3.0
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path)?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if ClassifierKind::parse(&self.classifier).is_none() {
            return Err(ExperimentError::Config(format!(
                "unknown classifier {:?}",
                self.classifier
            )));
        }
        for attack in &self.attacks {
            if parse_attack(attack, 0, BTreeSet::new(), 0, self.lambda).is_none() {
                return Err(ExperimentError::Config(format!("unknown attack {attack:?}")));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> SvmParams {
        SvmParams {
            c: self.c,
            gamma: self.gamma,
            tol: self.tol,
            ..SvmParams::default()
        }
    }
}

/// Map an attack label to a spec; `conserved` feeds the fs-conserved
/// constraint set and `lambda` the feature-space movement cost.
pub fn parse_attack(
    label: &str,
    dim: usize,
    conserved: BTreeSet<usize>,
    rng_seed: u64,
    lambda: f64,
) -> Option<AttackSpec> {
    let _ = dim;
    match label {
        "fs" => Some(AttackSpec::FeatureSpace(FsAttackConfig::binary(
            lambda, rng_seed,
        ))),
        "fs-conserved" => {
            let mut cfg = FsAttackConfig::binary(lambda, rng_seed);
            cfg.conserved = conserved;
            Some(AttackSpec::FeatureSpace(cfg))
        }
        "fs-insert-only" => {
            let mut cfg = FsAttackConfig::binary(lambda, rng_seed);
            cfg.insertion_only = true;
            Some(AttackSpec::FeatureSpace(cfg))
        }
        "gp" => Some(AttackSpec::Gp(GpConfig::new(rng_seed))),
        "mimicry" => Some(AttackSpec::Mimicry {
            variant: MimicryVariant::Plain,
            n_targets: 30,
            rng_seed,
        }),
        "mimicry-plus" => Some(AttackSpec::Mimicry {
            variant: MimicryVariant::Plus,
            n_targets: 30,
            rng_seed,
        }),
        "hex" => Some(AttackSpec::Hex),
        _ => None,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub classifier: String,
    pub defense: DefenseKind,
    pub clean_auc: f64,
    pub clean_accuracy: f64,
    pub retrain_history: Vec<IterationStats>,
    pub robustness: Vec<RobustnessResult>,
    pub conserved_uniform: Vec<String>,
}

/// Full pipeline: generate -> train -> (conserved) -> defend -> evaluate.
/// Writes summary.json, robustness.csv, roc_clean.csv, model.json, and
/// conserved.json under the configured output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    cfg.validate()?;
    let kind = ClassifierKind::parse(&cfg.classifier).expect("validated");
    let corpus = generate_corpus(&cfg.corpus);
    let oracle = resolve_oracle(&corpus.oracle_config);
    let params = cfg.params();
    let mut pipeline = train_pipeline(kind, &corpus.train, &params)?;
    let donors = corpus.benign_train_docs();

    // conserved analysis always runs on the unconsolidated structural space
    let analysis_vocab = match (&pipeline.kind, &pipeline.vocab) {
        (ClassifierKind::Sl2013, Some(v)) => v.clone(),
        _ => {
            let sl = train_pipeline(ClassifierKind::Sl2013, &corpus.train, &params)?;
            sl.vocab.expect("structural pipeline has vocabulary")
        }
    };
    let report = find_conserved(&corpus, &analysis_vocab, &oracle, cfg.beta)?;

    let retrain_cfg = RetrainConfig {
        max_iterations: cfg.max_iterations,
        params: params.clone(),
    };
    let seeds = corpus.retrain_seeds();
    let conserved_for = |paths: &BTreeSet<String>| -> BTreeSet<usize> {
        let vocab = pipeline.vocab.as_ref().unwrap_or(&analysis_vocab);
        paths
            .iter()
            .filter_map(|p| vocab.index_of(&consolidate_path(p, &vocab.rules)))
            .collect()
    };
    let defense_attack = match cfg.defense {
        DefenseKind::None => None,
        DefenseKind::Rar => Some(AttackSpec::Gp(GpConfig::new(cfg.rng_seed))),
        DefenseKind::Fsr => Some(AttackSpec::FeatureSpace(FsAttackConfig::binary(
            cfg.lambda,
            cfg.rng_seed,
        ))),
        DefenseKind::Cfr => {
            let mut fs = FsAttackConfig::binary(cfg.lambda, cfg.rng_seed);
            fs.conserved = conserved_for(&report.uniform);
            Some(AttackSpec::FeatureSpace(fs))
        }
        DefenseKind::CfrJs => {
            let mut fs = FsAttackConfig::binary(cfg.lambda, cfg.rng_seed);
            fs.conserved = conserved_for(&js_subset(&report.uniform));
            Some(AttackSpec::FeatureSpace(fs))
        }
    };
    let retrain_history = match defense_attack {
        Some(attack) => retrain_iteratively(
            &mut pipeline,
            &corpus.train,
            &seeds,
            &attack,
            &oracle,
            &donors,
            &retrain_cfg,
        )?,
        None => Vec::new(),
    };

    let (roc, accuracy) = evaluate_clean(&pipeline, &corpus.test)?;
    let test_seeds = corpus.test_seeds();
    let model_name = format!("{}-{:?}", kind.label(), cfg.defense);
    let mut robustness = Vec::new();
    for label in &cfg.attacks {
        let attack = parse_attack(
            label,
            pipeline.dim(),
            conserved_indices(&report, pipeline.vocab.as_ref().unwrap_or(&analysis_vocab)),
            crate::rng::derive_seed(cfg.rng_seed, 0xa77ac4),
            cfg.lambda,
        )
        .expect("validated");
        robustness.push(evaluate_robustness(
            &pipeline,
            &model_name,
            &test_seeds,
            &attack,
            &oracle,
            &donors,
        ));
    }

    let out = ExperimentReport {
        classifier: kind.label().to_string(),
        defense: cfg.defense,
        clean_auc: roc.auc,
        clean_accuracy: accuracy,
        retrain_history,
        robustness,
        conserved_uniform: report.uniform.iter().cloned().collect(),
    };
    persist_report(cfg, &out, &roc, &pipeline, &report)?;
    Ok(out)
}

pub fn write_roc_csv(path: &Path, roc: &RocCurve) -> std::io::Result<()> {
    let mut file = fs::File::create(path)?;
    writeln!(file, "threshold,fpr,tpr")?;
    for p in &roc.points {
        writeln!(file, "{},{},{}", p.threshold, p.fpr, p.tpr)?;
    }
    Ok(())
}

fn persist_report(
    cfg: &ExperimentConfig,
    report: &ExperimentReport,
    roc: &RocCurve,
    pipeline: &Pipeline,
    conserved: &ConservedReport,
) -> Result<(), ExperimentError> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(report)?,
    )?;
    fs::write(
        dir.join("model.json"),
        serde_json::to_string_pretty(pipeline)?,
    )?;
    fs::write(
        dir.join("conserved.json"),
        serde_json::to_string_pretty(conserved)?,
    )?;
    write_roc_csv(&dir.join("roc_clean.csv"), roc)?;
    let mut csv = String::from("attack,model,robustness\n");
    for r in &report.robustness {
        csv.push_str(&format!("{},{},{}\n", r.attack, r.model, r.robustness));
    }
    fs::write(dir.join("robustness.csv"), csv)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ManifestEntry {
    id: String,
    file: String,
    malicious: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    train: Vec<ManifestEntry>,
    test: Vec<ManifestEntry>,
    retrain_seed_ids: Vec<String>,
    test_seed_ids: Vec<String>,
    oracle_config: SyntheticOracleConfig,
}

pub fn save_corpus(dir: &Path, corpus: &Corpus) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir.join("train"))?;
    fs::create_dir_all(dir.join("test"))?;
    let mut manifest = Manifest {
        train: Vec::new(),
        test: Vec::new(),
        retrain_seed_ids: corpus.retrain_seed_ids.clone(),
        test_seed_ids: corpus.test_seed_ids.clone(),
        oracle_config: corpus.oracle_config.clone(),
    };
    for (split, samples, entries) in [
        ("train", &corpus.train, &mut manifest.train),
        ("test", &corpus.test, &mut manifest.test),
    ] {
        for s in samples {
            let file = format!("{split}/{}.pdf", s.id);
            fs::write(dir.join(&file), serialize_document(&s.doc))?;
            entries.push(ManifestEntry {
                id: s.id.clone(),
                file,
                malicious: s.malicious,
            });
        }
    }
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

pub fn load_corpus(dir: &Path) -> Result<Corpus, ExperimentError> {
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
    let read_split = |entries: &[ManifestEntry]| -> Result<Vec<Sample>, ExperimentError> {
        entries
            .iter()
            .map(|e| {
                let bytes = fs::read(dir.join(&e.file))?;
                let (doc, _) = parse_document(&bytes)
                    .map_err(|err| ExperimentError::Config(format!("{}: {err}", e.file)))?;
                Ok(Sample {
                    id: e.id.clone(),
                    doc,
                    malicious: e.malicious,
                })
            })
            .collect()
    };
    Ok(Corpus {
        train: read_split(&manifest.train)?,
        test: read_split(&manifest.test)?,
        retrain_seed_ids: manifest.retrain_seed_ids,
        test_seed_ids: manifest.test_seed_ids,
        oracle_config: manifest.oracle_config,
    })
}
