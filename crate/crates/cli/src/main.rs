//! pdfarmor: corpus generation, classifier training, conserved-feature
//! analysis, evasion attacks, adversarial retraining, and reporting.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};

use pdfarmor_core::conserved::ConservedReport;
use pdfarmor_core::featurizer::consolidate_path;
use pdfarmor_core::harness::{
    conserved_indices, dataset, evaluate_clean, evaluate_robustness, find_conserved,
    generate_corpus, load_corpus, parse_attack, resolve_oracle, retrain_iteratively,
    run_experiment, save_corpus, train_pipeline, write_roc_csv, ClassifierKind, Corpus,
    CorpusConfig, ExperimentConfig, Pipeline, RetrainConfig,
};
use pdfarmor_core::learner::{selected_features, train_linear_l1, SvmParams};
use pdfarmor_core::oracle::Verdict;
use pdfarmor_core::pdf::{Dict, PdfName, PdfValue};

#[derive(Parser)]
#[command(name = "pdfarmor", version, about = "PDF malware classifier hardening toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the deterministic synthetic corpus.
    GenCorpus {
        /// Output directory (train/, test/, manifest.json).
        #[arg(long)]
        out: PathBuf,
        /// Corpus config JSON; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the corpus rng seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Extract feature matrices for a corpus under a classifier's feature space.
    Extract {
        #[arg(long)]
        corpus: PathBuf,
        /// sl2013 | hidost | pdfrate-r | pdfrate-b
        #[arg(long)]
        classifier: String,
        /// Output JSON file (train/test matrices + labels + feature names).
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a classifier on the corpus training split.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        classifier: String,
        /// Output model JSON.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Conserved-feature analysis over the retraining seeds.
    FindConserved {
        #[arg(long)]
        corpus: PathBuf,
        /// Output conserved-report JSON.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 3.0)]
        beta: f64,
    },
    /// Run an evasion attack against a trained model over the test seeds.
    Attack {
        #[arg(long)]
        corpus: PathBuf,
        /// Trained model JSON from `train` or `retrain`.
        #[arg(long)]
        model: PathBuf,
        /// fs | fs-conserved | fs-insert-only | gp | mimicry | mimicry-plus |
        /// reverse-mimicry | hex
        #[arg(long)]
        kind: String,
        /// Conserved-report JSON (required for fs-conserved).
        #[arg(long)]
        conserved: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Movement-cost weight for feature-space attacks.
        #[arg(long, default_value_t = 0.05)]
        lambda: f64,
        /// Per-seed outcome JSON; robustness always prints to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iterative adversarial retraining against a proxy attack.
    Retrain {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        classifier: String,
        /// fs | fs-conserved | fs-insert-only | gp | mimicry | mimicry-plus | hex
        #[arg(long)]
        attack: String,
        #[arg(long)]
        conserved: Option<PathBuf>,
        /// Output model JSON.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        max_iterations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Movement-cost weight for feature-space attacks.
        #[arg(long, default_value_t = 0.05)]
        lambda: f64,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Clean-data evaluation: ROC/AUC and accuracy on the test split.
    Evaluate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// ROC CSV output path.
        #[arg(long)]
        roc: Option<PathBuf>,
    },
    /// Run a full experiment from a config file and write the report bundle.
    Report {
        #[arg(long)]
        config: PathBuf,
    },
    /// Overlap between l1-selected features and the conserved set.
    CompareL1 {
        #[arg(long)]
        corpus: PathBuf,
        /// Conserved-report JSON; computed from the corpus when omitted.
        #[arg(long)]
        conserved: Option<PathBuf>,
        #[arg(long, default_value_t = 0.01)]
        reg: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Config errors (bad files, unknown names) exit 2; runtime errors exit 3.
enum CliError {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

fn config_err(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Config(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {what} {}", path.display()))
        .map_err(config_err)?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing {what} {}", path.display()))
        .map_err(config_err)
}

fn save_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.into()))?;
    std::fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(CliError::Runtime)
}

fn read_corpus(dir: &Path) -> Result<Corpus, CliError> {
    load_corpus(dir)
        .with_context(|| format!("loading corpus from {}", dir.display()))
        .map_err(config_err)
}

fn parse_kind(name: &str) -> Result<ClassifierKind, CliError> {
    ClassifierKind::parse(name)
        .ok_or_else(|| CliError::Config(anyhow!("unknown classifier {name:?}")))
}

fn svm_params(
    kind: ClassifierKind,
    c: Option<f64>,
    gamma: Option<f64>,
    tol: Option<f64>,
) -> SvmParams {
    let mut params = pdfarmor_core::harness::default_params(kind);
    if let Some(c) = c {
        params.c = c;
    }
    if let Some(g) = gamma {
        params.gamma = g;
    }
    if let Some(t) = tol {
        params.tol = t;
    }
    params
}

/// The SL2013 vocabulary used for conserved analysis (unconsolidated space).
fn analysis_vocab(
    corpus: &Corpus,
    params: &SvmParams,
) -> Result<pdfarmor_core::featurizer::FeatureVocabulary, CliError> {
    let sl = train_pipeline(ClassifierKind::Sl2013, &corpus.train, params)
        .context("training analysis vocabulary")?;
    Ok(sl.vocab.expect("structural pipeline has a vocabulary"))
}

fn conserved_set_for(
    report: Option<&ConservedReport>,
    pipeline: &Pipeline,
) -> BTreeSet<usize> {
    let (Some(report), Some(vocab)) = (report, pipeline.vocab.as_ref()) else {
        return BTreeSet::new();
    };
    conserved_indices(report, vocab)
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::GenCorpus { out, config, seed } => {
            let mut cfg: CorpusConfig = match config {
                Some(path) => load_json(&path, "corpus config")?,
                None => CorpusConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.rng_seed = seed;
            }
            let corpus = generate_corpus(&cfg);
            save_corpus(&out, &corpus).context("saving corpus")?;
            println!(
                "corpus: {} train, {} test, {} retrain seeds, {} test seeds -> {}",
                corpus.train.len(),
                corpus.test.len(),
                corpus.retrain_seed_ids.len(),
                corpus.test_seed_ids.len(),
                out.display()
            );
            Ok(())
        }
        Command::Extract {
            corpus,
            classifier,
            out,
        } => {
            let kind = parse_kind(&classifier)?;
            let corpus = read_corpus(&corpus)?;
            let params = svm_params(kind, None, None, None);
            let pipeline = train_pipeline(kind, &corpus.train, &params)
                .context("building feature space")?;
            let (train_x, train_y) = dataset(&pipeline, &corpus.train);
            let (test_x, test_y) = dataset(&pipeline, &corpus.test);
            let names: Vec<String> = match (&pipeline.vocab, &pipeline.content_spec) {
                (Some(v), _) => v.paths.clone(),
                (None, Some(s)) => s.features.iter().map(|f| f.name.clone()).collect(),
                _ => Vec::new(),
            };
            save_json(
                &out,
                &serde_json::json!({
                    "classifier": kind.label(),
                    "feature_names": names,
                    "train": { "x": train_x, "y": train_y },
                    "test": { "x": test_x, "y": test_y },
                }),
            )?;
            println!(
                "extracted {} train / {} test vectors of dim {} -> {}",
                train_x.len(),
                test_x.len(),
                pipeline.dim(),
                out.display()
            );
            Ok(())
        }
        Command::Train {
            corpus,
            classifier,
            out,
            c,
            gamma,
            tol,
        } => {
            let kind = parse_kind(&classifier)?;
            let corpus = read_corpus(&corpus)?;
            let params = svm_params(kind, c, gamma, tol);
            let pipeline =
                train_pipeline(kind, &corpus.train, &params).context("training classifier")?;
            let (roc, accuracy) = evaluate_clean(&pipeline, &corpus.test)
                .context("evaluating trained classifier")?;
            save_json(&out, &pipeline)?;
            println!(
                "trained {}: AUC {:.4}, accuracy {:.4} -> {}",
                kind.label(),
                roc.auc,
                accuracy,
                out.display()
            );
            Ok(())
        }
        Command::FindConserved { corpus, out, beta } => {
            let corpus = read_corpus(&corpus)?;
            let params = svm_params(ClassifierKind::Sl2013, None, None, None);
            let vocab = analysis_vocab(&corpus, &params)?;
            let oracle = resolve_oracle(&corpus.oracle_config);
            let report = find_conserved(&corpus, &vocab, &oracle, beta)
                .context("conserved analysis")?;
            save_json(&out, &report)?;
            println!("conserved ({} paths) -> {}", report.uniform.len(), out.display());
            for path in &report.uniform {
                println!("  {path}");
            }
            Ok(())
        }
        Command::Attack {
            corpus,
            model,
            kind,
            conserved,
            seed,
            lambda,
            out,
        } => {
            let corpus = read_corpus(&corpus)?;
            let pipeline: Pipeline = load_json(&model, "model")?;
            let oracle = resolve_oracle(&corpus.oracle_config);
            let report: Option<ConservedReport> = conserved
                .map(|p| load_json(&p, "conserved report"))
                .transpose()?;
            if kind == "reverse-mimicry" {
                let result = run_reverse_mimicry(&corpus, &pipeline, &oracle);
                if let Some(out) = out {
                    save_json(&out, &result)?;
                }
                println!(
                    "reverse-mimicry: {} variants, {} malicious, {} evaded, robustness {:.4}",
                    result.total, result.malicious, result.evaded, result.robustness
                );
                return Ok(());
            }
            if kind == "fs-conserved" && report.is_none() {
                return Err(CliError::Config(anyhow!(
                    "--conserved is required for fs-conserved"
                )));
            }
            let spec = parse_attack(
                &kind,
                pipeline.dim(),
                conserved_set_for(report.as_ref(), &pipeline),
                seed,
                lambda,
            )
            .ok_or_else(|| CliError::Config(anyhow!("unknown attack kind {kind:?}")))?;
            let seeds = corpus.test_seeds();
            let donors = corpus.benign_train_docs();
            let result = evaluate_robustness(&pipeline, "model", &seeds, &spec, &oracle, &donors);
            if let Some(out) = out {
                save_json(&out, &result)?;
            }
            println!(
                "{} vs {}: robustness {:.4} ({} / {} seeds held)",
                result.attack,
                pipeline.kind.label(),
                result.robustness,
                result.outcomes.iter().filter(|o| !o.evaded).count(),
                result.outcomes.len()
            );
            Ok(())
        }
        Command::Retrain {
            corpus,
            classifier,
            attack,
            conserved,
            out,
            max_iterations,
            seed,
            lambda,
            c,
            gamma,
            tol,
        } => {
            let kind = parse_kind(&classifier)?;
            let corpus = read_corpus(&corpus)?;
            let params = svm_params(kind, c, gamma, tol);
            let mut pipeline =
                train_pipeline(kind, &corpus.train, &params).context("training classifier")?;
            let report: Option<ConservedReport> = conserved
                .map(|p| load_json(&p, "conserved report"))
                .transpose()?;
            if attack == "fs-conserved" && report.is_none() {
                return Err(CliError::Config(anyhow!(
                    "--conserved is required for fs-conserved"
                )));
            }
            let spec = parse_attack(
                &attack,
                pipeline.dim(),
                conserved_set_for(report.as_ref(), &pipeline),
                seed,
                lambda,
            )
            .ok_or_else(|| CliError::Config(anyhow!("unknown attack {attack:?}")))?;
            let oracle = resolve_oracle(&corpus.oracle_config);
            let seeds = corpus.retrain_seeds();
            let donors = corpus.benign_train_docs();
            let cfg = RetrainConfig {
                max_iterations,
                params,
            };
            let history = retrain_iteratively(
                &mut pipeline,
                &corpus.train,
                &seeds,
                &spec,
                &oracle,
                &donors,
                &cfg,
            )
            .context("retraining")?;
            save_json(&out, &pipeline)?;
            for h in &history {
                println!(
                    "iteration {}: {} new points, train size {}, seed robustness {:.4}",
                    h.iteration, h.new_points, h.train_size, h.seed_robustness
                );
            }
            println!("retrained {} -> {}", kind.label(), out.display());
            Ok(())
        }
        Command::Evaluate { corpus, model, roc } => {
            let corpus = read_corpus(&corpus)?;
            let pipeline: Pipeline = load_json(&model, "model")?;
            let (curve, accuracy) =
                evaluate_clean(&pipeline, &corpus.test).context("evaluating")?;
            if let Some(path) = roc {
                write_roc_csv(&path, &curve)
                    .with_context(|| format!("writing {}", path.display()))
                    .map_err(CliError::Runtime)?;
            }
            println!(
                "{}: AUC {:.4}, accuracy {:.4}",
                pipeline.kind.label(),
                curve.auc,
                accuracy
            );
            Ok(())
        }
        Command::Report { config } => {
            let cfg = ExperimentConfig::load(&config).map_err(config_err)?;
            let report = run_experiment(&cfg).context("running experiment")?;
            println!(
                "{} / {:?}: clean AUC {:.4}, accuracy {:.4}",
                report.classifier, report.defense, report.clean_auc, report.clean_accuracy
            );
            for r in &report.robustness {
                println!("  {} robustness {:.4}", r.attack, r.robustness);
            }
            println!("report bundle -> {}", cfg.output_dir.display());
            Ok(())
        }
        Command::CompareL1 {
            corpus,
            conserved,
            reg,
            out,
        } => {
            let corpus = read_corpus(&corpus)?;
            let params = svm_params(ClassifierKind::Sl2013, None, None, None);
            let pipeline = train_pipeline(ClassifierKind::Sl2013, &corpus.train, &params)
                .context("training structural feature space")?;
            let vocab = pipeline.vocab.as_ref().expect("structural vocabulary");
            let report: ConservedReport = match conserved {
                Some(path) => load_json(&path, "conserved report")?,
                None => {
                    let oracle = resolve_oracle(&corpus.oracle_config);
                    find_conserved(&corpus, vocab, &oracle, 3.0)
                        .context("conserved analysis")
                        .map_err(CliError::Runtime)?
                }
            };
            let (xs, ys) = dataset(&pipeline, &corpus.train);
            let model =
                train_linear_l1(&xs, &ys, reg, 2000, 1.0).context("training l1 model")?;
            let selected: Vec<String> = selected_features(&model)
                .into_iter()
                .map(|i| vocab.paths[i].clone())
                .collect();
            let conserved_paths: BTreeSet<String> = report
                .uniform
                .iter()
                .map(|p| consolidate_path(p, &vocab.rules))
                .collect();
            let overlap: Vec<String> = selected
                .iter()
                .filter(|p| conserved_paths.contains(*p))
                .cloned()
                .collect();
            println!(
                "l1 selected {} features; conserved {}; overlap {}",
                selected.len(),
                conserved_paths.len(),
                overlap.len()
            );
            for p in &overlap {
                println!("  {p}");
            }
            if let Some(out) = out {
                save_json(
                    &out,
                    &serde_json::json!({
                        "reg": reg,
                        "selected": selected,
                        "conserved": conserved_paths,
                        "overlap": overlap,
                    }),
                )?;
            }
            Ok(())
        }
    }
}

#[derive(serde::Serialize)]
struct ReverseMimicryReport {
    total: usize,
    malicious: usize,
    evaded: usize,
    skipped: usize,
    robustness: f64,
}

/// Inject a self-contained JavaScript OpenAction carrying the oracle marker
/// into every benign test document; a variant evades when it stays malicious
/// but scores benign.
fn run_reverse_mimicry(
    corpus: &Corpus,
    pipeline: &Pipeline,
    oracle: &pdfarmor_core::oracle::Oracle,
) -> ReverseMimicryReport {
    let marker = String::from_utf8_lossy(&corpus.oracle_config.marker).to_string();
    let payload = PdfValue::Dictionary(Dict::from_iter([
        (PdfName::new("/S"), PdfValue::name("/JavaScript")),
        (
            PdfName::new("/JS"),
            PdfValue::String(format!("app.alert('{marker}');").into_bytes()),
        ),
    ]));
    let targets: Vec<_> = corpus
        .test
        .iter()
        .filter(|s| !s.malicious)
        .map(|s| s.doc.clone())
        .collect();
    let outcome = pdfarmor_core::attacks::reverse_mimicry(
        &targets,
        &payload,
        "",
        &PdfName::new("/OpenAction"),
        oracle,
    );
    let mut malicious = 0usize;
    let mut evaded = 0usize;
    for (bytes, verdict) in &outcome.variants {
        if matches!(verdict, Verdict::Malicious(_)) {
            malicious += 1;
            let score = pipeline.score_features(
                &pipeline
                    .features_of_bytes(bytes)
                    .unwrap_or_else(|| vec![0.0; pipeline.dim()]),
            );
            if score < pipeline.threshold {
                evaded += 1;
            }
        }
    }
    let robustness = if malicious == 0 {
        1.0
    } else {
        1.0 - evaded as f64 / malicious as f64
    };
    ReverseMimicryReport {
        total: outcome.variants.len(),
        malicious,
        evaded,
        skipped: outcome.skipped.len(),
        robustness,
    }
}
