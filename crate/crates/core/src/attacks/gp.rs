//! Genetic-programming file mutation attack. Variants are bred by deleting,
//! inserting, and swapping tree entries against a donor pool of benign
//! documents; fitness is the classifier score, and only benign-scoring
//! variants pay for an oracle call. Successful mutation traces persist in a
//! pool and seed later searches.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AttackError, AttackOutcome, FileClassifier};
use crate::oracle::Oracle;
use crate::pdf::{serialize_document, PdfDocument, PdfName};
use crate::rng::rng_from;
use crate::structure::{
    build_reduced_tree, delete_at_path, graft_entry, swap_entry, value_at_path, Donor,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GpConfig {
    pub population: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub fitness_threshold: f64,
    pub rng_seed: u64,
}

impl GpConfig {
    pub fn new(rng_seed: u64) -> Self {
        GpConfig {
            population: 48,
            generations: 20,
            mutation_rate: 0.1,
            fitness_threshold: 0.0,
            rng_seed,
        }
    }
}

/// One applied mutation. Donors are addressed by pool index so a trace can be
/// replayed against the same pool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceOp {
    Delete { path: String },
    Insert { parent: String, donor: usize, key: String },
    Swap { path: String, donor: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationTrace {
    pub ops: Vec<TraceOp>,
}

fn apply_op(doc: &PdfDocument, donors: &[PdfDocument], op: &TraceOp) -> Option<PdfDocument> {
    match op {
        TraceOp::Delete { path } => delete_at_path(doc, path).ok(),
        TraceOp::Insert { parent, donor, key } => {
            let donor_doc = donors.get(*donor)?;
            let root = donor_doc.root_id()?;
            let value = donor_doc.get(root)?.as_dict()?.get(key)?;
            graft_entry(
                doc,
                parent,
                &PdfName::new(key.clone()),
                Donor::from_doc(donor_doc, value),
            )
            .ok()
        }
        TraceOp::Swap { path, donor } => {
            let donor_doc = donors.get(*donor)?;
            swap_entry(doc, path, donor_doc, path).ok()
        }
    }
}

/// Replay a stored trace, skipping ops the document no longer supports.
/// Replaying against the trace's original seed and pool is lossless.
pub fn apply_trace(
    seed: &PdfDocument,
    donors: &[PdfDocument],
    trace: &MutationTrace,
) -> PdfDocument {
    let mut doc = seed.clone();
    for op in &trace.ops {
        if let Some(next) = apply_op(&doc, donors, op) {
            doc = next;
        }
    }
    doc
}

/// Mutate every distinct structural path independently with probability
/// `mutation_rate`; returns the mutant and the ops that actually applied.
fn mutate(
    doc: &PdfDocument,
    donors: &[PdfDocument],
    mutation_rate: f64,
    rng: &mut ChaCha8Rng,
) -> (PdfDocument, Vec<TraceOp>) {
    let paths: Vec<String> = match build_reduced_tree(doc) {
        Ok(tree) => {
            let mut seen = std::collections::BTreeSet::new();
            tree.nodes
                .iter()
                .skip(1)
                .filter(|n| !n.path.is_empty())
                .filter(|n| seen.insert(n.path.clone()))
                .map(|n| n.path.clone())
                .collect()
        }
        Err(_) => return (doc.clone(), Vec::new()),
    };
    let mut out = doc.clone();
    let mut ops = Vec::new();
    for path in paths {
        if rng.gen::<f64>() >= mutation_rate {
            continue;
        }
        let donor = rng.gen_range(0..donors.len());
        let op = match rng.gen_range(0..3u8) {
            0 => TraceOp::Delete { path: path.clone() },
            1 => insert_op(&path, donors, donor, rng),
            _ => {
                if value_at_path(&donors[donor], &path).is_some() {
                    TraceOp::Swap {
                        path: path.clone(),
                        donor,
                    }
                } else {
                    // no donor entry at this path: fall back to insertion
                    insert_op(&path, donors, donor, rng)
                }
            }
        };
        if let Some(next) = apply_op(&out, donors, &op) {
            out = next;
            ops.push(op);
        }
    }
    (out, ops)
}

fn insert_op(path: &str, donors: &[PdfDocument], donor: usize, rng: &mut ChaCha8Rng) -> TraceOp {
    let parent = match path.rfind('/') {
        Some(0) | None => String::new(),
        Some(i) => path[..i].to_string(),
    };
    let keys: Vec<String> = donors[donor]
        .root_id()
        .and_then(|r| donors[donor].get(r))
        .and_then(|v| v.as_dict())
        .map(|d| d.iter().map(|(k, _)| k.decoded().to_string()).collect())
        .unwrap_or_default();
    let key = if keys.is_empty() {
        "/X".to_string()
    } else {
        keys[rng.gen_range(0..keys.len())].clone()
    };
    TraceOp::Insert { parent, donor, key }
}

struct Candidate {
    doc: PdfDocument,
    trace: MutationTrace,
    score: f64,
    // false once the oracle has said the variant lost its payload
    viable: bool,
}

pub fn gp_attack(
    seed_id: &str,
    seed: &PdfDocument,
    classifier: &dyn FileClassifier,
    oracle: &Oracle,
    donors: &[PdfDocument],
    cfg: &GpConfig,
    trace_pool: &mut Vec<MutationTrace>,
) -> Result<AttackOutcome, AttackError> {
    if donors.is_empty() {
        return Err(AttackError::EmptyDonorPool);
    }
    let seed_bytes = serialize_document(seed);
    if !oracle.assess(&seed_bytes).is_malicious() {
        return Err(AttackError::SeedNotMalicious(seed_id.to_string()));
    }
    let threshold = classifier.threshold();
    let seed_score = classifier.score_bytes(&seed_bytes);
    if seed_score < threshold {
        return Ok(AttackOutcome {
            seed_id: seed_id.to_string(),
            evaded: true,
            best_variant: Some(seed_bytes.clone()),
            best_score: seed_score,
            oracle_verdict: oracle.assess(&seed_bytes),
            generations_used: 0,
            candidates_tried: 0,
        });
    }

    let mut rng = rng_from(cfg.rng_seed);
    let pool_snapshot = trace_pool.clone();
    let mut population: Vec<Candidate> = (0..cfg.population)
        .map(|_| {
            let (doc, trace) = if !pool_snapshot.is_empty() && rng.gen::<f64>() < 0.5 {
                let replay = &pool_snapshot[rng.gen_range(0..pool_snapshot.len())];
                (apply_trace(seed, donors, replay), replay.clone())
            } else {
                let (doc, ops) = mutate(seed, donors, cfg.mutation_rate, &mut rng);
                (doc, MutationTrace { ops })
            };
            Candidate {
                doc,
                trace,
                score: f64::INFINITY,
                viable: true,
            }
        })
        .collect();

    let mut candidates_tried = 0usize;
    let mut best: Option<(f64, PdfDocument, MutationTrace)> = None;
    for generation in 1..=cfg.generations {
        for cand in &mut population {
            cand.score = classifier.score_bytes(&serialize_document(&cand.doc));
        }
        candidates_tried += population.len();

        let mut benign_scored: Vec<usize> = (0..population.len())
            .filter(|&i| population[i].score < cfg.fitness_threshold)
            .collect();
        benign_scored
            .sort_by(|&a, &b| population[a].score.partial_cmp(&population[b].score).unwrap());
        for i in benign_scored {
            let bytes = serialize_document(&population[i].doc);
            let verdict = oracle.assess(&bytes);
            if verdict.is_malicious() {
                trace_pool.push(population[i].trace.clone());
                return Ok(AttackOutcome {
                    seed_id: seed_id.to_string(),
                    evaded: true,
                    best_variant: Some(bytes),
                    best_score: population[i].score,
                    oracle_verdict: verdict,
                    generations_used: generation,
                    candidates_tried,
                });
            }
            population[i].viable = false;
        }

        let mut parents: Vec<usize> = (0..population.len())
            .filter(|&i| population[i].viable)
            .collect();
        parents.sort_by(|&a, &b| population[a].score.partial_cmp(&population[b].score).unwrap());
        parents.truncate(cfg.population.div_ceil(2));
        if let Some(&lead) = parents.first() {
            let better = best
                .as_ref()
                .map_or(true, |(score, _, _)| population[lead].score < *score);
            if better {
                best = Some((
                    population[lead].score,
                    population[lead].doc.clone(),
                    population[lead].trace.clone(),
                ));
            }
        }
        if generation == cfg.generations {
            break;
        }

        let mut next: Vec<Candidate> = parents
            .iter()
            .map(|&i| Candidate {
                doc: population[i].doc.clone(),
                trace: population[i].trace.clone(),
                score: f64::INFINITY,
                viable: true,
            })
            .collect();
        if next.is_empty() {
            next.push(Candidate {
                doc: seed.clone(),
                trace: MutationTrace::default(),
                score: f64::INFINITY,
                viable: true,
            });
        }
        let mut slot = 0usize;
        while next.len() < cfg.population {
            let parent = &next[slot % parents.len().max(1)];
            let (doc, ops) = mutate(&parent.doc, donors, cfg.mutation_rate, &mut rng);
            let mut trace = parent.trace.clone();
            trace.ops.extend(ops);
            slot += 1;
            next.push(Candidate {
                doc,
                trace,
                score: f64::INFINITY,
                viable: true,
            });
        }
        // deterministic shuffle keeps parent/offspring interleaving unbiased
        next.shuffle(&mut rng);
        population = next;
    }

    let (best_score, best_doc, _trace) = best.unwrap_or((seed_score, seed.clone(), MutationTrace::default()));
    let bytes = serialize_document(&best_doc);
    Ok(AttackOutcome {
        seed_id: seed_id.to_string(),
        evaded: false,
        best_variant: Some(bytes.clone()),
        best_score,
        oracle_verdict: oracle.assess(&bytes),
        generations_used: cfg.generations,
        candidates_tried,
    })
}
