//! Mimicry content injection: merge a malicious seed with benign target
//! files so its feature profile drifts toward the benign class. Plain picks
//! the best-scoring merge and only then asks the oracle; Plus verifies every
//! merge's functionality first and selects among the survivors.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{AttackError, AttackOutcome, FileClassifier};
use crate::oracle::Oracle;
use crate::pdf::{serialize_document, PdfDocument, PdfName};
use crate::rng::rng_from;
use crate::structure::{graft_entry, Donor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MimicryVariant {
    Plain,
    Plus,
}

/// Graft every top-level Catalog entry of `target` into `seed`. Colliding
/// keys keep the seed's entry; the donor subtree lands under a fresh sibling
/// key instead, so the seed's payload is never displaced.
pub fn merge_with_target(seed: &PdfDocument, target: &PdfDocument) -> PdfDocument {
    let Some(root) = target.root_id() else {
        return seed.clone();
    };
    let Some(catalog) = target.get(root).and_then(|v| v.as_dict()).cloned() else {
        return seed.clone();
    };
    let mut out = seed.clone();
    let mut fresh = 0usize;
    for (key, value) in catalog.iter() {
        let seed_catalog = out
            .root_id()
            .and_then(|r| out.get(r))
            .and_then(|v| v.as_dict());
        let graft_key = match seed_catalog {
            Some(d) if d.contains_key(key.decoded()) => {
                let mut k;
                loop {
                    k = format!("/M{fresh}");
                    fresh += 1;
                    if !d.contains_key(&k) {
                        break;
                    }
                }
                PdfName::new(k)
            }
            _ => key.clone(),
        };
        if let Ok(next) = graft_entry(&out, "", &graft_key, Donor::from_doc(target, value)) {
            out = next;
        }
    }
    out
}

pub fn mimicry_attack(
    seed_id: &str,
    seed: &PdfDocument,
    benign_corpus: &[PdfDocument],
    classifier: &dyn FileClassifier,
    oracle: &Oracle,
    variant: MimicryVariant,
    n_targets: usize,
    rng_seed: u64,
) -> Result<AttackOutcome, AttackError> {
    if benign_corpus.len() < n_targets || n_targets == 0 {
        return Err(AttackError::NoBenignTargets);
    }
    if !oracle.assess(&serialize_document(seed)).is_malicious() {
        return Err(AttackError::SeedNotMalicious(seed_id.to_string()));
    }
    let threshold = classifier.threshold();

    let targets: Vec<usize> = match variant {
        MimicryVariant::Plain => {
            let mut indices: Vec<usize> = (0..benign_corpus.len()).collect();
            indices.shuffle(&mut rng_from(rng_seed));
            indices.truncate(n_targets);
            indices
        }
        MimicryVariant::Plus => {
            let mut scored: Vec<(usize, f64)> = benign_corpus
                .iter()
                .enumerate()
                .map(|(i, doc)| (i, classifier.score_bytes(&serialize_document(doc))))
                .collect();
            scored.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            scored.into_iter().take(n_targets).map(|(i, _)| i).collect()
        }
    };

    let merged: Vec<(Vec<u8>, f64)> = targets
        .iter()
        .map(|&t| {
            let bytes = serialize_document(&merge_with_target(seed, &benign_corpus[t]));
            let score = classifier.score_bytes(&bytes);
            (bytes, score)
        })
        .collect();
    let lowest = merged
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
        .map(|(i, _)| i)
        .expect("n_targets > 0");

    match variant {
        MimicryVariant::Plain => {
            let (bytes, score) = &merged[lowest];
            let verdict = oracle.assess(bytes);
            Ok(AttackOutcome {
                seed_id: seed_id.to_string(),
                evaded: *score < threshold && verdict.is_malicious(),
                best_variant: Some(bytes.clone()),
                best_score: *score,
                oracle_verdict: verdict,
                generations_used: 1,
                candidates_tried: merged.len(),
            })
        }
        MimicryVariant::Plus => {
            let mut functional: Vec<(usize, crate::oracle::Verdict)> = Vec::new();
            for (i, (bytes, _)) in merged.iter().enumerate() {
                let verdict = oracle.assess(bytes);
                if verdict.is_malicious() {
                    functional.push((i, verdict));
                }
            }
            match functional
                .into_iter()
                .min_by(|a, b| merged[a.0].1.partial_cmp(&merged[b.0].1).unwrap())
            {
                Some((i, verdict)) => {
                    let (bytes, score) = &merged[i];
                    Ok(AttackOutcome {
                        seed_id: seed_id.to_string(),
                        evaded: *score < threshold,
                        best_variant: Some(bytes.clone()),
                        best_score: *score,
                        oracle_verdict: verdict,
                        generations_used: 1,
                        candidates_tried: merged.len(),
                    })
                }
                None => {
                    // no merge kept the payload alive; report the best score
                    let (bytes, score) = &merged[lowest];
                    Ok(AttackOutcome {
                        seed_id: seed_id.to_string(),
                        evaded: false,
                        best_variant: Some(bytes.clone()),
                        best_score: *score,
                        oracle_verdict: oracle.assess(bytes),
                        generations_used: 1,
                        candidates_tried: merged.len(),
                    })
                }
            }
        }
    }
}
