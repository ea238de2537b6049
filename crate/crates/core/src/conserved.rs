//! Conserved-feature discovery: per-seed deletion and replacement passes
//! against the behavior oracle, Forward Elimination into a uniform set, and
//! projections onto the consolidated-path and binarized-content spaces.
//!
//! Features are keyed by canonical text (structural path or content feature
//! name) so analyses serialize directly and merge across feature spaces.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::featurizer::{
    binarize, consolidate_path, extract_content_features, extract_struct_features,
    ConsolidationRules, ContentFeatureSpec, FeatureVocabulary,
};
use crate::oracle::Oracle;
use crate::pdf::{serialize_document, PdfDocument, PdfValue};
use crate::structure::{delete_at_path, replace_at_path, value_at_path, Donor};

#[derive(Debug, thiserror::Error)]
pub enum ConservedError {
    #[error("seed {0} is not malicious per the oracle")]
    SeedNotMalicious(String),
    #[error("donor pool is empty")]
    EmptyDonorPool,
    #[error(transparent)]
    Structure(#[from] crate::structure::StructureError),
    #[error(transparent)]
    Featurizer(#[from] crate::featurizer::FeaturizerError),
}

/// Per-seed outcome: S = conserved candidates, O = non-conserved, D[j] =
/// features flipped 1->0 as a side effect of deleting j.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedAnalysis {
    pub seed_id: String,
    pub s: BTreeSet<String>,
    pub o: BTreeSet<String>,
    pub d: BTreeMap<String, BTreeSet<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservedReport {
    pub analyses: Vec<SeedAnalysis>,
    pub uniform: BTreeSet<String>,
    pub beta: f64,
    pub removal_log: Vec<(String, String)>,
}

/// Deletion pass: delete each vocabulary feature active in the seed; the
/// seed's maliciousness must survive the deletion for the feature to be
/// non-conserved. An oracle Error counts as loss of maliciousness (a crashed
/// file does not deliver its payload).
pub fn analyze_seed_deletion(
    seed_id: &str,
    doc: &PdfDocument,
    vocab: &FeatureVocabulary,
    oracle: &Oracle,
) -> Result<SeedAnalysis, ConservedError> {
    let baseline = serialize_document(doc);
    if !oracle.assess(&baseline).is_malicious() {
        return Err(ConservedError::SeedNotMalicious(seed_id.to_string()));
    }
    let base = extract_struct_features(doc, vocab)?;
    let active: Vec<usize> = (0..vocab.len()).filter(|&j| base[j] == 1.0).collect();

    let mut s = BTreeSet::new();
    let mut o = BTreeSet::new();
    let mut d = BTreeMap::new();
    for &j in &active {
        let path = &vocab.paths[j];
        let variant = match delete_at_path(doc, path) {
            Ok(v) => v,
            // consolidated vocabularies can list paths absent as raw paths
            Err(crate::structure::StructureError::PathAbsent(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        let verdict = oracle.assess(&serialize_document(&variant));
        if verdict.is_malicious() {
            o.insert(path.clone());
        } else {
            s.insert(path.clone());
        }
        let after = extract_struct_features(&variant, vocab)?;
        let dependents: BTreeSet<String> = active
            .iter()
            .filter(|&&k| k != j && after[k] == 0.0)
            .map(|&k| vocab.paths[k].clone())
            .collect();
        d.insert(path.clone(), dependents);
    }
    Ok(SeedAnalysis {
        seed_id: seed_id.to_string(),
        s,
        o,
        d,
    })
}

/// Replacement pass: substitute each preliminary-conserved feature's objects
/// with a benign donor value; if the payload survives the substitution, the
/// feature was not actually conserved. Donor selection: first pool value of
/// the same type as the replaced entry, else Null.
pub fn refine_by_replacement(
    doc: &PdfDocument,
    prelim: &SeedAnalysis,
    donor_pool: &[PdfValue],
    oracle: &Oracle,
) -> Result<SeedAnalysis, ConservedError> {
    if donor_pool.is_empty() {
        return Err(ConservedError::EmptyDonorPool);
    }
    let mut refined = prelim.clone();
    for path in prelim.s.iter() {
        let null = PdfValue::Null;
        let current = value_at_path(doc, path).unwrap_or(&null);
        let donor = donor_pool
            .iter()
            .find(|v| v.type_label() == current.type_label())
            .unwrap_or(&null);
        let variant = match replace_at_path(doc, path, Donor::bare(donor)) {
            Ok(v) => v,
            Err(crate::structure::StructureError::PathAbsent(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        if oracle.assess(&serialize_document(&variant)).is_malicious() {
            refined.s.remove(path);
            refined.o.insert(path.clone());
        }
    }
    Ok(refined)
}

/// Forward Elimination: merge per-seed sets into one uniform conserved set,
/// removing each feature (plus its merged dependents) whose non-conserved
/// evidence outweighs its conserved evidence by factor `beta`. Candidates are
/// visited in lexicographic order over a frozen copy of the merged set;
/// removed features mask later checks.
pub fn forward_elimination(analyses: &[SeedAnalysis], beta: f64) -> ConservedReport {
    assert!(beta > 0.0);
    let mut s: BTreeSet<String> = analyses.iter().flat_map(|a| a.s.iter().cloned()).collect();
    let mut merged_d: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for a in analyses {
        for (j, deps) in &a.d {
            merged_d.entry(j.clone()).or_default().extend(deps.iter().cloned());
        }
    }
    let frozen: Vec<String> = s.iter().cloned().collect();
    let mut q: BTreeSet<String> = BTreeSet::new();
    let mut removal_log = Vec::new();
    for j in &frozen {
        if q.contains(j) {
            continue;
        }
        let in_o = analyses.iter().filter(|a| a.o.contains(j)).count();
        let in_s = analyses.iter().filter(|a| a.s.contains(j)).count();
        if in_o as f64 >= beta * in_s as f64 {
            let deps = merged_d.get(j).cloned().unwrap_or_default();
            let reason = format!(
                "non-conserved in {in_o} seeds vs conserved in {in_s} (beta {beta}); removed with dependents {deps:?}"
            );
            s.remove(j);
            q.insert(j.clone());
            for dep in &deps {
                s.remove(dep);
                q.insert(dep.clone());
            }
            removal_log.push((j.clone(), reason));
        }
    }
    ConservedReport {
        analyses: analyses.to_vec(),
        uniform: s,
        beta,
        removal_log,
    }
}

/// Image of the uniform set under path consolidation.
pub fn project_to_consolidated(
    report: &ConservedReport,
    rules: &ConsolidationRules,
) -> BTreeSet<String> {
    report
        .uniform
        .iter()
        .map(|p| consolidate_path(p, rules))
        .collect()
}

/// Project structural conserved sets onto binarized content features: a
/// content feature is conserved for a seed when deleting one of the seed's
/// conserved paths flips it 1->0; content features active in the seed but
/// never flipped are the seed's non-conserved evidence. The projected
/// per-seed sets then go through Forward Elimination.
pub fn project_to_content_binary(
    seeds: &[(String, PdfDocument)],
    analyses: &[SeedAnalysis],
    spec: &ContentFeatureSpec,
    beta: f64,
) -> ConservedReport {
    assert_eq!(seeds.len(), analyses.len());
    let mut content_analyses = Vec::new();
    for ((seed_id, doc), analysis) in seeds.iter().zip(analyses) {
        let base = binarize(&extract_content_features(&serialize_document(doc), spec));
        let mut flipped: BTreeSet<String> = BTreeSet::new();
        for path in analysis.s.iter() {
            let Ok(variant) = delete_at_path(doc, path) else {
                continue;
            };
            let after = binarize(&extract_content_features(&serialize_document(&variant), spec));
            for (k, feature) in spec.features.iter().enumerate() {
                if base[k] == 1.0 && after[k] == 0.0 {
                    flipped.insert(feature.name.clone());
                }
            }
        }
        let o: BTreeSet<String> = spec
            .features
            .iter()
            .enumerate()
            .filter(|(k, f)| base[*k] == 1.0 && !flipped.contains(&f.name))
            .map(|(_, f)| f.name.clone())
            .collect();
        content_analyses.push(SeedAnalysis {
            seed_id: seed_id.clone(),
            s: flipped,
            o,
            d: BTreeMap::new(),
        });
    }
    forward_elimination(&content_analyses, beta)
}
