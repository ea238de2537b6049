//! Feature extraction: binary structural-path features (with optional path
//! consolidation) and PDFRate-style content features computed over raw bytes,
//! in real-valued (standardized) and binarized forms.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pdf::PdfDocument;
use crate::structure::{extract_structural_paths, StructureError};

#[derive(Debug, Error)]
pub enum FeaturizerError {
    #[error("no structural path passed the document-frequency threshold")]
    EmptyVocabulary,
    #[error("consolidation rule does not terminate: {0}")]
    RuleNotTerminating(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// A prefix-rewrite rule: a path whose prefix equals `matches` has that
/// prefix replaced by `replacement`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsolidationRule {
    pub matches: String,
    pub replacement: String,
}

/// Ordered rewrite rules, validated to be strictly length-decreasing (or
/// no-ops) so repeated application terminates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsolidationRules(Vec<ConsolidationRule>);

impl ConsolidationRules {
    pub fn empty() -> Self {
        ConsolidationRules(Vec::new())
    }

    pub fn new(rules: Vec<ConsolidationRule>) -> Result<Self, FeaturizerError> {
        for rule in &rules {
            if rule.replacement != rule.matches && rule.replacement.len() >= rule.matches.len() {
                return Err(FeaturizerError::RuleNotTerminating(format!(
                    "{} -> {}",
                    rule.matches, rule.replacement
                )));
            }
        }
        Ok(ConsolidationRules(rules))
    }

    pub fn rules(&self) -> &[ConsolidationRule] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Apply the first matching prefix rule, repeatedly until fixed point.
pub fn consolidate_path(path: &str, rules: &ConsolidationRules) -> String {
    let mut current = path.to_string();
    loop {
        let mut changed = false;
        for rule in rules.rules() {
            let hit = current == rule.matches
                || (current.starts_with(&rule.matches)
                    && current.as_bytes().get(rule.matches.len()) == Some(&b'/'));
            if hit {
                let next = format!("{}{}", rule.replacement, &current[rule.matches.len()..]);
                if next != current {
                    current = next;
                    changed = true;
                }
                break;
            }
        }
        if !changed {
            return current;
        }
    }
}

/// The ordered structural-path feature space, stored post-consolidation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVocabulary {
    pub paths: Vec<String>,
    pub rules: ConsolidationRules,
}

impl FeatureVocabulary {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn index_of(&self, path: &str) -> Option<usize> {
        self.paths.binary_search_by(|p| p.as_str().cmp(path)).ok()
    }
}

/// Rank consolidated paths by document frequency (ties lexicographic), keep
/// those at or above `min_doc_freq`, truncate to `max_size`, sort.
pub fn build_vocabulary(
    corpus: &[PdfDocument],
    max_size: usize,
    min_doc_freq: usize,
    rules: ConsolidationRules,
) -> Result<FeatureVocabulary, FeaturizerError> {
    assert!(max_size >= 1 && !corpus.is_empty());
    let mut doc_freq: BTreeMap<String, usize> = BTreeMap::new();
    for doc in corpus {
        let paths = extract_structural_paths(doc)?;
        let consolidated: BTreeSet<String> =
            paths.iter().map(|p| consolidate_path(p, &rules)).collect();
        for p in consolidated {
            *doc_freq.entry(p).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = doc_freq
        .into_iter()
        .filter(|(_, f)| *f >= min_doc_freq)
        .collect();
    if ranked.is_empty() {
        return Err(FeaturizerError::EmptyVocabulary);
    }
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(max_size);
    let mut paths: Vec<String> = ranked.into_iter().map(|(p, _)| p).collect();
    paths.sort();
    Ok(FeatureVocabulary { paths, rules })
}

/// Binary structural feature vector: 1 iff the document's consolidated path
/// set contains the vocabulary path.
pub fn extract_struct_features(
    doc: &PdfDocument,
    vocab: &FeatureVocabulary,
) -> Result<Vec<f64>, FeaturizerError> {
    let paths = extract_structural_paths(doc)?;
    let consolidated: BTreeSet<String> = paths
        .iter()
        .map(|p| consolidate_path(p, &vocab.rules))
        .collect();
    Ok(vocab
        .paths
        .iter()
        .map(|p| if consolidated.contains(p) { 1.0 } else { 0.0 })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContentFeatureKind {
    KeywordCount { token: String },
    FileSize,
    NonStandardBoxCount,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentFeature {
    pub name: String,
    pub kind: ContentFeatureKind,
}

/// Raw scans match literal bytes only; HexNormalized scans after decoding all
/// `#hh` name escapes document-wide (the hardened extraction mode).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanMode {
    Raw,
    HexNormalized,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentFeatureSpec {
    pub features: Vec<ContentFeature>,
    pub scan_mode: ScanMode,
}

impl ContentFeatureSpec {
    /// The default 24-feature spec.
    pub fn default_spec(scan_mode: ScanMode) -> Self {
        let kw = |name: &str, token: &str| ContentFeature {
            name: name.to_string(),
            kind: ContentFeatureKind::KeywordCount {
                token: token.to_string(),
            },
        };
        let features = vec![
            kw("count_page", "/Page"),
            kw("count_javascript", "/JavaScript"),
            kw("count_js", "/JS"),
            ContentFeature {
                name: "count_box_other".to_string(),
                kind: ContentFeatureKind::NonStandardBoxCount,
            },
            kw("count_obj", "obj"),
            kw("count_endobj", "endobj"),
            kw("count_stream", "stream"),
            kw("count_endstream", "endstream"),
            kw("count_endstream_diff", "endstream"),
            kw("count_trailer", "trailer"),
            kw("count_startxref", "startxref"),
            kw("count_xref", "xref"),
            kw("count_action", "/Action"),
            kw("count_openaction", "/OpenAction"),
            kw("count_acroform", "/AcroForm"),
            kw("count_font", "/Font"),
            kw("count_image", "/Image"),
            kw("count_filter", "/Filter"),
            kw("count_length", "/Length"),
            kw("count_names", "/Names"),
            kw("count_type", "/Type"),
            kw("count_s", "/S"),
            kw("count_kids", "/Kids"),
            ContentFeature {
                name: "size".to_string(),
                kind: ContentFeatureKind::FileSize,
            },
        ];
        ContentFeatureSpec {
            features,
            scan_mode,
        }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }
}

fn is_name_char(b: u8) -> bool {
    crate::pdf::is_name_regular(b)
}

/// Decode every `#hh` pair in the byte stream (the lexical form of name
/// escapes), leaving everything else untouched.
pub fn hex_normalize_bytes(bytes: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'#' && i + 2 < bytes.len() {
            let hex = |b: u8| (b as char).to_digit(16).map(|d| d as u8);
            if let (Some(h), Some(l)) = (hex(bytes[i + 1]), hex(bytes[i + 2])) {
                out.push(h * 16 + l);
                i += 3;
                continue;
            }
        }
        out.push(bytes[i]);
        i += 1;
    }
    out
}

/// Count non-overlapping keyword occurrences bounded by non-name characters.
fn count_keyword(bytes: &[u8], token: &[u8]) -> usize {
    if token.is_empty() || token.len() > bytes.len() {
        return 0;
    }
    let mut count = 0;
    let mut i = 0;
    while i + token.len() <= bytes.len() {
        if &bytes[i..i + token.len()] == token {
            let prev_ok = i == 0 || !is_name_char(bytes[i - 1]) || token[0] == b'/';
            let next_ok = i + token.len() == bytes.len() || !is_name_char(bytes[i + token.len()]);
            if prev_ok && next_ok {
                count += 1;
                i += token.len();
                continue;
            }
        }
        i += 1;
    }
    count
}

/// Count /MediaBox arrays whose (width, height) differ from US Letter (612x792).
fn count_nonstandard_boxes(bytes: &[u8]) -> usize {
    let token = b"/MediaBox";
    let mut count = 0;
    let mut i = 0;
    while i + token.len() <= bytes.len() {
        if &bytes[i..i + token.len()] == token
            && (i + token.len() == bytes.len() || !is_name_char(bytes[i + token.len()]))
        {
            if let Some((w, h)) = parse_box(&bytes[i + token.len()..]) {
                if (w - 612.0).abs() > 1e-9 || (h - 792.0).abs() > 1e-9 {
                    count += 1;
                }
            }
            i += token.len();
            continue;
        }
        i += 1;
    }
    count
}

fn parse_box(bytes: &[u8]) -> Option<(f64, f64)> {
    let mut i = 0;
    while i < bytes.len() && bytes[i].is_ascii_whitespace() {
        i += 1;
    }
    if bytes.get(i) != Some(&b'[') {
        return None;
    }
    i += 1;
    let mut nums = Vec::new();
    for _ in 0..4 {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        let start = i;
        while i < bytes.len() && matches!(bytes[i], b'0'..=b'9' | b'.' | b'-' | b'+') {
            i += 1;
        }
        let text = std::str::from_utf8(&bytes[start..i]).ok()?;
        nums.push(text.parse::<f64>().ok()?);
    }
    Some((nums[2] - nums[0], nums[3] - nums[1]))
}

/// Real-valued content features over raw file bytes.
pub fn extract_content_features(bytes: &[u8], spec: &ContentFeatureSpec) -> Vec<f64> {
    let normalized;
    let scan: &[u8] = match spec.scan_mode {
        ScanMode::Raw => bytes,
        ScanMode::HexNormalized => {
            normalized = hex_normalize_bytes(bytes);
            &normalized
        }
    };
    spec.features
        .iter()
        .map(|f| match &f.kind {
            ContentFeatureKind::KeywordCount { token } => {
                count_keyword(scan, token.as_bytes()) as f64
            }
            ContentFeatureKind::FileSize => bytes.len() as f64,
            ContentFeatureKind::NonStandardBoxCount => count_nonstandard_boxes(scan) as f64,
        })
        .collect()
}

/// Per-feature mean/stdev fitted on training data only. A zero-variance
/// column stores stdev 1 so standardization maps it to all zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub stdev: Vec<f64>,
}

pub fn fit_standardizer(train: &[Vec<f64>]) -> Standardizer {
    assert!(!train.is_empty());
    let dim = train[0].len();
    let n = train.len() as f64;
    let mut mean = vec![0.0; dim];
    for v in train {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = vec![0.0; dim];
    for v in train {
        for ((s, x), m) in var.iter_mut().zip(v).zip(&mean) {
            *s += (x - m) * (x - m);
        }
    }
    let stdev = var
        .iter()
        .map(|s| {
            let sd = (s / n).sqrt();
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    Standardizer { mean, stdev }
}

pub fn apply_standardizer(s: &Standardizer, v: &[f64]) -> Vec<f64> {
    v.iter()
        .zip(&s.mean)
        .zip(&s.stdev)
        .map(|((x, m), sd)| (x - m) / sd)
        .collect()
}

/// 0 stays 0, anything else becomes 1. Operates on raw (unstandardized)
/// content values; idempotent.
pub fn binarize(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| if *x == 0.0 { 0.0 } else { 1.0 }).collect()
}
