//! Classifier pipelines: feature space + trained SVM + decision threshold.

use serde::{Deserialize, Serialize};

use crate::attacks::FileClassifier;
use crate::featurizer::{
    apply_standardizer, binarize, build_vocabulary, extract_content_features,
    extract_struct_features, fit_standardizer, ConsolidationRule, ConsolidationRules,
    ContentFeatureSpec, FeatureVocabulary, ScanMode, Standardizer,
};
use crate::learner::{train_svm, LearnerError, SvmModel, SvmParams};
use crate::pdf::{parse_document, serialize_document, PdfDocument};

use super::corpus::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassifierKind {
    Sl2013,
    Hidost,
    PdfrateR,
    PdfrateB,
}

impl ClassifierKind {
    pub fn is_structural(&self) -> bool {
        matches!(self, ClassifierKind::Sl2013 | ClassifierKind::Hidost)
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sl2013" => Some(ClassifierKind::Sl2013),
            "hidost" => Some(ClassifierKind::Hidost),
            "pdfrate-r" | "pdfrater" => Some(ClassifierKind::PdfrateR),
            "pdfrate-b" | "pdfrateb" => Some(ClassifierKind::PdfrateB),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ClassifierKind::Sl2013 => "sl2013",
            ClassifierKind::Hidost => "hidost",
            ClassifierKind::PdfrateR => "pdfrate-r",
            ClassifierKind::PdfrateB => "pdfrate-b",
        }
    }
}

/// Default consolidation for the Hidost pipeline: fold the page-tree
/// recursion and the OpenAction dispatch entry into their parents.
pub fn hidost_rules() -> ConsolidationRules {
    ConsolidationRules::new(vec![
        ConsolidationRule {
            matches: "/Pages/Kids".to_string(),
            replacement: "/Pages".to_string(),
        },
        ConsolidationRule {
            matches: "/OpenAction/S".to_string(),
            replacement: "/OpenAction".to_string(),
        },
    ])
    .expect("static rules are valid")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Pipeline {
    pub kind: ClassifierKind,
    pub vocab: Option<FeatureVocabulary>,
    pub content_spec: Option<ContentFeatureSpec>,
    pub standardizer: Option<Standardizer>,
    pub model: SvmModel,
    pub threshold: f64,
}

impl Pipeline {
    pub fn dim(&self) -> usize {
        match self.kind {
            ClassifierKind::Sl2013 | ClassifierKind::Hidost => {
                self.vocab.as_ref().map_or(0, |v| v.len())
            }
            _ => self.content_spec.as_ref().map_or(0, |s| s.len()),
        }
    }

    /// Feature vector in the model's input space (post standardize/binarize).
    pub fn features_of_doc(&self, doc: &PdfDocument) -> Option<Vec<f64>> {
        match self.kind {
            ClassifierKind::Sl2013 | ClassifierKind::Hidost => {
                extract_struct_features(doc, self.vocab.as_ref()?).ok()
            }
            _ => self.features_of_bytes(&serialize_document(doc)),
        }
    }

    pub fn features_of_bytes(&self, bytes: &[u8]) -> Option<Vec<f64>> {
        match self.kind {
            ClassifierKind::Sl2013 | ClassifierKind::Hidost => {
                let (doc, _) = parse_document(bytes).ok()?;
                extract_struct_features(&doc, self.vocab.as_ref()?).ok()
            }
            ClassifierKind::PdfrateR => {
                let raw = extract_content_features(bytes, self.content_spec.as_ref()?);
                Some(apply_standardizer(self.standardizer.as_ref()?, &raw))
            }
            ClassifierKind::PdfrateB => {
                let raw = extract_content_features(bytes, self.content_spec.as_ref()?);
                Some(binarize(&raw))
            }
        }
    }

    pub fn score_features(&self, x: &[f64]) -> f64 {
        self.model.score(x).unwrap_or(f64::INFINITY)
    }

    /// Retrain the SVM on a new labeled feature set, keeping the feature
    /// space fixed.
    pub fn refit(
        &mut self,
        xs: &[Vec<f64>],
        ys: &[f64],
        params: &SvmParams,
    ) -> Result<(), LearnerError> {
        self.model = train_svm(xs, ys, params, self.kind.label())?.model;
        Ok(())
    }
}

impl FileClassifier for Pipeline {
    fn score_bytes(&self, bytes: &[u8]) -> f64 {
        match self.features_of_bytes(bytes) {
            Some(x) => self.score_features(&x),
            None => f64::INFINITY,
        }
    }

    fn threshold(&self) -> f64 {
        self.threshold
    }
}

pub fn default_params(kind: ClassifierKind) -> SvmParams {
    if kind.is_structural() {
        SvmParams {
            c: 12.0,
            gamma: 0.0025,
            ..SvmParams::default()
        }
    } else {
        SvmParams {
            c: 10.0,
            gamma: 0.01,
            ..SvmParams::default()
        }
    }
}

/// Labels as +-1 and feature matrix for a sample set under a fixed pipeline.
pub fn dataset(pipeline: &Pipeline, samples: &[Sample]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in samples {
        if let Some(x) = pipeline.features_of_doc(&s.doc) {
            xs.push(x);
            ys.push(if s.malicious { 1.0 } else { -1.0 });
        }
    }
    (xs, ys)
}

/// Build the feature space from the training split and fit the SVM.
pub fn train_pipeline(
    kind: ClassifierKind,
    train: &[Sample],
    params: &SvmParams,
) -> Result<Pipeline, LearnerError> {
    let mut pipeline = Pipeline {
        kind,
        vocab: None,
        content_spec: None,
        standardizer: None,
        // placeholder; replaced by refit below
        model: SvmModel {
            support_vectors: vec![],
            dual_coefs: vec![],
            bias: 0.0,
            gamma: params.gamma,
            c: params.c,
            space_tag: kind.label().to_string(),
            schema_version: 1,
        },
        threshold: 0.0,
    };
    match kind {
        ClassifierKind::Sl2013 | ClassifierKind::Hidost => {
            let docs: Vec<PdfDocument> = train.iter().map(|s| s.doc.clone()).collect();
            let rules = if kind == ClassifierKind::Hidost {
                hidost_rules()
            } else {
                ConsolidationRules::empty()
            };
            let vocab =
                build_vocabulary(&docs, 961, 4, rules).map_err(|_| LearnerError::DegenerateData)?;
            pipeline.vocab = Some(vocab);
        }
        ClassifierKind::PdfrateR => {
            let spec = ContentFeatureSpec::default_spec(ScanMode::Raw);
            let raw: Vec<Vec<f64>> = train
                .iter()
                .map(|s| extract_content_features(&serialize_document(&s.doc), &spec))
                .collect();
            pipeline.standardizer = Some(fit_standardizer(&raw));
            pipeline.content_spec = Some(spec);
        }
        ClassifierKind::PdfrateB => {
            pipeline.content_spec = Some(ContentFeatureSpec::default_spec(ScanMode::Raw));
        }
    }
    let (xs, ys) = dataset(&pipeline, train);
    pipeline.refit(&xs, &ys, params)?;
    Ok(pipeline)
}

/// A structural pipeline restricted to an explicit path list (the
/// conserved-features-only classifier).
pub fn restricted_pipeline(
    base: &Pipeline,
    paths: Vec<String>,
    train: &[Sample],
    params: &SvmParams,
) -> Result<Pipeline, LearnerError> {
    assert!(base.kind.is_structural());
    let mut sorted = paths;
    sorted.sort();
    sorted.dedup();
    let mut out = base.clone();
    out.vocab = Some(FeatureVocabulary {
        paths: sorted,
        rules: base.vocab.as_ref().expect("structural base").rules.clone(),
    });
    let (xs, ys) = dataset(&out, train);
    out.refit(&xs, &ys, params)?;
    Ok(out)
}
