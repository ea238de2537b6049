//! File-level evasion attacks: GP mutation search, mimicry content
//! injection, reverse mimicry, and hex name obfuscation. All of them operate
//! on real documents, so evading variants are realizable by construction.

pub mod gp;
pub mod hex;
pub mod mimicry;
pub mod reverse;

use serde::{Deserialize, Serialize};

use crate::oracle::Verdict;

pub use gp::{apply_trace, gp_attack, GpConfig, MutationTrace, TraceOp};
pub use hex::{hex_obfuscate, HEX_TABLE};
pub use mimicry::{mimicry_attack, MimicryVariant};
pub use reverse::{reverse_mimicry, ReverseMimicryOutcome};

/// A trained classifier applied to whole files; implementations parse,
/// featurize, and score. Unassessable input must score +inf (never benign).
pub trait FileClassifier {
    fn score_bytes(&self, bytes: &[u8]) -> f64;
    fn threshold(&self) -> f64;
}

#[derive(Debug, thiserror::Error)]
pub enum AttackError {
    #[error("seed {0} is not malicious per the oracle")]
    SeedNotMalicious(String),
    #[error("donor pool is empty")]
    EmptyDonorPool,
    #[error("benign corpus smaller than the requested number of targets")]
    NoBenignTargets,
    #[error(transparent)]
    Structure(#[from] crate::structure::StructureError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub seed_id: String,
    pub evaded: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub best_variant: Option<Vec<u8>>,
    pub best_score: f64,
    pub oracle_verdict: Verdict,
    pub generations_used: usize,
    pub candidates_tried: usize,
}
