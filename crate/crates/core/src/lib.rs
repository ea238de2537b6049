//! Toolkit for studying evasion attacks on PDF malware classifiers.
//!
//! The crate covers the full loop: parse a PDF subset into a mutable object
//! model, extract structural-path and content features, train SVM classifiers,
//! attack them in feature space (coordinate greedy) and at the file level
//! (GP mutation search, mimicry, reverse mimicry, hex-name obfuscation),
//! identify conserved features by functionality-preserving mutation analysis,
//! and harden models by iterative adversarial retraining. A deterministic
//! synthetic corpus generator and a pluggable behavior oracle make every
//! experiment reproducible from a single RNG seed.

pub mod pdf;
pub mod rng;
pub mod structure;
pub mod featurizer;
pub mod learner;
pub mod oracle;
pub mod fs_attack;
pub mod brute;
pub mod conserved;
pub mod attacks;
pub mod harness;
