//! Reverse mimicry: inject a self-contained marker-bearing payload into
//! benign files, minimizing structural deviation from the benign original.

use crate::oracle::{Oracle, Verdict};
use crate::pdf::{serialize_document, PdfDocument, PdfName, PdfValue};
use crate::structure::{graft_entry, Donor};

#[derive(Debug, Clone)]
pub struct ReverseMimicryOutcome {
    /// (variant bytes, oracle verdict) per successfully injected target.
    pub variants: Vec<(Vec<u8>, Verdict)>,
    /// Indices of targets where the injection path did not exist.
    pub skipped: Vec<usize>,
}

fn is_self_contained(value: &PdfValue) -> bool {
    let mut refs = Vec::new();
    crate::pdf::walk_value_refs(value, &mut refs);
    refs.is_empty()
}

pub fn reverse_mimicry(
    targets: &[PdfDocument],
    payload: &PdfValue,
    parent_path: &str,
    key: &PdfName,
    oracle: &Oracle,
) -> ReverseMimicryOutcome {
    assert!(
        is_self_contained(payload),
        "reverse-mimicry payload must not reference other objects"
    );
    let mut variants = Vec::new();
    let mut skipped = Vec::new();
    for (i, target) in targets.iter().enumerate() {
        match graft_entry(target, parent_path, key, Donor::bare(payload)) {
            Ok(doc) => {
                let bytes = serialize_document(&doc);
                let verdict = oracle.assess(&bytes);
                variants.push((bytes, verdict));
            }
            Err(_) => skipped.push(i),
        }
    }
    ReverseMimicryOutcome { variants, skipped }
}
