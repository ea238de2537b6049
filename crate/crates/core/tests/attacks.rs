//! Realizable attack tests: GP mutation search, mimicry, reverse mimicry,
//! and hex name obfuscation.

use pdfarmor_core::attacks::{
    apply_trace, gp_attack, hex_obfuscate, mimicry_attack, reverse_mimicry, AttackError,
    FileClassifier, GpConfig, MimicryVariant, HEX_TABLE,
};
use pdfarmor_core::featurizer::{extract_content_features, ContentFeatureSpec, ScanMode};
use pdfarmor_core::oracle::{Oracle, SyntheticOracleConfig, Verdict};
use pdfarmor_core::pdf::{
    parse_document, serialize_document, Dict, ObjId, PdfDocument, PdfName, PdfStream, PdfValue,
};
use pdfarmor_core::structure::value_at_path;

const MARKER: &[u8] = b"MARKER";

fn dict(entries: Vec<(&str, PdfValue)>) -> Dict {
    entries
        .into_iter()
        .map(|(k, v)| (PdfName::new(k), v))
        .collect()
}

fn malicious_doc() -> PdfDocument {
    let mut doc = PdfDocument::new("1.7");
    doc.objects.insert(
        ObjId::new(1, 0),
        PdfValue::Dictionary(dict(vec![
            ("/Type", PdfValue::name("/Catalog")),
            ("/Pages", PdfValue::reference(2)),
            (
                "/OpenAction",
                PdfValue::Dictionary(dict(vec![
                    ("/S", PdfValue::name("/JavaScript")),
                    ("/JS", PdfValue::reference(3)),
                ])),
            ),
            ("/Extra", PdfValue::Numeric(7.0)),
        ])),
    );
    doc.objects.insert(
        ObjId::new(2, 0),
        PdfValue::Dictionary(dict(vec![
            ("/Type", PdfValue::name("/Pages")),
            ("/Kids", PdfValue::Array(vec![])),
        ])),
    );
    doc.objects.insert(
        ObjId::new(3, 0),
        PdfValue::Stream(PdfStream {
            dict: Dict::new(),
            data: b"alert('MARKER');".to_vec(),
        }),
    );
    doc.trailer
        .insert(PdfName::new("/Root"), PdfValue::reference(1));
    doc
}

fn benign_doc(mark: bool) -> PdfDocument {
    let mut doc = PdfDocument::new("1.7");
    let mut catalog = vec![
        ("/Type", PdfValue::name("/Catalog")),
        ("/Pages", PdfValue::reference(2)),
    ];
    if mark {
        catalog.push(("/BenignMark", PdfValue::Boolean(true)));
    }
    doc.objects
        .insert(ObjId::new(1, 0), PdfValue::Dictionary(dict(catalog)));
    doc.objects.insert(
        ObjId::new(2, 0),
        PdfValue::Dictionary(dict(vec![
            ("/Type", PdfValue::name("/Pages")),
            ("/Kids", PdfValue::Array(vec![])),
        ])),
    );
    doc.trailer
        .insert(PdfName::new("/Root"), PdfValue::reference(1));
    doc
}

fn oracle() -> Oracle {
    Oracle::synthetic(SyntheticOracleConfig::default_config(MARKER))
}

/// Flags documents by presence (+1) or absence (-1) of one structural path.
struct PathWatcher {
    path: String,
    present_is_malicious: bool,
}

impl FileClassifier for PathWatcher {
    fn score_bytes(&self, bytes: &[u8]) -> f64 {
        let Ok((doc, _)) = parse_document(bytes) else {
            return f64::INFINITY;
        };
        let present = value_at_path(&doc, &self.path).is_some();
        if present == self.present_is_malicious {
            1.0
        } else {
            -1.0
        }
    }

    fn threshold(&self) -> f64 {
        0.0
    }
}

#[test]
fn gp_rejects_bad_inputs() {
    let classifier = PathWatcher {
        path: "/Extra".to_string(),
        present_is_malicious: true,
    };
    let mut pool = Vec::new();
    assert!(matches!(
        gp_attack(
            "s",
            &malicious_doc(),
            &classifier,
            &oracle(),
            &[],
            &GpConfig::new(0),
            &mut pool
        ),
        Err(AttackError::EmptyDonorPool)
    ));
    assert!(matches!(
        gp_attack(
            "s",
            &benign_doc(false),
            &classifier,
            &oracle(),
            &[benign_doc(false)],
            &GpConfig::new(0),
            &mut pool
        ),
        Err(AttackError::SeedNotMalicious(_))
    ));
}

#[test]
fn gp_deletes_the_telltale_path_and_keeps_the_payload() {
    let classifier = PathWatcher {
        path: "/Extra".to_string(),
        present_is_malicious: true,
    };
    let mut pool = Vec::new();
    let outcome = gp_attack(
        "s",
        &malicious_doc(),
        &classifier,
        &oracle(),
        &[benign_doc(false)],
        &GpConfig::new(1),
        &mut pool,
    )
    .unwrap();
    assert!(outcome.evaded, "GP failed against a one-path classifier");
    assert!(outcome.oracle_verdict.is_malicious());
    let bytes = outcome.best_variant.unwrap();
    let (variant, _) = parse_document(&bytes).unwrap();
    assert!(value_at_path(&variant, "/Extra").is_none());
    assert!(value_at_path(&variant, "/OpenAction/JS").is_some());
    assert_eq!(pool.len(), 1, "winning trace joins the pool");
    // replaying the stored trace reproduces an evading document
    let replay = apply_trace(&malicious_doc(), &[benign_doc(false)], &pool[0]);
    assert!(classifier.score_bytes(&serialize_document(&replay)) < 0.0);
}

#[test]
fn gp_returns_immediately_for_already_evading_seed() {
    let classifier = PathWatcher {
        path: "/NotThere".to_string(),
        present_is_malicious: true,
    };
    let mut pool = Vec::new();
    let outcome = gp_attack(
        "s",
        &malicious_doc(),
        &classifier,
        &oracle(),
        &[benign_doc(false)],
        &GpConfig::new(0),
        &mut pool,
    )
    .unwrap();
    assert!(outcome.evaded);
    assert_eq!(outcome.generations_used, 0);
}

#[test]
fn mimicry_grafts_benign_content_without_displacing_the_payload() {
    let classifier = PathWatcher {
        path: "/BenignMark".to_string(),
        present_is_malicious: false,
    };
    let seed = malicious_doc();
    let corpus = vec![benign_doc(true), benign_doc(false)];
    for variant in [MimicryVariant::Plain, MimicryVariant::Plus] {
        let outcome = mimicry_attack(
            "s",
            &seed,
            &corpus,
            &classifier,
            &oracle(),
            variant,
            2,
            5,
        )
        .unwrap();
        assert!(outcome.evaded, "{variant:?} should find the marked target");
        assert!(outcome.oracle_verdict.is_malicious());
        let (doc, _) = parse_document(&outcome.best_variant.unwrap()).unwrap();
        assert!(value_at_path(&doc, "/BenignMark").is_some());
        // colliding catalog keys land under fresh sibling keys
        assert!(value_at_path(&doc, "/OpenAction/JS").is_some());
    }
}

#[test]
fn mimicry_rejects_missing_targets() {
    let classifier = PathWatcher {
        path: "/BenignMark".to_string(),
        present_is_malicious: false,
    };
    assert!(matches!(
        mimicry_attack(
            "s",
            &malicious_doc(),
            &[benign_doc(true)],
            &classifier,
            &oracle(),
            MimicryVariant::Plain,
            2,
            0,
        ),
        Err(AttackError::NoBenignTargets)
    ));
}

#[test]
fn reverse_mimicry_turns_benign_files_malicious() {
    let payload = PdfValue::Dictionary(dict(vec![
        ("/S", PdfValue::name("/JavaScript")),
        ("/JS", PdfValue::String(b"alert('MARKER');".to_vec())),
    ]));
    let targets = vec![benign_doc(false), benign_doc(true)];
    let outcome = reverse_mimicry(
        &targets,
        &payload,
        "",
        &PdfName::new("/OpenAction"),
        &oracle(),
    );
    assert_eq!(outcome.variants.len(), 2);
    assert!(outcome.skipped.is_empty());
    for (bytes, verdict) in &outcome.variants {
        assert!(verdict.is_malicious());
        let (doc, _) = parse_document(bytes).unwrap();
        assert!(value_at_path(&doc, "/OpenAction/JS").is_some());
    }
    // a missing parent path is skipped, not fatal
    let outcome = reverse_mimicry(
        &targets,
        &payload,
        "/Nope",
        &PdfName::new("/OpenAction"),
        &oracle(),
    );
    assert!(outcome.variants.is_empty());
    assert_eq!(outcome.skipped, vec![0, 1]);
}

#[test]
#[should_panic(expected = "self-contained")]
fn reverse_mimicry_rejects_payloads_with_references() {
    let payload = PdfValue::Dictionary(dict(vec![("/JS", PdfValue::reference(3))]));
    reverse_mimicry(
        &[benign_doc(false)],
        &payload,
        "",
        &PdfName::new("/OpenAction"),
        &oracle(),
    );
}

#[test]
fn hex_obfuscation_blinds_raw_scans_only() {
    let seed = malicious_doc();
    let bytes = serialize_document(&seed);
    let obfuscated = hex_obfuscate(&bytes, &HEX_TABLE).unwrap();

    let raw = ContentFeatureSpec::default_spec(ScanMode::Raw);
    let norm = ContentFeatureSpec::default_spec(ScanMode::HexNormalized);
    let before_norm = extract_content_features(&bytes, &norm);
    let after_raw = extract_content_features(&obfuscated, &raw);
    let after_norm = extract_content_features(&obfuscated, &norm);
    for token in ["count_action", "count_filter", "count_javascript", "count_js", "count_s", "count_type"] {
        let k = raw.index_of(token).unwrap();
        assert_eq!(after_raw[k], 0.0, "{token} still visible to the raw scan");
        assert_eq!(after_norm[k], before_norm[k], "{token} changed under normalization");
    }
    // verdict is spelling-invariant
    assert_eq!(oracle().assess(&bytes), oracle().assess(&obfuscated));
    assert!(oracle().assess(&obfuscated).is_malicious());

    // obfuscation is visible in the raw bytes
    assert!(!obfuscated
        .windows(b"/JavaScript ".len())
        .any(|w| w == b"/JavaScript "));
}

#[test]
fn hex_obfuscation_rejects_unparseable_input() {
    assert!(hex_obfuscate(b"garbage", &HEX_TABLE).is_err());
}

#[test]
fn verdict_error_is_not_malicious() {
    assert!(!Verdict::Error("x".into()).is_malicious());
}
