//! Structural and content featurizer tests.

use pdfarmor_core::featurizer::{
    apply_standardizer, binarize, build_vocabulary, consolidate_path, extract_content_features,
    extract_struct_features, fit_standardizer, hex_normalize_bytes, ConsolidationRule,
    ConsolidationRules, ContentFeatureSpec, ScanMode,
};
use pdfarmor_core::pdf::{Dict, ObjId, PdfDocument, PdfName, PdfValue};

fn dict(entries: Vec<(&str, PdfValue)>) -> Dict {
    entries
        .into_iter()
        .map(|(k, v)| (PdfName::new(k), v))
        .collect()
}

fn doc_with_paths(entries: Vec<(&str, PdfValue)>) -> PdfDocument {
    let mut doc = PdfDocument::new("1.7");
    doc.objects
        .insert(ObjId::new(1, 0), PdfValue::Dictionary(dict(entries)));
    doc.trailer
        .insert(PdfName::new("/Root"), PdfValue::reference(1));
    doc
}

fn page_tree_rules() -> ConsolidationRules {
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
    .unwrap()
}

#[test]
fn consolidation_collapses_page_recursion() {
    let rules = page_tree_rules();
    assert_eq!(consolidate_path("/Pages/Kids", &rules), "/Pages");
    // repeated application to a fixed point
    assert_eq!(consolidate_path("/Pages/Kids/Kids/Count", &rules), "/Pages/Count");
    assert_eq!(consolidate_path("/Pages/Kids/Type", &rules), "/Pages/Type");
    assert_eq!(consolidate_path("/OpenAction/S", &rules), "/OpenAction");
    // no partial-segment matches
    assert_eq!(consolidate_path("/Pages/KidsX", &rules), "/Pages/KidsX");
    assert_eq!(consolidate_path("/Other", &rules), "/Other");
}

#[test]
fn consolidation_projects_eight_conserved_paths_to_seven() {
    // the eight-path uniform trigger set collapses to seven under the
    // page-tree rules: /OpenAction/S merges into /OpenAction
    let eight = [
        "/Names",
        "/Names/JavaScript",
        "/Names/JavaScript/Names",
        "/Names/JavaScript/Names/JS",
        "/OpenAction",
        "/OpenAction/JS",
        "/OpenAction/S",
        "/Pages",
    ];
    let rules = page_tree_rules();
    let projected: std::collections::BTreeSet<String> = eight
        .iter()
        .map(|p| consolidate_path(p, &rules))
        .collect();
    assert_eq!(projected.len(), 7);
    assert!(!projected.contains("/OpenAction/S"));
    assert!(projected.contains("/OpenAction"));
}

#[test]
fn rule_validation_rejects_growing_rules() {
    assert!(ConsolidationRules::new(vec![ConsolidationRule {
        matches: "/A".to_string(),
        replacement: "/AB".to_string(),
    }])
    .is_err());
}

#[test]
fn vocabulary_min_doc_freq_and_ordering() {
    let common = || doc_with_paths(vec![("/Everywhere", PdfValue::Null)]);
    let rare = doc_with_paths(vec![
        ("/Everywhere", PdfValue::Null),
        ("/Rare", PdfValue::Null),
    ]);
    let docs = vec![common(), common(), common(), rare];
    let vocab = build_vocabulary(&docs, 10, 4, ConsolidationRules::empty()).unwrap();
    assert_eq!(vocab.paths, vec!["/Everywhere".to_string()]);
    // min_doc_freq 1 admits the rare path; storage is sorted
    let vocab = build_vocabulary(&docs, 10, 1, ConsolidationRules::empty()).unwrap();
    assert_eq!(
        vocab.paths,
        vec!["/Everywhere".to_string(), "/Rare".to_string()]
    );
    assert_eq!(vocab.index_of("/Rare"), Some(1));
    assert_eq!(vocab.index_of("/Nope"), None);
}

#[test]
fn vocabulary_truncates_by_frequency() {
    // /B is in two docs, /A and /C in one each; max_size 2 keeps /B plus the
    // lexicographically first of the tied rest
    let docs = vec![
        doc_with_paths(vec![("/A", PdfValue::Null), ("/B", PdfValue::Null)]),
        doc_with_paths(vec![("/C", PdfValue::Null), ("/B", PdfValue::Null)]),
    ];
    let vocab = build_vocabulary(&docs, 2, 1, ConsolidationRules::empty()).unwrap();
    assert_eq!(vocab.paths, vec!["/A".to_string(), "/B".to_string()]);
}

#[test]
fn struct_features_are_binary_indicators() {
    let docs = vec![
        doc_with_paths(vec![("/A", PdfValue::Null), ("/B", PdfValue::Null)]),
        doc_with_paths(vec![("/B", PdfValue::Null)]),
    ];
    let vocab = build_vocabulary(&docs, 10, 1, ConsolidationRules::empty()).unwrap();
    let x = extract_struct_features(&docs[1], &vocab).unwrap();
    assert_eq!(x, vec![0.0, 1.0]);
}

#[test]
fn keyword_counts_respect_name_boundaries() {
    let spec = ContentFeatureSpec::default_spec(ScanMode::Raw);
    let idx = |n: &str| spec.index_of(n).unwrap();
    let bytes = b"/JS /JSX /S /Subtype /JavaScript xref startxref obj endobj";
    let x = extract_content_features(bytes, &spec);
    assert_eq!(x[idx("count_js")], 1.0, "/JSX must not count as /JS");
    assert_eq!(x[idx("count_s")], 1.0, "/Subtype must not count as /S");
    assert_eq!(x[idx("count_javascript")], 1.0);
    // startxref contains xref but is not a standalone keyword
    assert_eq!(x[idx("count_xref")], 1.0);
    assert_eq!(x[idx("count_startxref")], 1.0);
    assert_eq!(x[idx("count_obj")], 1.0, "endobj must not count as obj");
    assert_eq!(x[idx("count_endobj")], 1.0);
    assert_eq!(x[idx("size")], bytes.len() as f64);
}

#[test]
fn nonstandard_box_counting() {
    let spec = ContentFeatureSpec::default_spec(ScanMode::Raw);
    let idx = spec.index_of("count_box_other").unwrap();
    let letter = b"/MediaBox [0 0 612 792]";
    assert_eq!(extract_content_features(letter, &spec)[idx], 0.0);
    let a4 = b"/MediaBox [0 0 595 842] /MediaBox [0 0 612 792] /MediaBox [10 10 622 802]";
    // A4 differs; the offset letter box has the same width/height
    assert_eq!(extract_content_features(a4, &spec)[idx], 1.0);
}

#[test]
fn hex_normalization_decodes_escapes() {
    assert_eq!(hex_normalize_bytes(b"/#4a#53"), b"/JS");
    assert_eq!(hex_normalize_bytes(b"no escapes"), b"no escapes");
    // invalid escapes pass through
    assert_eq!(hex_normalize_bytes(b"#zz #4"), b"#zz #4");
    let spec_raw = ContentFeatureSpec::default_spec(ScanMode::Raw);
    let spec_norm = ContentFeatureSpec::default_spec(ScanMode::HexNormalized);
    let js = spec_raw.index_of("count_js").unwrap();
    let obfuscated = b"/#4a#53 something";
    assert_eq!(extract_content_features(obfuscated, &spec_raw)[js], 0.0);
    assert_eq!(extract_content_features(obfuscated, &spec_norm)[js], 1.0);
}

#[test]
fn standardizer_round_trip_and_degenerate_columns() {
    let train = vec![vec![1.0, 5.0], vec![3.0, 5.0]];
    let s = fit_standardizer(&train);
    assert_eq!(s.mean, vec![2.0, 5.0]);
    assert_eq!(s.stdev, vec![1.0, 1.0]);
    assert_eq!(apply_standardizer(&s, &[2.0, 5.0]), vec![0.0, 0.0]);
    assert_eq!(apply_standardizer(&s, &[3.0, 6.0]), vec![1.0, 1.0]);
}

#[test]
fn binarize_is_idempotent() {
    let v = vec![0.0, 2.0, -3.0, 0.5];
    let b = binarize(&v);
    assert_eq!(b, vec![0.0, 1.0, 1.0, 1.0]);
    assert_eq!(binarize(&b), b);
}

#[test]
fn default_spec_has_24_features() {
    let spec = ContentFeatureSpec::default_spec(ScanMode::Raw);
    assert_eq!(spec.len(), 24);
}
