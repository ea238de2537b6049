//! Conserved-feature discovery tests: deletion pass, replacement refinement,
//! Forward Elimination hand examples, and projections.

use std::collections::{BTreeMap, BTreeSet};

use pdfarmor_core::conserved::{
    analyze_seed_deletion, forward_elimination, project_to_consolidated, refine_by_replacement,
    ConservedError, SeedAnalysis,
};
use pdfarmor_core::featurizer::{
    build_vocabulary, ConsolidationRule, ConsolidationRules, ContentFeatureSpec, ScanMode,
};
use pdfarmor_core::oracle::{Oracle, SyntheticOracleConfig};
use pdfarmor_core::pdf::{Dict, ObjId, PdfDocument, PdfName, PdfStream, PdfValue};

const MARKER: &[u8] = b"MARKER";

fn dict(entries: Vec<(&str, PdfValue)>) -> Dict {
    entries
        .into_iter()
        .map(|(k, v)| (PdfName::new(k), v))
        .collect()
}

/// Catalog with an OpenAction JavaScript trigger chain, a page tree, and one
/// inert /Extra entry.
fn seed_doc() -> PdfDocument {
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
            ("/Extra", PdfValue::Numeric(1.0)),
        ])),
    );
    doc.objects.insert(
        ObjId::new(2, 0),
        PdfValue::Dictionary(dict(vec![
            ("/Type", PdfValue::name("/Pages")),
            ("/Kids", PdfValue::Array(vec![])),
            ("/Count", PdfValue::Numeric(0.0)),
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

fn oracle() -> Oracle {
    Oracle::synthetic(SyntheticOracleConfig::default_config(MARKER))
}

#[test]
fn deletion_pass_separates_conserved_from_inert() {
    let doc = seed_doc();
    let vocab = build_vocabulary(&[doc.clone()], 100, 1, ConsolidationRules::empty()).unwrap();
    let analysis = analyze_seed_deletion("s0", &doc, &vocab, &oracle()).unwrap();
    for p in ["/OpenAction", "/OpenAction/JS", "/OpenAction/S", "/Pages"] {
        assert!(analysis.s.contains(p), "{p} should be conserved: {analysis:?}");
    }
    for p in ["/Extra", "/Type", "/Pages/Count"] {
        assert!(analysis.o.contains(p), "{p} should be deletable: {analysis:?}");
    }
    // deleting the trigger dictionary takes its children with it
    let deps = analysis.d.get("/OpenAction").unwrap();
    assert!(deps.contains("/OpenAction/JS") && deps.contains("/OpenAction/S"));
    assert!(analysis.d.get("/Extra").unwrap().is_empty());
}

#[test]
fn benign_seed_is_rejected() {
    let mut doc = seed_doc();
    doc.objects.insert(
        ObjId::new(3, 0),
        PdfValue::Stream(PdfStream {
            dict: Dict::new(),
            data: b"console.log('nothing');".to_vec(),
        }),
    );
    let vocab = build_vocabulary(&[doc.clone()], 100, 1, ConsolidationRules::empty()).unwrap();
    assert!(matches!(
        analyze_seed_deletion("s0", &doc, &vocab, &oracle()),
        Err(ConservedError::SeedNotMalicious(_))
    ));
}

#[test]
fn replacement_refinement_demotes_survivable_substitutions() {
    let doc = seed_doc();
    let vocab = build_vocabulary(&[doc.clone()], 100, 1, ConsolidationRules::empty()).unwrap();
    let ora = oracle();
    let prelim = analyze_seed_deletion("s0", &doc, &vocab, &ora).unwrap();
    assert!(prelim.s.contains("/OpenAction/S"));

    // donor pool offering the same dispatch name: substituting /OpenAction/S
    // keeps the payload live, so the path is not truly conserved
    let live = refine_by_replacement(&doc, &prelim, &[PdfValue::name("/JavaScript")], &ora).unwrap();
    assert!(live.o.contains("/OpenAction/S"));
    assert!(!live.s.contains("/OpenAction/S"));

    // donor pool with a different dispatch name keeps it conserved
    let dead = refine_by_replacement(&doc, &prelim, &[PdfValue::name("/GoTo")], &ora).unwrap();
    assert!(dead.s.contains("/OpenAction/S"));

    assert!(matches!(
        refine_by_replacement(&doc, &prelim, &[], &ora),
        Err(ConservedError::EmptyDonorPool)
    ));
}

fn analysis(
    id: &str,
    s: &[&str],
    o: &[&str],
    d: &[(&str, &[&str])],
) -> SeedAnalysis {
    SeedAnalysis {
        seed_id: id.to_string(),
        s: s.iter().map(|x| x.to_string()).collect(),
        o: o.iter().map(|x| x.to_string()).collect(),
        d: d.iter()
            .map(|(k, deps)| {
                (
                    k.to_string(),
                    deps.iter().map(|x| x.to_string()).collect::<BTreeSet<_>>(),
                )
            })
            .collect::<BTreeMap<_, _>>(),
    }
}

/// Hand example: "/X" is conserved in one seed and non-conserved in two.
/// With beta = 3 the evidence threshold is 3 * 1 = 3 > 2, so "/X" stays.
#[test]
fn forward_elimination_beta_three_retains() {
    let analyses = vec![
        analysis("a", &["/X", "/Y"], &[], &[]),
        analysis("b", &["/Y"], &["/X"], &[]),
        analysis("c", &["/Y"], &["/X"], &[]),
    ];
    let report = forward_elimination(&analyses, 3.0);
    let expect: BTreeSet<String> = ["/X", "/Y"].iter().map(|s| s.to_string()).collect();
    assert_eq!(report.uniform, expect);
    assert!(report.removal_log.is_empty());
}

/// Hand example: same evidence with beta = 1.5 crosses the threshold
/// (2 >= 1.5 * 1), so "/X" is removed and drags its dependent "/X/Sub" out
/// with it, even though "/X/Sub" has no adverse evidence of its own.
#[test]
fn forward_elimination_beta_low_removes_with_dependents() {
    let analyses = vec![
        analysis("a", &["/X", "/X/Sub", "/Y"], &[], &[("/X", &["/X/Sub"])]),
        analysis("b", &["/Y"], &["/X"], &[]),
        analysis("c", &["/Y"], &["/X"], &[]),
    ];
    let report = forward_elimination(&analyses, 1.5);
    let expect: BTreeSet<String> = ["/Y"].iter().map(|s| s.to_string()).collect();
    assert_eq!(report.uniform, expect);
    assert_eq!(report.removal_log.len(), 1);
    assert_eq!(report.removal_log[0].0, "/X");
    assert!(report.removal_log[0].1.contains("/X/Sub"));
}

/// A feature already removed as a dependent is masked from later checks: it
/// cannot reappear or generate its own removal-log entry.
#[test]
fn forward_elimination_masks_removed_dependents() {
    let analyses = vec![
        analysis("a", &["/A", "/A/B"], &[], &[("/A", &["/A/B"])]),
        analysis("b", &[], &["/A", "/A/B"], &[]),
    ];
    let report = forward_elimination(&analyses, 1.0);
    assert!(report.uniform.is_empty());
    assert_eq!(report.removal_log.len(), 1, "dependent must not be re-processed");
}

#[test]
fn consolidated_projection_merges_paths() {
    let analyses = vec![analysis(
        "a",
        &["/OpenAction", "/OpenAction/S", "/Pages"],
        &[],
        &[],
    )];
    let report = forward_elimination(&analyses, 3.0);
    let rules = ConsolidationRules::new(vec![ConsolidationRule {
        matches: "/OpenAction/S".to_string(),
        replacement: "/OpenAction".to_string(),
    }])
    .unwrap();
    let projected = project_to_consolidated(&report, &rules);
    let expect: BTreeSet<String> = ["/OpenAction", "/Pages"].iter().map(|s| s.to_string()).collect();
    assert_eq!(projected, expect);
}

#[test]
fn content_projection_flags_features_tied_to_conserved_paths() {
    use pdfarmor_core::conserved::project_to_content_binary;
    let doc = seed_doc();
    let vocab = build_vocabulary(&[doc.clone()], 100, 1, ConsolidationRules::empty()).unwrap();
    let ora = oracle();
    let a = analyze_seed_deletion("s0", &doc, &vocab, &ora).unwrap();
    let spec = ContentFeatureSpec::default_spec(ScanMode::Raw);
    let report = project_to_content_binary(&[("s0".to_string(), doc)], &[a], &spec, 3.0);
    // deleting /OpenAction/JS removes the only /JS occurrence and payload
    assert!(report.uniform.contains("count_js"));
    assert!(report.uniform.contains("count_javascript"));
    // keywords present regardless of any conserved deletion stay out
    assert!(!report.uniform.contains("count_obj"));
    assert!(!report.uniform.contains("size"));
}
