//! Parser, writer, and name-codec tests.

use pdfarmor_core::pdf::{
    decode_name, decode_name_flagged, encode_name_hex, parse_document, serialize_document, Dict,
    ObjId, PdfDocument, PdfName, PdfStream, PdfValue,
};
use proptest::prelude::*;

fn minimal_doc() -> PdfDocument {
    let mut doc = PdfDocument::new("1.7");
    let mut catalog = Dict::new();
    catalog.insert(PdfName::new("/Type"), PdfValue::name("/Catalog"));
    catalog.insert(PdfName::new("/Pages"), PdfValue::reference(2));
    doc.objects.insert(ObjId::new(1, 0), PdfValue::Dictionary(catalog));
    let mut pages = Dict::new();
    pages.insert(PdfName::new("/Type"), PdfValue::name("/Pages"));
    pages.insert(PdfName::new("/Kids"), PdfValue::Array(vec![]));
    pages.insert(PdfName::new("/Count"), PdfValue::Numeric(0.0));
    doc.objects.insert(ObjId::new(2, 0), PdfValue::Dictionary(pages));
    doc.trailer
        .insert(PdfName::new("/Root"), PdfValue::reference(1));
    doc
}

#[test]
fn round_trip_minimal() {
    let doc = minimal_doc();
    let bytes = serialize_document(&doc);
    let (parsed, diags) = parse_document(&bytes).unwrap();
    assert!(diags.is_empty());
    assert_eq!(parsed.version, "1.7");
    assert_eq!(parsed.objects.len(), 2);
    assert_eq!(parsed.trailer.get("/Root"), Some(&PdfValue::reference(1)));
}

#[test]
fn round_trip_all_value_types() {
    let mut doc = minimal_doc();
    let mut d = Dict::new();
    d.insert(PdfName::new("/B"), PdfValue::Boolean(true));
    d.insert(PdfName::new("/N"), PdfValue::Numeric(-12.5));
    d.insert(PdfName::new("/I"), PdfValue::Numeric(42.0));
    d.insert(PdfName::new("/S"), PdfValue::String(b"hi (there) \\ ok".to_vec()));
    d.insert(PdfName::new("/Z"), PdfValue::Null);
    d.insert(PdfName::new("/Nm"), PdfValue::name("/Some#20Name"));
    d.insert(
        PdfName::new("/A"),
        PdfValue::Array(vec![
            PdfValue::Numeric(1.0),
            PdfValue::reference(2),
            PdfValue::Array(vec![PdfValue::Boolean(false)]),
        ]),
    );
    doc.objects.insert(ObjId::new(3, 0), PdfValue::Dictionary(d));
    doc.objects.insert(
        ObjId::new(4, 0),
        PdfValue::Stream(PdfStream {
            dict: Dict::new(),
            data: b"stream data endstream-ish \x00\xff bytes".to_vec(),
        }),
    );
    let bytes = serialize_document(&doc);
    let (parsed, diags) = parse_document(&bytes).unwrap();
    assert!(diags.is_empty());
    let reser = serialize_document(&parsed);
    assert_eq!(bytes, reser, "serialization is a fixed point after one round trip");
    match parsed.objects.get(&ObjId::new(4, 0)).unwrap() {
        PdfValue::Stream(s) => {
            assert_eq!(s.data, b"stream data endstream-ish \x00\xff bytes".to_vec());
            // the writer materializes /Length from the data
            assert_eq!(
                s.dict.get("/Length"),
                Some(&PdfValue::Numeric(s.data.len() as f64))
            );
        }
        other => panic!("expected stream, got {other:?}"),
    }
}

#[test]
fn writer_overrides_stale_length() {
    let mut doc = minimal_doc();
    let mut sd = Dict::new();
    sd.insert(PdfName::new("/Length"), PdfValue::Numeric(999.0));
    doc.objects.insert(
        ObjId::new(3, 0),
        PdfValue::Stream(PdfStream {
            dict: sd,
            data: b"abc".to_vec(),
        }),
    );
    let bytes = serialize_document(&doc);
    let (parsed, _) = parse_document(&bytes).unwrap();
    match parsed.objects.get(&ObjId::new(3, 0)).unwrap() {
        PdfValue::Stream(s) => {
            assert_eq!(s.dict.get("/Length"), Some(&PdfValue::Numeric(3.0)));
            assert_eq!(s.data, b"abc");
        }
        other => panic!("expected stream, got {other:?}"),
    }
}

#[test]
fn dangling_reference_is_diagnostic_not_error() {
    let mut doc = minimal_doc();
    let mut d = Dict::new();
    d.insert(PdfName::new("/Gone"), PdfValue::reference(99));
    doc.objects.insert(ObjId::new(3, 0), PdfValue::Dictionary(d));
    let bytes = serialize_document(&doc);
    let (parsed, diags) = parse_document(&bytes).unwrap();
    assert!(
        diags.iter().any(|d| d.message.contains("dangling")),
        "expected a dangling-reference diagnostic, got {diags:?}"
    );
    assert_eq!(parsed.objects.len(), 3);
}

#[test]
fn trailing_garbage_is_diagnostic() {
    let mut bytes = serialize_document(&minimal_doc());
    bytes.extend_from_slice(b"\nhere is some trailing garbage that is not PDF");
    let (_, diags) = parse_document(&bytes).unwrap();
    assert!(
        diags.iter().any(|d| d.message.contains("garbage") || d.message.contains("trailing")),
        "expected trailing-garbage diagnostic, got {diags:?}"
    );
}

#[test]
fn unparseable_input_is_error() {
    assert!(parse_document(b"not a pdf at all").is_err());
    assert!(parse_document(b"").is_err());
}

// The seven obfuscation-table rows, raw hex form on the left.
const TABLE2: [(&str, &str); 7] = [
    ("/#41ction", "/Action"),
    ("/#46ilter", "/Filter"),
    ("/#4cength", "/Length"),
    ("/#4a#61#76#61#53#63#72#69#70#74", "/JavaScript"),
    ("/#4a#53", "/JS"),
    ("/#53", "/S"),
    ("/#54#79#70#65", "/Type"),
];

#[test]
fn name_codec_table_rows() {
    for (raw, decoded) in TABLE2 {
        assert_eq!(decode_name(raw), decoded, "decode {raw}");
        let (d, malformed) = decode_name_flagged(raw);
        assert_eq!(d, decoded);
        assert!(!malformed, "valid escapes must not set the malformed flag");
    }
    // full-escape encoding reproduces the canonical /JS row
    assert_eq!(encode_name_hex("/JS"), "/#4a#53");
    assert_eq!(decode_name(&encode_name_hex("/JavaScript")), "/JavaScript");
}

#[test]
fn name_decode_is_single_pass() {
    // decoding must not cascade: an escape that decodes into '#' does not
    // trigger a second round
    let decoded = decode_name("/#2341");
    assert_eq!(decoded, "/#41");
    assert_eq!(decode_name(&decoded), "/A");
}

#[test]
fn pdf_name_preserves_raw_form() {
    let n = PdfName::from_raw("/#4a#53");
    assert_eq!(n.decoded(), "/JS");
    assert_eq!(n.raw(), "/#4a#53");
    let mut m = PdfName::new("/JS");
    assert_eq!(m.raw(), "/JS");
    m.hex_obfuscate();
    assert_eq!(m.raw(), "/#4a#53");
    assert_eq!(m.decoded(), "/JS");
}

fn name_text_strategy() -> impl Strategy<Value = String> {
    proptest::collection::vec(proptest::char::range('!', '~'), 1..12)
        .prop_map(|chars| format!("/{}", chars.into_iter().collect::<String>()))
}

proptest! {
    #[test]
    fn prop_name_codec_identity(name in name_text_strategy()) {
        let encoded = encode_name_hex(&name);
        prop_assert_eq!(decode_name(&encoded), name);
    }

    #[test]
    fn prop_string_round_trip(data in proptest::collection::vec(any::<u8>(), 0..200)) {
        let mut doc = minimal_doc();
        let mut d = Dict::new();
        d.insert(PdfName::new("/Payload"), PdfValue::String(data.clone()));
        doc.objects.insert(ObjId::new(3, 0), PdfValue::Dictionary(d));
        let bytes = serialize_document(&doc);
        let (parsed, diags) = parse_document(&bytes).unwrap();
        prop_assert!(diags.is_empty());
        let got = parsed
            .objects
            .get(&ObjId::new(3, 0))
            .and_then(|v| v.as_dict())
            .and_then(|d| d.get("/Payload"));
        prop_assert_eq!(got, Some(&PdfValue::String(data)));
    }

    #[test]
    fn prop_stream_round_trip(data in proptest::collection::vec(any::<u8>(), 0..300)) {
        let mut doc = minimal_doc();
        doc.objects.insert(
            ObjId::new(3, 0),
            PdfValue::Stream(PdfStream { dict: Dict::new(), data: data.clone() }),
        );
        let bytes = serialize_document(&doc);
        let (parsed, diags) = parse_document(&bytes).unwrap();
        prop_assert!(diags.is_empty());
        match parsed.objects.get(&ObjId::new(3, 0)) {
            Some(PdfValue::Stream(s)) => prop_assert_eq!(&s.data, &data),
            other => prop_assert!(false, "expected stream, got {:?}", other),
        }
    }
}
