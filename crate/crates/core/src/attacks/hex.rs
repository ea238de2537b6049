//! Hex name obfuscation: rewrite selected names in their `#hh` escaped form.
//! The logical structure is untouched — only the raw spelling changes — so
//! decoded-path featurizers and the oracle see an identical document, while a
//! raw byte scanner stops matching the listed keywords.

use crate::pdf::{parse_document, serialize_document, ParseError, PdfValue};

/// The default obfuscation list.
pub const HEX_TABLE: [&str; 7] = [
    "/Action",
    "/Filter",
    "/Length",
    "/JavaScript",
    "/JS",
    "/S",
    "/Type",
];

fn obfuscate_value(value: &mut PdfValue, table: &[&str]) {
    match value {
        PdfValue::Name(name) => {
            if table.contains(&name.decoded()) {
                name.hex_obfuscate();
            }
        }
        PdfValue::Array(items) => {
            for item in items {
                obfuscate_value(item, table);
            }
        }
        PdfValue::Dictionary(dict) => {
            for (key, v) in dict.entries_mut() {
                if table.contains(&key.decoded()) {
                    key.hex_obfuscate();
                }
                obfuscate_value(v, table);
            }
        }
        PdfValue::Stream(stream) => {
            for (key, v) in stream.dict.entries_mut() {
                if table.contains(&key.decoded()) {
                    key.hex_obfuscate();
                }
                obfuscate_value(v, table);
            }
        }
        _ => {}
    }
}

/// Parse, rewrite every name (keys and values, objects and trailer) whose
/// decoded text is in `table`, and re-serialize.
pub fn hex_obfuscate(bytes: &[u8], table: &[&str]) -> Result<Vec<u8>, ParseError> {
    let (mut doc, _diags) = parse_document(bytes)?;
    let ids: Vec<_> = doc.objects.keys().copied().collect();
    for id in ids {
        if let Some(value) = doc.objects.get_mut(&id) {
            obfuscate_value(value, table);
        }
    }
    let mut trailer = PdfValue::Dictionary(doc.trailer.clone());
    obfuscate_value(&mut trailer, table);
    if let PdfValue::Dictionary(d) = trailer {
        doc.trailer = d;
    }
    Ok(serialize_document(&doc))
}
