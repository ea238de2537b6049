//! Deterministic serializer: header, objects in ascending number order, a
//! classic cross-reference table with byte-exact offsets, trailer, startxref.

use super::name::PdfName;
use super::value::{PdfDocument, PdfValue};

fn fmt_number(n: f64) -> String {
    if n.fract() == 0.0 && n.abs() < 1e15 {
        format!("{}", n as i64)
    } else {
        format!("{n}")
    }
}

fn write_string(out: &mut Vec<u8>, bytes: &[u8]) {
    out.push(b'(');
    for &b in bytes {
        match b {
            b'(' | b')' | b'\\' => {
                out.push(b'\\');
                out.push(b);
            }
            b'\n' => out.extend_from_slice(b"\\n"),
            b'\r' => out.extend_from_slice(b"\\r"),
            b'\t' => out.extend_from_slice(b"\\t"),
            0x20..=0x7e => out.push(b),
            _ => out.extend_from_slice(format!("\\{:03o}", b).as_bytes()),
        }
    }
    out.push(b')');
}

fn write_value(out: &mut Vec<u8>, value: &PdfValue) {
    match value {
        PdfValue::Boolean(b) => out.extend_from_slice(if *b { b"true" } else { b"false" }),
        PdfValue::Numeric(n) => out.extend_from_slice(fmt_number(*n).as_bytes()),
        PdfValue::String(s) => write_string(out, s),
        PdfValue::Null => out.extend_from_slice(b"null"),
        PdfValue::Name(n) => out.extend_from_slice(n.raw().as_bytes()),
        PdfValue::Array(items) => {
            out.push(b'[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(b' ');
                }
                write_value(out, item);
            }
            out.push(b']');
        }
        PdfValue::Dictionary(d) => {
            out.extend_from_slice(b"<<");
            for (k, v) in d.iter() {
                out.push(b' ');
                out.extend_from_slice(k.raw().as_bytes());
                out.push(b' ');
                write_value(out, v);
            }
            out.extend_from_slice(b" >>");
        }
        PdfValue::Stream(s) => {
            // /Length always equals the payload byte count; the stored key's
            // raw form is preserved when present.
            let mut dict = s.dict.clone();
            let key = dict
                .iter()
                .find(|(k, _)| k.decoded() == "/Length")
                .map(|(k, _)| k.clone())
                .unwrap_or_else(|| PdfName::new("/Length"));
            dict.insert(key, PdfValue::Numeric(s.data.len() as f64));
            write_value(out, &PdfValue::Dictionary(dict));
            out.extend_from_slice(b"\nstream\n");
            out.extend_from_slice(&s.data);
            out.extend_from_slice(b"\nendstream");
        }
        PdfValue::Reference(id) => {
            out.extend_from_slice(format!("{} {} R", id.num, id.gen).as_bytes())
        }
    }
}

/// Serialize a document to bytes. Pure function of the document value:
/// equal documents produce byte-identical output.
pub fn serialize_document(doc: &PdfDocument) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(format!("%PDF-{}\n", doc.version).as_bytes());

    let mut offsets: Vec<(u32, u16, usize)> = Vec::new();
    for (id, value) in doc.objects.iter() {
        offsets.push((id.num, id.gen, out.len()));
        out.extend_from_slice(format!("{} {} obj\n", id.num, id.gen).as_bytes());
        write_value(&mut out, value);
        out.extend_from_slice(b"\nendobj\n");
    }

    let xref_pos = out.len();
    out.extend_from_slice(b"xref\n");
    // subsections over contiguous object-number runs, with the free-list
    // head folded into a run starting at 0 when possible
    let mut entries: Vec<(u32, String)> = vec![(0, "0000000000 65535 f \n".to_string())];
    for (num, _gen, off) in &offsets {
        entries.push((*num, format!("{:010} {:05} n \n", off, 0)));
    }
    let mut i = 0;
    while i < entries.len() {
        let start = entries[i].0;
        let mut j = i;
        while j + 1 < entries.len() && entries[j + 1].0 == entries[j].0 + 1 {
            j += 1;
        }
        out.extend_from_slice(format!("{} {}\n", start, j - i + 1).as_bytes());
        for e in &entries[i..=j] {
            out.extend_from_slice(e.1.as_bytes());
        }
        i = j + 1;
    }

    let mut trailer = doc.trailer.clone();
    trailer.insert(
        PdfName::new("/Size"),
        PdfValue::Numeric((doc.max_obj_num() + 1) as f64),
    );
    out.extend_from_slice(b"trailer\n");
    write_value(&mut out, &PdfValue::Dictionary(trailer));
    out.extend_from_slice(format!("\nstartxref\n{}\n%%EOF\n", xref_pos).as_bytes());
    out
}
