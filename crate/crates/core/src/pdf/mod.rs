//! Minimal PDF object model: a well-defined subset of PDF 1.7 with classic
//! cross-reference tables. No encryption, object streams, linearization, or
//! incremental updates; stream payloads are kept opaque (no filter decoding).

mod name;
mod value;
mod lexer;
mod parser;
mod writer;

pub use lexer::is_regular as is_name_regular;
pub use name::{decode_name, decode_name_flagged, encode_name_hex, PdfName};
pub use value::{walk_value_refs, Dict, ObjId, PdfDocument, PdfStream, PdfValue};
pub use parser::{parse_document, Diagnostic, ParseError};
pub use writer::serialize_document;
