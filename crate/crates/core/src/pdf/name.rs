//! PDF Name objects and the `#hh` hex-escape codec.
//!
//! A name keeps its raw written form (as it appears in the file, possibly
//! hex-escaped) alongside the decoded text. Structural paths, dictionary
//! lookups, and the behavior oracle all work over decoded text; the writer
//! emits the raw form, which is what the hex-obfuscation attack exploits.

use serde::{Deserialize, Serialize};

fn hex_val(b: u8) -> Option<u8> {
    match b {
        b'0'..=b'9' => Some(b - b'0'),
        b'a'..=b'f' => Some(b - b'a' + 10),
        b'A'..=b'F' => Some(b - b'A' + 10),
        _ => None,
    }
}

/// Decode every well-formed `#hh` escape in a raw name. Malformed escapes
/// (non-hex digits, truncation) pass through verbatim and raise the flag.
/// Returns `(decoded, saw_malformed_escape)`.
pub fn decode_name_flagged(raw: &str) -> (String, bool) {
    let bytes = raw.as_bytes();
    let mut out = String::with_capacity(raw.len());
    let mut malformed = false;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'#' && i + 2 < bytes.len() {
            if let (Some(h), Some(l)) = (hex_val(bytes[i + 1]), hex_val(bytes[i + 2])) {
                out.push((h * 16 + l) as char);
                i += 3;
                continue;
            }
            malformed = true;
        } else if bytes[i] == b'#' {
            malformed = true;
        }
        out.push(bytes[i] as char);
        i += 1;
    }
    (out, malformed)
}

/// Decode `#hh` escapes, ignoring the malformed-escape flag.
pub fn decode_name(raw: &str) -> String {
    decode_name_flagged(raw).0
}

/// Rewrite every character after the leading '/' as a two-digit lowercase
/// hex escape. Inverse of `decode_name` on the result.
pub fn encode_name_hex(name: &str) -> String {
    debug_assert!(name.starts_with('/'));
    let mut out = String::from("/");
    for &b in name.as_bytes()[1..].iter() {
        out.push('#');
        out.push_str(&format!("{:02x}", b));
    }
    out
}

/// A PDF Name. Raw form is preserved for serialization; equality and hashing
/// are over the decoded text.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PdfName {
    raw: String,
    decoded: String,
}

impl PdfName {
    /// From the raw written form (must start with '/').
    pub fn from_raw(raw: impl Into<String>) -> Self {
        let raw = raw.into();
        debug_assert!(raw.starts_with('/'), "name must start with '/': {raw}");
        let decoded = decode_name(&raw);
        PdfName { raw, decoded }
    }

    /// From already-decoded text; raw form equals the text.
    pub fn new(decoded: impl Into<String>) -> Self {
        let decoded = decoded.into();
        PdfName { raw: decoded.clone(), decoded }
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn decoded(&self) -> &str {
        &self.decoded
    }

    /// Rewrite the raw form as full hex escapes, keeping the decoded text.
    pub fn hex_obfuscate(&mut self) {
        self.raw = encode_name_hex(&self.decoded);
    }
}

impl PartialEq for PdfName {
    fn eq(&self, other: &Self) -> bool {
        self.decoded == other.decoded
    }
}
impl Eq for PdfName {}

impl std::hash::Hash for PdfName {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.decoded.hash(state);
    }
}

impl std::fmt::Display for PdfName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.decoded)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_table2_rows() {
        assert_eq!(decode_name("/#4a#53"), "/JS");
        assert_eq!(decode_name("/#41#63#74#69#6f#6e"), "/Action");
        assert_eq!(decode_name("/Type"), "/Type");
    }

    #[test]
    fn encodes_table2_rows() {
        assert_eq!(encode_name_hex("/JavaScript"), "/#4a#61#76#61#53#63#72#69#70#74");
        assert_eq!(encode_name_hex("/S"), "/#53");
        assert_eq!(encode_name_hex("/JS"), "/#4a#53");
    }

    #[test]
    fn malformed_escapes_pass_through() {
        let (s, flag) = decode_name_flagged("/A#zq");
        assert_eq!(s, "/A#zq");
        assert!(flag);
        let (s, flag) = decode_name_flagged("/A#4");
        assert_eq!(s, "/A#4");
        assert!(flag);
    }

    #[test]
    fn round_trip_identity() {
        for name in ["/JS", "/JavaScript", "/Aa0Zz9", "/OpenAction"] {
            assert_eq!(decode_name(&encode_name_hex(name)), name);
        }
    }
}
