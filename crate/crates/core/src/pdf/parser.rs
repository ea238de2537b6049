//! Best-effort parser for the supported subset. Irrecoverable lexical trouble
//! is an error; everything else (trailing garbage, dangling references,
//! malformed name escapes, duplicate object numbers) becomes a diagnostic.

use thiserror::Error;

use super::lexer::{LexError, Lexer, Token};
use super::name::{decode_name_flagged, PdfName};
use super::value::{Dict, ObjId, PdfDocument, PdfStream, PdfValue};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("missing %PDF- header magic")]
    MalformedHeader,
    #[error("trailer has no resolvable /Root")]
    NoTrailerRoot,
    #[error("lexical error at byte {offset}: {message}")]
    Token { offset: usize, message: String },
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> Self {
        ParseError::Token {
            offset: e.offset,
            message: e.message,
        }
    }
}

/// Non-fatal parse finding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub offset: usize,
    pub message: String,
}

struct TokenStream<'a> {
    lexer: Lexer<'a>,
    buf: Vec<(usize, Token)>,
}

impl<'a> TokenStream<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        TokenStream {
            lexer: Lexer::new(bytes),
            buf: Vec::new(),
        }
    }

    fn peek(&mut self, n: usize) -> Result<Option<&(usize, Token)>, ParseError> {
        while self.buf.len() <= n {
            match self.lexer.next_token()? {
                Some(t) => self.buf.push(t),
                None => return Ok(None),
            }
        }
        Ok(self.buf.get(n))
    }

    fn next(&mut self) -> Result<Option<(usize, Token)>, ParseError> {
        if self.buf.is_empty() {
            Ok(self.lexer.next_token()?)
        } else {
            Ok(Some(self.buf.remove(0)))
        }
    }

    /// Raw stream payload read; callable only when the token buffer is empty
    /// (i.e. right after consuming the `stream` keyword).
    fn read_stream_payload(&mut self, declared_len: Option<usize>) -> Result<Vec<u8>, ParseError> {
        debug_assert!(self.buf.is_empty());
        let bytes = self.lexer.bytes();
        let mut pos = self.lexer.pos;
        // single EOL after the stream keyword
        if bytes.get(pos) == Some(&b'\r') {
            pos += 1;
        }
        if bytes.get(pos) == Some(&b'\n') {
            pos += 1;
        }
        const END: &[u8] = b"endstream";
        if let Some(len) = declared_len {
            if pos + len <= bytes.len() {
                let mut after = pos + len;
                if bytes.get(after) == Some(&b'\r') {
                    after += 1;
                }
                if bytes.get(after) == Some(&b'\n') {
                    after += 1;
                }
                if bytes[after..].starts_with(END) {
                    let payload = bytes[pos..pos + len].to_vec();
                    self.lexer.pos = after + END.len();
                    return Ok(payload);
                }
            }
        }
        // fall back to scanning for the endstream keyword
        let rel = bytes[pos..]
            .windows(END.len())
            .position(|w| w == END)
            .ok_or(ParseError::Token {
                offset: pos,
                message: "unterminated stream".into(),
            })?;
        let mut end = pos + rel;
        self.lexer.pos = pos + rel + END.len();
        // trim one trailing EOL before endstream
        if end > pos && bytes[end - 1] == b'\n' {
            end -= 1;
        }
        if end > pos && bytes[end - 1] == b'\r' {
            end -= 1;
        }
        Ok(bytes[pos..end].to_vec())
    }
}

fn parse_value(ts: &mut TokenStream, diags: &mut Vec<Diagnostic>) -> Result<PdfValue, ParseError> {
    let (offset, token) = ts.next()?.ok_or(ParseError::Token {
        offset: usize::MAX,
        message: "unexpected end of input".into(),
    })?;
    match token {
        Token::Int(i) => {
            let looks_like_ref = matches!(ts.peek(0)?, Some((_, Token::Int(_))))
                && matches!(ts.peek(1)?, Some((_, Token::Kw(kw))) if kw == "R");
            if looks_like_ref && i >= 0 {
                let gen = match ts.next()?.unwrap().1 {
                    Token::Int(g) => g,
                    _ => unreachable!(),
                };
                ts.next()?; // R
                Ok(PdfValue::Reference(ObjId::new(i as u32, gen.max(0) as u16)))
            } else {
                Ok(PdfValue::Numeric(i as f64))
            }
        }
        Token::Real(r) => Ok(PdfValue::Numeric(r)),
        Token::Name(raw) => {
            let (_, malformed) = decode_name_flagged(&raw);
            if malformed {
                diags.push(Diagnostic {
                    offset,
                    message: format!("malformed name escape in {raw}"),
                });
            }
            Ok(PdfValue::Name(PdfName::from_raw(raw)))
        }
        Token::Str(s) => Ok(PdfValue::String(s)),
        Token::Bool(b) => Ok(PdfValue::Boolean(b)),
        Token::Null => Ok(PdfValue::Null),
        Token::ArrOpen => {
            let mut items = Vec::new();
            loop {
                match ts.peek(0)? {
                    Some((_, Token::ArrClose)) => {
                        ts.next()?;
                        break;
                    }
                    Some(_) => items.push(parse_value(ts, diags)?),
                    None => {
                        return Err(ParseError::Token {
                            offset,
                            message: "unterminated array".into(),
                        })
                    }
                }
            }
            Ok(PdfValue::Array(items))
        }
        Token::DictOpen => {
            let mut dict = Dict::new();
            loop {
                match ts.next()? {
                    Some((_, Token::DictClose)) => break,
                    Some((koff, Token::Name(raw))) => {
                        let (_, malformed) = decode_name_flagged(&raw);
                        if malformed {
                            diags.push(Diagnostic {
                                offset: koff,
                                message: format!("malformed name escape in key {raw}"),
                            });
                        }
                        let value = parse_value(ts, diags)?;
                        dict.insert(PdfName::from_raw(raw), value);
                    }
                    Some((koff, other)) => {
                        diags.push(Diagnostic {
                            offset: koff,
                            message: format!("skipping non-name dictionary key {other:?}"),
                        });
                    }
                    None => {
                        return Err(ParseError::Token {
                            offset,
                            message: "unterminated dictionary".into(),
                        })
                    }
                }
            }
            Ok(PdfValue::Dictionary(dict))
        }
        other => Err(ParseError::Token {
            offset,
            message: format!("unexpected token {other:?} in value position"),
        }),
    }
}

/// Consume a classic xref table after its `xref` keyword.
fn skip_xref(ts: &mut TokenStream) -> Result<(), ParseError> {
    while let Some((_, Token::Int(_))) = ts.peek(0)? {
        ts.next()?; // subsection start
        let count = match ts.next()? {
            Some((_, Token::Int(c))) => c.max(0) as usize,
            _ => return Ok(()),
        };
        for _ in 0..count {
            let entry = matches!(ts.peek(0)?, Some((_, Token::Int(_))))
                && matches!(ts.peek(1)?, Some((_, Token::Int(_))))
                && matches!(ts.peek(2)?, Some((_, Token::Kw(kw))) if kw == "n" || kw == "f");
            if !entry {
                return Ok(());
            }
            ts.next()?;
            ts.next()?;
            ts.next()?;
        }
    }
    Ok(())
}

/// Parse raw bytes into a document plus diagnostics.
pub fn parse_document(bytes: &[u8]) -> Result<(PdfDocument, Vec<Diagnostic>), ParseError> {
    let head = &bytes[..bytes.len().min(1024)];
    let magic = b"%PDF-";
    let magic_pos = head
        .windows(magic.len())
        .position(|w| w == magic)
        .ok_or(ParseError::MalformedHeader)?;
    let mut version = String::new();
    for &b in &bytes[magic_pos + magic.len()..] {
        if b.is_ascii_digit() || b == b'.' {
            version.push(b as char);
        } else {
            break;
        }
    }
    if version.is_empty() {
        version = "1.7".to_string();
    }

    let mut doc = PdfDocument::new(&version);
    let mut diags = Vec::new();
    let mut ts = TokenStream::new(bytes);

    loop {
        let is_obj_header = matches!(ts.peek(0)?, Some((_, Token::Int(_))))
            && matches!(ts.peek(1)?, Some((_, Token::Int(_))))
            && matches!(ts.peek(2)?, Some((_, Token::Kw(kw))) if kw == "obj");
        if is_obj_header {
            let (off, num) = match ts.next()?.unwrap() {
                (off, Token::Int(n)) => (off, n),
                _ => unreachable!(),
            };
            let gen = match ts.next()?.unwrap().1 {
                Token::Int(g) => g,
                _ => unreachable!(),
            };
            ts.next()?; // obj
            let mut value = parse_value(&mut ts, &mut diags)?;
            if let Some((_, Token::Kw(kw))) = ts.peek(0)? {
                if kw == "stream" {
                    ts.next()?;
                    let declared = value
                        .as_dict()
                        .and_then(|d| d.get("/Length"))
                        .and_then(|v| v.as_number())
                        .filter(|n| *n >= 0.0)
                        .map(|n| n as usize);
                    let data = ts.read_stream_payload(declared)?;
                    let dict = match value {
                        PdfValue::Dictionary(d) => d,
                        _ => Dict::new(),
                    };
                    value = PdfValue::Stream(PdfStream { dict, data });
                }
            }
            match ts.peek(0)? {
                Some((_, Token::Kw(kw))) if kw == "endobj" => {
                    ts.next()?;
                }
                _ => diags.push(Diagnostic {
                    offset: off,
                    message: format!("object {num} {gen}: missing endobj"),
                }),
            }
            let id = ObjId::new(num.max(0) as u32, gen.max(0) as u16);
            if doc.objects.insert(id, value).is_some() {
                diags.push(Diagnostic {
                    offset: off,
                    message: format!("duplicate object number {num} {gen}; last wins"),
                });
            }
            continue;
        }
        match ts.next()? {
            None => break,
            Some((_, Token::Kw(kw))) if kw == "xref" => skip_xref(&mut ts)?,
            Some((off, Token::Kw(kw))) if kw == "trailer" => {
                match parse_value(&mut ts, &mut diags)? {
                    PdfValue::Dictionary(d) => doc.trailer = d,
                    other => diags.push(Diagnostic {
                        offset: off,
                        message: format!("trailer is not a dictionary: {}", other.type_label()),
                    }),
                }
            }
            Some((_, Token::Kw(kw))) if kw == "startxref" => {
                if let Some((_, Token::Int(_))) = ts.peek(0)? {
                    ts.next()?;
                }
            }
            Some((off, other)) => diags.push(Diagnostic {
                offset: off,
                message: format!("unexpected top-level token {other:?}"),
            }),
        }
    }

    for id in doc.dangling_references() {
        diags.push(Diagnostic {
            offset: 0,
            message: format!("dangling reference {} {}", id.num, id.gen),
        });
    }
    if doc.root_id().is_none() {
        return Err(ParseError::NoTrailerRoot);
    }
    Ok((doc, diags))
}
