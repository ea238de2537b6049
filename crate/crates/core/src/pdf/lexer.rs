//! Byte-level tokenizer for the supported PDF subset.

#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    Int(i64),
    Real(f64),
    /// Raw name text including the leading '/'.
    Name(String),
    /// Literal or hex string payload.
    Str(Vec<u8>),
    Bool(bool),
    Null,
    ArrOpen,
    ArrClose,
    DictOpen,
    DictClose,
    /// Bare keyword: obj, endobj, stream, endstream, xref, trailer,
    /// startxref, R, n, f, ...
    Kw(String),
}

#[derive(Debug, Clone)]
pub struct LexError {
    pub offset: usize,
    pub message: String,
}

fn is_whitespace(b: u8) -> bool {
    matches!(b, b'\0' | b'\t' | b'\n' | b'\x0c' | b'\r' | b' ')
}

fn is_delimiter(b: u8) -> bool {
    matches!(b, b'(' | b')' | b'<' | b'>' | b'[' | b']' | b'{' | b'}' | b'/' | b'%')
}

pub fn is_regular(b: u8) -> bool {
    !is_whitespace(b) && !is_delimiter(b)
}

pub struct Lexer<'a> {
    bytes: &'a [u8],
    pub pos: usize,
}

impl<'a> Lexer<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Lexer { bytes, pos: 0 }
    }

    pub fn bytes(&self) -> &'a [u8] {
        self.bytes
    }

    fn skip_ws_and_comments(&mut self) {
        loop {
            while self.pos < self.bytes.len() && is_whitespace(self.bytes[self.pos]) {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'%' {
                while self.pos < self.bytes.len() && !matches!(self.bytes[self.pos], b'\n' | b'\r')
                {
                    self.pos += 1;
                }
            } else {
                return;
            }
        }
    }

    /// Next token with its byte offset, or None at end of input.
    pub fn next_token(&mut self) -> Result<Option<(usize, Token)>, LexError> {
        self.skip_ws_and_comments();
        if self.pos >= self.bytes.len() {
            return Ok(None);
        }
        let start = self.pos;
        let b = self.bytes[self.pos];
        let token = match b {
            b'[' => {
                self.pos += 1;
                Token::ArrOpen
            }
            b']' => {
                self.pos += 1;
                Token::ArrClose
            }
            b'<' => {
                if self.bytes.get(self.pos + 1) == Some(&b'<') {
                    self.pos += 2;
                    Token::DictOpen
                } else {
                    self.pos += 1;
                    Token::Str(self.hex_string(start)?)
                }
            }
            b'>' => {
                if self.bytes.get(self.pos + 1) == Some(&b'>') {
                    self.pos += 2;
                    Token::DictClose
                } else {
                    return Err(LexError {
                        offset: start,
                        message: "lone '>'".into(),
                    });
                }
            }
            b'(' => {
                self.pos += 1;
                Token::Str(self.literal_string(start)?)
            }
            b'/' => {
                self.pos += 1;
                let mut name = String::from("/");
                while self.pos < self.bytes.len() && is_regular(self.bytes[self.pos]) {
                    name.push(self.bytes[self.pos] as char);
                    self.pos += 1;
                }
                Token::Name(name)
            }
            b'+' | b'-' | b'.' | b'0'..=b'9' => self.number(start)?,
            _ if is_regular(b) => {
                let mut kw = String::new();
                while self.pos < self.bytes.len() && is_regular(self.bytes[self.pos]) {
                    kw.push(self.bytes[self.pos] as char);
                    self.pos += 1;
                }
                match kw.as_str() {
                    "true" => Token::Bool(true),
                    "false" => Token::Bool(false),
                    "null" => Token::Null,
                    _ => Token::Kw(kw),
                }
            }
            _ => {
                return Err(LexError {
                    offset: start,
                    message: format!("unexpected byte 0x{b:02x}"),
                })
            }
        };
        Ok(Some((start, token)))
    }

    fn number(&mut self, start: usize) -> Result<Token, LexError> {
        let mut text = String::new();
        while self.pos < self.bytes.len()
            && matches!(self.bytes[self.pos], b'+' | b'-' | b'.' | b'0'..=b'9')
        {
            text.push(self.bytes[self.pos] as char);
            self.pos += 1;
        }
        if text.contains('.') {
            text.parse::<f64>().map(Token::Real).map_err(|_| LexError {
                offset: start,
                message: format!("bad real: {text}"),
            })
        } else {
            text.parse::<i64>().map(Token::Int).map_err(|_| LexError {
                offset: start,
                message: format!("bad integer: {text}"),
            })
        }
    }

    fn hex_string(&mut self, start: usize) -> Result<Vec<u8>, LexError> {
        let mut digits = Vec::new();
        loop {
            if self.pos >= self.bytes.len() {
                return Err(LexError {
                    offset: start,
                    message: "unterminated hex string".into(),
                });
            }
            let b = self.bytes[self.pos];
            self.pos += 1;
            match b {
                b'>' => break,
                _ if is_whitespace(b) => {}
                b'0'..=b'9' | b'a'..=b'f' | b'A'..=b'F' => digits.push(b),
                _ => {
                    return Err(LexError {
                        offset: start,
                        message: format!("bad hex-string byte 0x{b:02x}"),
                    })
                }
            }
        }
        if digits.len() % 2 == 1 {
            digits.push(b'0');
        }
        Ok(digits
            .chunks(2)
            .map(|pair| {
                let hi = (pair[0] as char).to_digit(16).unwrap() as u8;
                let lo = (pair[1] as char).to_digit(16).unwrap() as u8;
                hi * 16 + lo
            })
            .collect())
    }

    fn literal_string(&mut self, start: usize) -> Result<Vec<u8>, LexError> {
        let mut out = Vec::new();
        let mut depth = 1usize;
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            self.pos += 1;
            match b {
                b'(' => {
                    depth += 1;
                    out.push(b);
                }
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(out);
                    }
                    out.push(b);
                }
                b'\\' => {
                    let e = *self.bytes.get(self.pos).ok_or_else(|| LexError {
                        offset: start,
                        message: "unterminated string escape".into(),
                    })?;
                    self.pos += 1;
                    match e {
                        b'n' => out.push(b'\n'),
                        b'r' => out.push(b'\r'),
                        b't' => out.push(b'\t'),
                        b'b' => out.push(8),
                        b'f' => out.push(12),
                        b'(' | b')' | b'\\' => out.push(e),
                        b'\n' => {}
                        b'\r' => {
                            if self.bytes.get(self.pos) == Some(&b'\n') {
                                self.pos += 1;
                            }
                        }
                        b'0'..=b'7' => {
                            let mut code = (e - b'0') as u32;
                            for _ in 0..2 {
                                match self.bytes.get(self.pos) {
                                    Some(&d @ b'0'..=b'7') => {
                                        code = code * 8 + (d - b'0') as u32;
                                        self.pos += 1;
                                    }
                                    _ => break,
                                }
                            }
                            out.push((code & 0xff) as u8);
                        }
                        other => out.push(other),
                    }
                }
                _ => out.push(b),
            }
        }
        Err(LexError {
            offset: start,
            message: "unterminated literal string".into(),
        })
    }
}
