use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::error::{ParseError, ParseErrorCode};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    Int(i64),
    Float(f64),
    Bytes(Vec<u8>),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LAngle,
    RAngle,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Eq,
    Dot,
    Arrow,
    At,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{}`", s),
            Tok::Str(_) => String::from("string literal"),
            Tok::Int(_) | Tok::Float(_) => String::from("number"),
            Tok::Bytes(_) => String::from("bytes literal"),
            Tok::LBrace => String::from("`{`"),
            Tok::RBrace => String::from("`}`"),
            Tok::LParen => String::from("`(`"),
            Tok::RParen => String::from("`)`"),
            Tok::LAngle => String::from("`<`"),
            Tok::RAngle => String::from("`>`"),
            Tok::LBracket => String::from("`[`"),
            Tok::RBracket => String::from("`]`"),
            Tok::Comma => String::from("`,`"),
            Tok::Semi => String::from("`;`"),
            Tok::Colon => String::from("`:`"),
            Tok::Eq => String::from("`=`"),
            Tok::Dot => String::from("`.`"),
            Tok::Arrow => String::from("`->`"),
            Tok::At => String::from("`@`"),
            Tok::Eof => String::from("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

struct Lexer<'a> {
    chars: core::iter::Peekable<core::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, line: u32, col: u32, msg: impl Into<String>) -> ParseError {
        ParseError::new(ParseErrorCode::Syntax, line, col, msg)
    }

    fn skip_trivia(&mut self) -> Result<(), ParseError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') => {
                    let (line, col) = (self.line, self.col);
                    self.bump();
                    if self.peek() != Some('/') {
                        return Err(self.err(line, col, "unexpected `/`"));
                    }
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn string_body(&mut self, line: u32, col: u32) -> Result<String, ParseError> {
        let mut out = String::new();
        loop {
            let c = match self.bump() {
                Some(c) => c,
                None => return Err(self.err(line, col, "unterminated string literal")),
            };
            match c {
                '"' => return Ok(out),
                '\n' => return Err(self.err(line, col, "newline in string literal")),
                '\\' => {
                    let (eline, ecol) = (self.line, self.col);
                    match self.bump() {
                        Some('"') => out.push('"'),
                        Some('\\') => out.push('\\'),
                        Some('n') => out.push('\n'),
                        Some('t') => out.push('\t'),
                        Some('r') => out.push('\r'),
                        Some('u') => {
                            if self.bump() != Some('{') {
                                return Err(self.err(eline, ecol, "expected `{` after `\\u`"));
                            }
                            let mut hex = String::new();
                            loop {
                                match self.bump() {
                                    Some('}') => break,
                                    Some(h) if h.is_ascii_hexdigit() && hex.len() < 6 => {
                                        hex.push(h)
                                    }
                                    _ => {
                                        return Err(self.err(eline, ecol, "malformed unicode escape"))
                                    }
                                }
                            }
                            let ch = u32::from_str_radix(&hex, 16)
                                .ok()
                                .and_then(char::from_u32)
                                .ok_or_else(|| self.err(eline, ecol, "invalid unicode escape"))?;
                            out.push(ch);
                        }
                        _ => return Err(self.err(eline, ecol, "unknown escape sequence")),
                    }
                }
                c => out.push(c),
            }
        }
    }

    fn number(&mut self, line: u32, col: u32) -> Result<Tok, ParseError> {
        let mut text = String::new();
        if self.peek() == Some('-') {
            text.push('-');
            self.bump();
        }
        let mut is_float = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                text.push(c);
                self.bump();
            } else if c == '.' && !is_float {
                // `1.x` is not a number continuation
                let mut look = self.chars.clone();
                look.next();
                if !matches!(look.peek(), Some(d) if d.is_ascii_digit()) {
                    break;
                }
                is_float = true;
                text.push(c);
                self.bump();
            } else if c == 'e' || c == 'E' {
                is_float = true;
                text.push(c);
                self.bump();
                if let Some(sign @ ('+' | '-')) = self.peek() {
                    text.push(sign);
                    self.bump();
                }
                if !matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                    return Err(self.err(line, col, "malformed exponent"));
                }
            } else {
                break;
            }
        }
        if matches!(self.peek(), Some(c) if c.is_ascii_alphabetic() || c == '_') {
            return Err(self.err(line, col, "malformed number"));
        }
        if is_float {
            let v: f64 = text
                .parse()
                .map_err(|_| self.err(line, col, "malformed float"))?;
            if !v.is_finite() {
                return Err(self.err(line, col, "float literal out of range"));
            }
            Ok(Tok::Float(v))
        } else {
            text.parse()
                .map(Tok::Int)
                .map_err(|_| self.err(line, col, "integer literal out of range"))
        }
    }

    fn next_token(&mut self) -> Result<Token, ParseError> {
        self.skip_trivia()?;
        let (line, col) = (self.line, self.col);
        let c = match self.peek() {
            Some(c) => c,
            None => {
                return Ok(Token {
                    tok: Tok::Eof,
                    line,
                    col,
                })
            }
        };
        let single = |tok| Some(tok);
        let punct = match c {
            '{' => single(Tok::LBrace),
            '}' => single(Tok::RBrace),
            '(' => single(Tok::LParen),
            ')' => single(Tok::RParen),
            '<' => single(Tok::LAngle),
            '>' => single(Tok::RAngle),
            '[' => single(Tok::LBracket),
            ']' => single(Tok::RBracket),
            ',' => single(Tok::Comma),
            ';' => single(Tok::Semi),
            ':' => single(Tok::Colon),
            '=' => single(Tok::Eq),
            '.' => single(Tok::Dot),
            '@' => single(Tok::At),
            _ => None,
        };
        if let Some(tok) = punct {
            self.bump();
            return Ok(Token { tok, line, col });
        }
        let tok = if c == '-' {
            let mut look = self.chars.clone();
            look.next();
            match look.peek() {
                Some('>') => {
                    self.bump();
                    self.bump();
                    Tok::Arrow
                }
                Some(d) if d.is_ascii_digit() => self.number(line, col)?,
                _ => return Err(self.err(line, col, "unexpected `-`")),
            }
        } else if c.is_ascii_digit() {
            self.number(line, col)?
        } else if c == '"' {
            self.bump();
            Tok::Str(self.string_body(line, col)?)
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut ident = String::new();
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    ident.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            if ident == "x" && self.peek() == Some('"') {
                self.bump();
                let body = self.string_body(line, col)?;
                Tok::Bytes(decode_hex(&body).ok_or_else(|| {
                    self.err(line, col, "bytes literal must be an even number of hex digits")
                })?)
            } else {
                Tok::Ident(ident)
            }
        } else {
            return Err(self.err(line, col, format!("unexpected character {:?}", c)));
        };
        Ok(Token { tok, line, col })
    }
}

fn decode_hex(s: &str) -> Option<Vec<u8>> {
    if s.len() % 2 != 0 {
        return None;
    }
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(s.len() / 2);
    for pair in bytes.chunks(2) {
        let hi = (pair[0] as char).to_digit(16)?;
        let lo = (pair[1] as char).to_digit(16)?;
        out.push((hi * 16 + lo) as u8);
    }
    Some(out)
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lx = Lexer {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        let t = lx.next_token()?;
        let done = t.tok == Tok::Eof;
        out.push(t);
        if done {
            return Ok(out);
        }
    }
}
