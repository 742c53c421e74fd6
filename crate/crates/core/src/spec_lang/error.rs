use alloc::string::String;
use core::fmt;

/// Stable error codes reported by the spec parsers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParseErrorCode {
    Syntax,
    DupName,
    NoConcept,
    BadVersion,
    DupUse,
    BadConstraint,
}

impl ParseErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseErrorCode::Syntax => "E_SYNTAX",
            ParseErrorCode::DupName => "E_DUP_NAME",
            ParseErrorCode::NoConcept => "E_NO_CONCEPT",
            ParseErrorCode::BadVersion => "E_BAD_VERSION",
            ParseErrorCode::DupUse => "E_DUP_USE",
            ParseErrorCode::BadConstraint => "E_BAD_CONSTRAINT",
        }
    }
}

impl fmt::Display for ParseErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A parse failure at a 1-based line and column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub code: ParseErrorCode,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl ParseError {
    pub fn new(code: ParseErrorCode, line: u32, col: u32, message: impl Into<String>) -> Self {
        ParseError {
            code,
            line,
            col,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.line, self.col, self.code, self.message
        )
    }
}

impl core::error::Error for ParseError {}
