use std::io;
use std::path::PathBuf;

use adapterforge_core::adapter_gen::{GenError, TemplateError};
use adapterforge_core::analyser::AnalyseError;
use adapterforge_core::aslt::AsltError;
use adapterforge_core::integrate::IntegrateError;
use adapterforge_core::spec_lang::ParseError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: E_IO: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}:{err}", path.display())]
    Parse { path: PathBuf, err: ParseError },
    /// Semantic violations; each line is already `line:col: CODE ...`.
    #[error("{}: E_INVALID_SPEC: {}", path.display(), lines.join("; "))]
    Invalid { path: PathBuf, lines: Vec<String> },
    #[error("{}:{line}: E_CONVERSIONS: {message}", path.display())]
    Conversions {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: E_FORMAT: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error(
        "E_DUP_COMPONENT: {name}@{version} is defined differently in {} and {}",
        first.display(),
        second.display()
    )]
    DupComponent {
        name: String,
        version: String,
        first: PathBuf,
        second: PathBuf,
    },
    #[error("{}: E_LOCK: pool lock not acquired within {secs} s", path.display())]
    Lock { path: PathBuf, secs: u64 },
    #[error("E_NO_ENTRY: no pool entry {0}")]
    NoEntry(String),
    #[error("{}: E_CORRUPT: {detail}", path.display())]
    Corrupt { path: PathBuf, detail: String },
    #[error("{0}")]
    Aslt(#[from] AsltError),
    #[error("{0}")]
    Analyse(#[from] AnalyseError),
    #[error("{0}")]
    Gen(#[from] GenError),
    #[error("{0}")]
    Integrate(#[from] IntegrateError),
    #[error("{0}")]
    Template(#[from] TemplateError),
    #[error("E_USAGE: {0}")]
    Usage(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "E_IO",
            Error::Parse { err, .. } => err.code.as_str(),
            Error::Invalid { .. } => "E_INVALID_SPEC",
            Error::Conversions { .. } => "E_CONVERSIONS",
            Error::Format { .. } => "E_FORMAT",
            Error::DupComponent { .. } => "E_DUP_COMPONENT",
            Error::Lock { .. } => "E_LOCK",
            Error::NoEntry(_) => "E_NO_ENTRY",
            Error::Corrupt { .. } => "E_CORRUPT",
            Error::Aslt(e) => e.code(),
            Error::Analyse(e) => e.code(),
            Error::Gen(e) => e.code(),
            Error::Integrate(e) => e.code(),
            Error::Template(e) => e.code(),
            Error::Usage(_) => "E_USAGE",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
