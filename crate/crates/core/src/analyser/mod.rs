//! Semantic comparison of component specifications against a project.
//!
//! Matching is concept-first: operations are candidates only when their
//! concepts lie on one ancestry line, parameters pair up by concept, and
//! structural differences are classified into mismatches that each cost a
//! fixed penalty from [`Scoring`].

mod analyse;
mod conversion;
mod matching;
mod scoring;

pub use analyse::{
    analyse, analyse_connection, best_match, resolve_endpoint, verify, AnalyseError,
    ConnectionReport, Demand, DemandOrigin, LocatedMismatch, MatchReport, OpShape,
    OperationOutcome, ShapeParam, Verdict,
};
pub use conversion::{Conversion, ConversionRule, ConversionTable, TableError, TypeUnit};
pub use matching::{match_operation, Mismatch, MismatchKind, OperationMatch, Slot};
pub use scoring::Scoring;
