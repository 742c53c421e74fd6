//! Human and structured renderings of match reports and workflow results.

use std::fmt::Write;
use std::path::Path;

use adapterforge_core::analyser::{MatchReport, Verdict};

use crate::error::Result;
use crate::formats::{canonical_json, parse_json};
use crate::linkage::{Outcome, WorkflowResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Human,
    Structured,
}

/// One verdict line per connection, mismatches indented below it.
pub fn human_match_report(r: &MatchReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "project {}", r.project);
    for c in &r.connections {
        let _ = write!(out, "connection {} {}: {}", c.index, c.connection, c.verdict.label());
        match &c.verdict {
            Verdict::Exact => {}
            Verdict::Adaptable { score, .. } => {
                let _ = write!(out, " score {}", score.to_decimal(3));
            }
            Verdict::Incompatible { reason, .. } => {
                let _ = write!(out, " ({})", reason);
            }
        }
        out.push('\n');
        for m in c.verdict.mismatches() {
            let _ = writeln!(out, "  {}: {}", m.operation, m.mismatch);
        }
    }
    for d in &r.demands {
        let _ = writeln!(out, "demand {}: UNMET", d);
    }
    out
}

pub fn human_workflow(w: &WorkflowResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "outcome {}", w.outcome);
    for i in &w.integrations {
        let _ = writeln!(
            out,
            "integration {} {} {} {} {}",
            i.connection.map_or_else(|| "demand".to_string(), |c| c.to_string()),
            match &i.source {
                crate::linkage::IntegrationSource::PoolHit { .. } => "POOL_HIT",
                crate::linkage::IntegrationSource::Generated { .. } => "GENERATED",
            },
            i.kind,
            i.component,
            i.source.fingerprint()
        );
    }
    if let Outcome::Unresolvable {
        demands,
        diagnostics,
    } = &w.outcome
    {
        for d in demands {
            let _ = writeln!(out, "unresolved {}", d);
        }
        for d in diagnostics {
            let _ = writeln!(out, "diagnostic {}", d);
        }
    }
    out.push_str(&human_match_report(&w.final_report));
    out
}

pub fn render_match_report(r: &MatchReport, f: Format) -> String {
    match f {
        Format::Human => human_match_report(r),
        Format::Structured => canonical_json(r),
    }
}

pub fn render_workflow(w: &WorkflowResult, f: Format) -> String {
    match f {
        Format::Human => human_workflow(w),
        Format::Structured => canonical_json(w),
    }
}

pub fn parse_match_report(text: &str, path: &Path) -> Result<MatchReport> {
    parse_json(text, path)
}

pub fn parse_workflow(text: &str, path: &Path) -> Result<WorkflowResult> {
    parse_json(text, path)
}
