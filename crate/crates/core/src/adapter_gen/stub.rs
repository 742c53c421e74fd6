//! Renders an adapter as source text through a placeholder template.
//!
//! A template is plain text with `{NAME}` placeholders. The per-operation
//! part sits between `{OP_BEGIN}` and `{OP_END}`; it is cut out, rendered
//! once per mapping, and the results are joined at `{OP_LIST}`. Unknown
//! placeholders are left alone. Substituted values are never rescanned.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::generate::{AdapterSpec, OpMapping, ReturnAction, SlotAction};
use crate::analyser::{Conversion, ConversionRule};
use crate::spec_lang::{OperationSig, SemType};

pub const DEFAULT_TEMPLATE: &str = include_str!("../../templates/default.stub");

const REQUIRED_MAIN: [&str; 2] = ["ADAPTER_NAME", "OP_LIST"];
const REQUIRED_OP: [&str; 1] = ["SLOT_ACTIONS"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TemplateError {
    MissingPlaceholder(&'static str),
    /// `{OP_BEGIN}` without `{OP_END}` or the reverse.
    UnbalancedSection,
}

impl TemplateError {
    pub fn code(&self) -> &'static str {
        "E_TEMPLATE"
    }
}

impl fmt::Display for TemplateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemplateError::MissingPlaceholder(p) => {
                write!(f, "E_TEMPLATE: template lacks required placeholder {{{}}}", p)
            }
            TemplateError::UnbalancedSection => {
                f.write_str("E_TEMPLATE: {OP_BEGIN} and {OP_END} must appear once each, in order")
            }
        }
    }
}

impl core::error::Error for TemplateError {}

fn has(text: &str, name: &str) -> bool {
    text.contains(&format!("{{{}}}", name))
}

/// Single pass over `text`, replacing `{NAME}` for names in `vars`.
fn substitute(text: &str, vars: &BTreeMap<&str, String>) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let close = after.find('}');
        let name = close.map(|c| &after[..c]);
        match name.and_then(|n| vars.get(n).map(|v| (n, v))) {
            Some((n, v)) => {
                out.push_str(v);
                rest = &after[n.len() + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Splits a template into the main text and the per-operation section.
fn split(template: &str) -> Result<(String, String), TemplateError> {
    const BEGIN: &str = "{OP_BEGIN}";
    const END: &str = "{OP_END}";
    let b = template.find(BEGIN);
    let e = template.find(END);
    match (b, e) {
        (None, None) => Err(TemplateError::MissingPlaceholder("OP_BEGIN")),
        (Some(b), Some(e))
            if b < e
                && template.matches(BEGIN).count() == 1
                && template.matches(END).count() == 1 =>
        {
            let mut body = &template[b + BEGIN.len()..e];
            body = body.strip_prefix('\n').unwrap_or(body);
            let mut tail = &template[e + END.len()..];
            tail = tail.strip_prefix('\n').unwrap_or(tail);
            let mut main = String::from(&template[..b]);
            main.push_str(tail);
            Ok((main, body.to_string()))
        }
        _ => Err(TemplateError::UnbalancedSection),
    }
}

/// Checks a template without rendering anything.
pub fn check_template(template: &str) -> Result<(), TemplateError> {
    let (main, body) = split(template)?;
    for p in REQUIRED_MAIN {
        if !has(&main, p) {
            return Err(TemplateError::MissingPlaceholder(p));
        }
    }
    for p in REQUIRED_OP {
        if !has(&body, p) {
            return Err(TemplateError::MissingPlaceholder(p));
        }
    }
    Ok(())
}

fn conversion_call(c: &Conversion, arg: &str) -> String {
    match &c.rule {
        ConversionRule::Widen => format!("widen::<{}>({})", c.to.ty, arg),
        ConversionRule::NarrowChecked => format!("narrow_checked::<{}>({})", c.to.ty, arg),
        ConversionRule::UnitScale(r) => format!("unit_scale({}, {})", arg, r),
        ConversionRule::Parse => format!("parse::<{}>({})", c.to.ty, arg),
        ConversionRule::Format => format!("format({})", arg),
    }
}

fn slot_actions(m: &OpMapping, op: Option<&OperationSig>) -> String {
    let arg = |i: usize| -> String {
        op.and_then(|o| o.params.get(i))
            .map(|p| p.name.clone())
            .unwrap_or_else(|| format!("arg{}", i))
    };
    m.slots
        .iter()
        .map(|s| match s {
            SlotAction::Take(i) => arg(*i),
            SlotAction::Convert(i, c) => conversion_call(c, &arg(*i)),
            SlotAction::Fill(l) => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn render_op(body: &str, adapter: &AdapterSpec, m: &OpMapping) -> String {
    let op = adapter.implements.operation(&m.from);
    let params = op
        .map(|o| {
            o.params
                .iter()
                .map(|p| format!("{}: {}", p.name, p.ty))
                .collect::<Vec<_>>()
                .join(", ")
        })
        .unwrap_or_default();
    let returns = op.map(|o| o.returns.clone()).unwrap_or(SemType::Unit);
    let ret = match &m.return_action {
        ReturnAction::Pass => String::from("result"),
        ReturnAction::Convert(c) => conversion_call(c, "result"),
    };
    let mut vars = BTreeMap::new();
    vars.insert("OP_FROM", m.from.clone());
    vars.insert("OP_TO", m.to.clone());
    vars.insert("OP_PARAMS", params);
    vars.insert("OP_RETURNS", returns.to_string());
    vars.insert("SLOT_ACTIONS", slot_actions(m, op));
    vars.insert("RETURN_ACTION", ret);
    vars.insert("MAPPING", m.to_string());
    substitute(body, &vars)
}

/// Renders `adapter` through `template`.
pub fn emit_stub(adapter: &AdapterSpec, template: &str) -> Result<String, TemplateError> {
    check_template(template)?;
    let (main, body) = split(template)?;
    let ops: String = adapter
        .mappings
        .iter()
        .map(|m| render_op(&body, adapter, m))
        .collect();
    let mut vars = BTreeMap::new();
    vars.insert("ADAPTER_NAME", adapter.name.clone());
    vars.insert("VERSION", adapter.version.to_string());
    vars.insert("CONSUMER", adapter.consumer.clone());
    vars.insert("PROVIDER", adapter.provider.clone());
    vars.insert("IMPLEMENTS", adapter.implements.name.clone());
    vars.insert("DELEGATES_TO", adapter.delegates_to.name.clone());
    vars.insert("PROJECT", adapter.provenance.project.clone());
    vars.insert("SCORE", adapter.provenance.score.to_decimal(3));
    vars.insert("TOOL_VERSION", adapter.provenance.tool_version.clone());
    vars.insert("OP_LIST", ops);
    Ok(substitute(&main, &vars))
}
