//! On-disk formats: conversion tables, adapter descriptors and the
//! canonical JSON used by descriptors, reports and the pool index.

use std::path::Path;

use adapterforge_core::adapter_gen::AdapterSpec;
use adapterforge_core::analyser::{ConversionRule, ConversionTable, TypeUnit};
use adapterforge_core::spec_lang::{parse_type, SemType};
use adapterforge_core::Ratio;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::specs::read_text;

pub const DESCRIPTOR_EXT: &str = "adapter";

/// Key-sorted, two-space indented JSON with a trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    // going through Value sorts object keys
    let v = serde_json::to_value(value).expect("in-memory value serializes");
    let mut s = serde_json::to_string_pretty(&v).expect("Value serializes");
    s.push('\n');
    s
}

pub fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Format {
        path: path.into(),
        message: e.to_string(),
    })
}

pub fn emit_descriptor(adapter: &AdapterSpec) -> String {
    canonical_json(adapter)
}

pub fn parse_descriptor(text: &str, path: &Path) -> Result<AdapterSpec> {
    parse_json(text, path)
}

/// Table used when no conversions file is given: lossless numeric
/// widening only.
pub fn default_conversions() -> ConversionTable {
    let mut t = ConversionTable::new();
    for (a, b) in [
        (SemType::I32, SemType::I64),
        (SemType::I32, SemType::F64),
        (SemType::I64, SemType::F64),
    ] {
        t.insert(TypeUnit::plain(a), TypeUnit::plain(b), ConversionRule::Widen)
            .expect("built-in rule is valid");
    }
    t
}

fn opt(field: &str) -> Option<&str> {
    (field != "-").then_some(field)
}

fn parse_rule_line(line: &str) -> std::result::Result<(TypeUnit, TypeUnit, ConversionRule), String> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    let [from_ty, from_unit, to_ty, to_unit, rule, num, den] = fields[..] else {
        return Err(format!("expected 7 comma-separated fields, found {}", fields.len()));
    };
    let ty = |s: &str| parse_type(s).map_err(|e| format!("bad type `{}`: {}", s, e.message));
    let unit = |s: &str| -> std::result::Result<Option<String>, String> {
        match opt(s) {
            None => Ok(None),
            Some(u) if adapterforge_core::spec_lang::is_identifier(u) => Ok(Some(u.into())),
            Some(u) => Err(format!("bad unit `{}`", u)),
        }
    };
    let from = TypeUnit {
        ty: ty(from_ty)?,
        unit: unit(from_unit)?,
    };
    let to = TypeUnit {
        ty: ty(to_ty)?,
        unit: unit(to_unit)?,
    };
    let factor = match (opt(num), opt(den)) {
        (None, None) => None,
        (Some(n), Some(d)) => {
            let n: i64 = n.parse().map_err(|_| format!("bad numerator `{}`", n))?;
            let d: i64 = d.parse().map_err(|_| format!("bad denominator `{}`", d))?;
            if d == 0 {
                return Err("zero denominator".into());
            }
            Some(Ratio::new(n, d))
        }
        _ => return Err("numerator and denominator must both be given or both be `-`".into()),
    };
    let rule = match (rule, factor) {
        ("WIDEN", None) => ConversionRule::Widen,
        ("NARROW_CHECKED", None) => ConversionRule::NarrowChecked,
        ("PARSE", None) => ConversionRule::Parse,
        ("FORMAT", None) => ConversionRule::Format,
        ("UNIT_SCALE", Some(f)) => ConversionRule::UnitScale(f),
        ("UNIT_SCALE", None) => return Err("UNIT_SCALE needs a factor".into()),
        ("WIDEN" | "NARROW_CHECKED" | "PARSE" | "FORMAT", Some(_)) => {
            return Err(format!("{} takes no factor", rule))
        }
        (other, _) => return Err(format!("unknown rule `{}`", other)),
    };
    Ok((from, to, rule))
}

/// Parses a conversions file: one rule per line,
/// `from-type, from-unit, to-type, to-unit, RULE, num, den`, `-` for an
/// absent field, `#` starts a comment.
pub fn parse_conversions(text: &str, path: &Path) -> Result<ConversionTable> {
    let mut table = ConversionTable::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Conversions {
            path: path.into(),
            line: i + 1,
            message,
        };
        let (from, to, rule) = parse_rule_line(line).map_err(err)?;
        table
            .insert(from, to, rule)
            .map_err(|e| err(e.to_string()))?;
    }
    Ok(table)
}

pub fn load_conversions(path: &Path) -> Result<ConversionTable> {
    parse_conversions(&read_text(path)?, path)
}

pub fn write_conversions(table: &ConversionTable) -> String {
    let mut out = String::from("# from-type, from-unit, to-type, to-unit, rule, num, den\n");
    for c in table.iter() {
        let (num, den) = match c.rule {
            ConversionRule::UnitScale(r) => (r.numer().to_string(), r.denom().to_string()),
            _ => ("-".into(), "-".into()),
        };
        out.push_str(&format!(
            "{}, {}, {}, {}, {}, {}, {}\n",
            c.from.ty,
            c.from.unit.as_deref().unwrap_or("-"),
            c.to.ty,
            c.to.unit.as_deref().unwrap_or("-"),
            c.rule.name(),
            num,
            den
        ));
    }
    out
}
