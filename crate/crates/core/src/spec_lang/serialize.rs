//! Canonical text form. Two-space indentation, interfaces ordered by
//! (direction, name), operations and parameters in declaration order, meta
//! entries ordered by key. Project items are grouped as uses, connections,
//! demands, each in declaration order.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::model::*;

fn write_param(out: &mut String, p: &ParamSig) {
    if let Some(c) = &p.concept {
        let _ = write!(out, "@concept({}) ", c);
    }
    if let Some(u) = &p.unit {
        let _ = write!(out, "@unit({}) ", u);
    }
    let _ = write!(out, "{}: {}", p.name, p.ty);
    if let Some(d) = &p.default {
        let _ = write!(out, " = {}", d);
    }
}

/// One operation, without indentation or trailing newline on the last line.
pub fn serialize_operation(op: &OperationSig, indent: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}@concept({})", indent, op.concept);
    let _ = write!(out, "{}op {}(", indent, op.name);
    for (i, p) in op.params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_param(&mut out, p);
    }
    out.push(')');
    if op.returns != SemType::Unit {
        let _ = write!(out, " -> {}", op.returns);
    }
    out.push(';');
    out
}

pub fn serialize_interface(iface: &InterfaceSpec, indent: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}{} interface {} {{",
        indent,
        iface.direction.keyword(),
        iface.name
    );
    let inner = alloc::format!("{}  ", indent);
    for op in &iface.operations {
        out.push_str(&serialize_operation(op, &inner));
        out.push('\n');
    }
    let _ = writeln!(out, "{}}}", indent);
    out
}

pub fn serialize_component(spec: &ComponentSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "component \"{}\" version \"{}\" {{",
        spec.name, spec.version
    );
    let mut meta: Vec<&MetaEntry> = spec.meta.iter().collect();
    meta.sort_by(|a, b| a.key.cmp(&b.key));
    for m in meta {
        let _ = writeln!(
            out,
            "  meta {} = {};",
            m.key,
            Literal::Str(m.value.clone())
        );
    }
    for list in [&spec.provided, &spec.required] {
        let mut ifaces: Vec<&InterfaceSpec> = list.iter().collect();
        ifaces.sort_by(|a, b| a.name.cmp(&b.name));
        for iface in ifaces {
            out.push_str(&serialize_interface(iface, "  "));
        }
    }
    out.push_str("}\n");
    out
}

pub fn serialize_project(spec: &ProjectSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "project \"{}\" {{", spec.name);
    for u in &spec.uses {
        let _ = writeln!(
            out,
            "  uses \"{}\" version \"{}\";",
            u.component, u.constraint
        );
    }
    for c in &spec.connections {
        let _ = writeln!(out, "  connect {};", c);
    }
    for d in &spec.demands {
        let _ = writeln!(out, "  demand {};", d);
    }
    out.push_str("}\n");
    out
}

pub fn serialize(doc: &SpecDocument) -> String {
    match doc {
        SpecDocument::Component(c) => serialize_component(c),
        SpecDocument::Project(p) => serialize_project(p),
    }
}
