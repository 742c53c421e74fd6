use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::model::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationCode {
    ConceptDepth,
    ListDepth,
    DefaultType,
    UnitType,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::ConceptDepth => "V_CONCEPT_DEPTH",
            ViolationCode::ListDepth => "V_LIST_DEPTH",
            ViolationCode::DefaultType => "V_DEFAULT_TYPE",
            ViolationCode::UnitType => "V_UNIT_TYPE",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A semantic defect that survives parsing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    /// `interface.op` or `interface.op.param`.
    pub path: String,
    pub loc: Loc,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {} at {}: {}",
            self.loc.line, self.loc.col, self.code, self.path, self.message
        )
    }
}

fn check_concept(out: &mut Vec<Violation>, c: &ConceptId, path: &str, loc: Loc) {
    if c.depth() > MAX_CONCEPT_SEGMENTS {
        out.push(Violation {
            code: ViolationCode::ConceptDepth,
            path: path.into(),
            loc,
            message: format!(
                "concept `{}` has {} segments (max {})",
                c,
                c.depth(),
                MAX_CONCEPT_SEGMENTS
            ),
        });
    }
}

fn check_type(out: &mut Vec<Violation>, ty: &SemType, path: &str, loc: Loc) {
    if ty.list_depth() > MAX_LIST_DEPTH {
        out.push(Violation {
            code: ViolationCode::ListDepth,
            path: path.into(),
            loc,
            message: format!(
                "type `{}` nests lists {} deep (max {})",
                ty,
                ty.list_depth(),
                MAX_LIST_DEPTH
            ),
        });
    }
}

/// Reports every semantic violation; an empty result means the spec is valid.
pub fn validate(spec: &ComponentSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    for iface in spec.interfaces() {
        for op in &iface.operations {
            let op_path = format!("{}.{}", iface.name, op.name);
            check_concept(&mut out, &op.concept, &op_path, op.loc);
            check_type(&mut out, &op.returns, &op_path, op.loc);
            for p in &op.params {
                let path = format!("{}.{}", op_path, p.name);
                if let Some(c) = &p.concept {
                    check_concept(&mut out, c, &path, p.loc);
                }
                check_type(&mut out, &p.ty, &path, p.loc);
                if let Some(d) = &p.default {
                    if !d.fits(&p.ty) {
                        out.push(Violation {
                            code: ViolationCode::DefaultType,
                            path: path.clone(),
                            loc: p.loc,
                            message: format!("default `{}` is not a value of `{}`", d, p.ty),
                        });
                    }
                }
                if p.unit.is_some() && !p.ty.element().is_numeric() {
                    out.push(Violation {
                        code: ViolationCode::UnitType,
                        path,
                        loc: p.loc,
                        message: format!("unit on non-numeric type `{}`", p.ty),
                    });
                }
            }
        }
    }
    out
}
