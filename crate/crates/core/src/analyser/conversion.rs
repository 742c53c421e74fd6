use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;

use crate::spec_lang::SemType;
use crate::Ratio;

/// A type together with its optional unit tag.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TypeUnit {
    pub ty: SemType,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub unit: Option<String>,
}

impl TypeUnit {
    pub fn plain(ty: SemType) -> TypeUnit {
        TypeUnit { ty, unit: None }
    }

    pub fn with_unit(ty: SemType, unit: &str) -> TypeUnit {
        TypeUnit {
            ty,
            unit: Some(unit.to_string()),
        }
    }
}

impl fmt::Display for TypeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.unit {
            Some(u) => write!(f, "{}@{}", self.ty, u),
            None => write!(f, "{}", self.ty),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum ConversionRule {
    Widen,
    NarrowChecked,
    UnitScale(Ratio),
    Parse,
    Format,
}

impl ConversionRule {
    pub fn name(&self) -> &'static str {
        match self {
            ConversionRule::Widen => "WIDEN",
            ConversionRule::NarrowChecked => "NARROW_CHECKED",
            ConversionRule::UnitScale(_) => "UNIT_SCALE",
            ConversionRule::Parse => "PARSE",
            ConversionRule::Format => "FORMAT",
        }
    }
}

impl fmt::Display for ConversionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConversionRule::UnitScale(r) => write!(f, "UNIT_SCALE {}", r),
            other => f.write_str(other.name()),
        }
    }
}

/// One directional table entry.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Conversion {
    pub from: TypeUnit,
    pub to: TypeUnit,
    pub rule: ConversionRule,
}

impl fmt::Display for Conversion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} -> {}", self.rule, self.from, self.to)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TableError {
    Identity(TypeUnit),
    ZeroFactor,
    Inapplicable(String),
    Duplicate(String),
}

impl fmt::Display for TableError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableError::Identity(t) => write!(f, "identity conversion {} -> {}", t, t),
            TableError::ZeroFactor => f.write_str("UNIT_SCALE factor must be nonzero"),
            TableError::Inapplicable(m) => f.write_str(m),
            TableError::Duplicate(m) => write!(f, "duplicate entry {}", m),
        }
    }
}

impl core::error::Error for TableError {}

fn rule_applies(from: &TypeUnit, to: &TypeUnit, rule: &ConversionRule) -> bool {
    let (mut a, mut b) = (&from.ty, &to.ty);
    while let (SemType::List(x), SemType::List(y)) = (a, b) {
        a = x;
        b = y;
    }
    if matches!(a, SemType::List(_)) || matches!(b, SemType::List(_)) {
        return false;
    }
    use SemType::*;
    match rule {
        ConversionRule::Widen => {
            from.unit == to.unit && matches!((a, b), (I32, I64) | (I32, F64) | (I64, F64))
        }
        ConversionRule::NarrowChecked => {
            from.unit == to.unit && matches!((a, b), (I64, I32) | (F64, I64) | (F64, I32))
        }
        ConversionRule::UnitScale(_) => {
            a == b && a.is_numeric() && from.unit.is_some() && to.unit.is_some()
        }
        ConversionRule::Parse => {
            *a == String && from.unit.is_none() && (b.is_numeric() || *b == Bool)
        }
        ConversionRule::Format => {
            *b == String && to.unit.is_none() && (a.is_numeric() || *a == Bool)
        }
    }
}

/// Directional representation-bridging rules, keyed by (from, to).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConversionTable {
    entries: BTreeMap<(TypeUnit, TypeUnit), ConversionRule>,
}

impl ConversionTable {
    pub fn new() -> ConversionTable {
        ConversionTable::default()
    }

    pub fn insert(
        &mut self,
        from: TypeUnit,
        to: TypeUnit,
        rule: ConversionRule,
    ) -> Result<(), TableError> {
        if from == to {
            return Err(TableError::Identity(from));
        }
        if let ConversionRule::UnitScale(r) = rule {
            if r.is_zero() {
                return Err(TableError::ZeroFactor);
            }
        }
        if !rule_applies(&from, &to, &rule) {
            return Err(TableError::Inapplicable(format!(
                "{} does not apply to {} -> {}",
                rule.name(),
                from,
                to
            )));
        }
        let key = (from, to);
        if self.entries.contains_key(&key) {
            return Err(TableError::Duplicate(format!("{} -> {}", key.0, key.1)));
        }
        self.entries.insert(key, rule);
        Ok(())
    }

    pub fn lookup(&self, from: &TypeUnit, to: &TypeUnit) -> Option<Conversion> {
        // BTreeMap lookup needs an owned tuple key
        self.entries
            .get(&(from.clone(), to.clone()))
            .map(|rule| Conversion {
                from: from.clone(),
                to: to.clone(),
                rule: *rule,
            })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Conversion> + '_ {
        self.entries.iter().map(|((from, to), rule)| Conversion {
            from: from.clone(),
            to: to.clone(),
            rule: *rule,
        })
    }
}
