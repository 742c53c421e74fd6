use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::hash::{Hash, Hasher};

/// Source position of an element. Positions are diagnostic only and never
/// take part in structural equality or ordering.
#[derive(Clone, Copy, Debug, Default)]
pub struct Loc {
    pub line: u32,
    pub col: u32,
}

impl Loc {
    pub fn new(line: u32, col: u32) -> Loc {
        Loc { line, col }
    }
}

impl PartialEq for Loc {
    fn eq(&self, _: &Loc) -> bool {
        true
    }
}
impl Eq for Loc {}

impl Hash for Loc {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

/// Name of the file a spec was read from, if any. Like [`Loc`], it is
/// ignored by equality.
#[derive(Clone, Debug, Default)]
pub struct SourceName(pub Option<String>);

impl PartialEq for SourceName {
    fn eq(&self, _: &SourceName) -> bool {
        true
    }
}
impl Eq for SourceName {}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_concept_segment(s: &str) -> bool {
    let mut bytes = s.bytes();
    match bytes.next() {
        Some(b) if b.is_ascii_lowercase() => {}
        _ => return false,
    }
    bytes.all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

/// Maximum number of segments a concept may carry before `validate` flags it.
pub const MAX_CONCEPT_SEGMENTS: usize = 8;

/// Dotted semantic tag such as `data.sorting.sort`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptId(String);

impl ConceptId {
    /// Checks segment syntax only; depth is a validation concern.
    pub fn parse(s: &str) -> Option<ConceptId> {
        if s.is_empty() || !s.split('.').all(is_concept_segment) {
            return None;
        }
        Some(ConceptId(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn segments(&self) -> impl Iterator<Item = &str> {
        self.0.split('.')
    }

    pub fn depth(&self) -> usize {
        self.0.split('.').count()
    }

    /// `self` is a strict prefix of `other` at segment granularity.
    pub fn is_ancestor_of(&self, other: &ConceptId) -> bool {
        other.0.len() > self.0.len()
            && other.0.starts_with(&self.0)
            && other.0.as_bytes()[self.0.len()] == b'.'
    }

    /// Number of hops between two concepts on the same ancestry line;
    /// `Some(0)` when equal, `None` when neither is an ancestor of the other.
    pub fn hops_to(&self, other: &ConceptId) -> Option<usize> {
        if self == other {
            Some(0)
        } else if self.is_ancestor_of(other) || other.is_ancestor_of(self) {
            Some(self.depth().abs_diff(other.depth()))
        } else {
            None
        }
    }

    /// Concept of an unannotated parameter: `<op concept>.arg.<name>`.
    /// The name is lowercased; the result is not re-validated.
    pub fn argument(op: &ConceptId, param: &str) -> ConceptId {
        let mut s = op.0.clone();
        s.push_str(".arg.");
        s.push_str(&param.to_ascii_lowercase());
        ConceptId(s)
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Version {
    pub major: u64,
    pub minor: u64,
    pub patch: u64,
}

impl Version {
    pub const fn new(major: u64, minor: u64, patch: u64) -> Version {
        Version {
            major,
            minor,
            patch,
        }
    }

    pub fn parse(s: &str) -> Option<Version> {
        let mut parts = s.split('.');
        let mut next = || -> Option<u64> {
            let p = parts.next()?;
            if p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            p.parse().ok()
        };
        let v = Version::new(next()?, next()?, next()?);
        if parts.next().is_some() {
            return None;
        }
        Some(v)
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.major, self.minor, self.patch)
    }
}

/// `*`, `=x.y.z` or `>=x.y.z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VersionConstraint {
    Any,
    Exact(Version),
    AtLeast(Version),
}

impl VersionConstraint {
    pub fn parse(s: &str) -> Option<VersionConstraint> {
        let s = s.trim();
        if s == "*" {
            Some(VersionConstraint::Any)
        } else if let Some(rest) = s.strip_prefix(">=") {
            Version::parse(rest.trim()).map(VersionConstraint::AtLeast)
        } else if let Some(rest) = s.strip_prefix('=') {
            Version::parse(rest.trim()).map(VersionConstraint::Exact)
        } else {
            None
        }
    }

    pub fn matches(&self, v: &Version) -> bool {
        match self {
            VersionConstraint::Any => true,
            VersionConstraint::Exact(x) => v == x,
            VersionConstraint::AtLeast(x) => v >= x,
        }
    }
}

impl fmt::Display for VersionConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VersionConstraint::Any => f.write_str("*"),
            VersionConstraint::Exact(v) => write!(f, "={}", v),
            VersionConstraint::AtLeast(v) => write!(f, ">={}", v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SemType {
    I32,
    I64,
    F64,
    Bool,
    String,
    Bytes,
    Unit,
    List(Box<SemType>),
}

/// Deepest `list<...>` nesting accepted by `validate`.
pub const MAX_LIST_DEPTH: usize = 3;

impl SemType {
    pub fn list_of(inner: SemType) -> SemType {
        SemType::List(Box::new(inner))
    }

    pub fn list_depth(&self) -> usize {
        match self {
            SemType::List(inner) => 1 + inner.list_depth(),
            _ => 0,
        }
    }

    /// Innermost non-list type.
    pub fn element(&self) -> &SemType {
        match self {
            SemType::List(inner) => inner.element(),
            other => other,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, SemType::I32 | SemType::I64 | SemType::F64)
    }

    pub fn from_keyword(s: &str) -> Option<SemType> {
        Some(match s {
            "i32" => SemType::I32,
            "i64" => SemType::I64,
            "f64" => SemType::F64,
            "bool" => SemType::Bool,
            "string" => SemType::String,
            "bytes" => SemType::Bytes,
            "unit" => SemType::Unit,
            _ => return None,
        })
    }
}

impl fmt::Display for SemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemType::I32 => f.write_str("i32"),
            SemType::I64 => f.write_str("i64"),
            SemType::F64 => f.write_str("f64"),
            SemType::Bool => f.write_str("bool"),
            SemType::String => f.write_str("string"),
            SemType::Bytes => f.write_str("bytes"),
            SemType::Unit => f.write_str("unit"),
            SemType::List(inner) => write!(f, "list<{}>", inner),
        }
    }
}

/// A literal value. Also serves as the runtime value of the mapping
/// interpreter.
#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    Bytes(Vec<u8>),
    Unit,
    List(Vec<Literal>),
}

impl Literal {
    /// Whether the literal is a value of `ty`. Integers fit `i32` only
    /// within range.
    pub fn fits(&self, ty: &SemType) -> bool {
        match (self, ty) {
            (Literal::Int(v), SemType::I32) => i32::try_from(*v).is_ok(),
            (Literal::Int(_), SemType::I64) => true,
            (Literal::Float(_), SemType::F64) => true,
            (Literal::Bool(_), SemType::Bool) => true,
            (Literal::Str(_), SemType::String) => true,
            (Literal::Bytes(_), SemType::Bytes) => true,
            (Literal::Unit, SemType::Unit) => true,
            (Literal::List(items), SemType::List(inner)) => items.iter().all(|i| i.fits(inner)),
            _ => false,
        }
    }
}

impl Eq for Literal {}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        fn rank(l: &Literal) -> u8 {
            match l {
                Literal::Int(_) => 0,
                Literal::Float(_) => 1,
                Literal::Bool(_) => 2,
                Literal::Str(_) => 3,
                Literal::Bytes(_) => 4,
                Literal::Unit => 5,
                Literal::List(_) => 6,
            }
        }
        match (self, other) {
            (Literal::Int(a), Literal::Int(b)) => a.cmp(b),
            (Literal::Float(a), Literal::Float(b)) => a.total_cmp(b),
            (Literal::Bool(a), Literal::Bool(b)) => a.cmp(b),
            (Literal::Str(a), Literal::Str(b)) => a.cmp(b),
            (Literal::Bytes(a), Literal::Bytes(b)) => a.cmp(b),
            (Literal::Unit, Literal::Unit) => Ordering::Equal,
            (Literal::List(a), Literal::List(b)) => a.cmp(b),
            (a, b) => rank(a).cmp(&rank(b)),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(v) => write!(f, "{}", v),
            Literal::Float(v) => write!(f, "{:?}", v),
            Literal::Bool(v) => write!(f, "{}", v),
            Literal::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\t' => f.write_str("\\t")?,
                        '\r' => f.write_str("\\r")?,
                        c if c.is_control() => write!(f, "\\u{{{:x}}}", c as u32)?,
                        c => write!(f, "{}", c)?,
                    }
                }
                f.write_str("\"")
            }
            Literal::Bytes(b) => {
                f.write_str("x\"")?;
                for byte in b {
                    write!(f, "{:02x}", byte)?;
                }
                f.write_str("\"")
            }
            Literal::Unit => f.write_str("()"),
            Literal::List(items) => {
                f.write_str("[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}", item)?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetaEntry {
    pub key: String,
    pub value: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Direction {
    Provided,
    Required,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::Provided => "provides",
            Direction::Required => "requires",
        }
    }

    pub fn flipped(self) -> Direction {
        match self {
            Direction::Provided => Direction::Required,
            Direction::Required => Direction::Provided,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParamSig {
    pub name: String,
    pub ty: SemType,
    /// Explicit concept; see [`ParamSig::effective_concept`].
    pub concept: Option<ConceptId>,
    pub unit: Option<String>,
    pub default: Option<Literal>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub loc: Loc,
}

impl ParamSig {
    pub fn new(name: &str, ty: SemType) -> ParamSig {
        ParamSig {
            name: name.to_string(),
            ty,
            concept: None,
            unit: None,
            default: None,
            loc: Loc::default(),
        }
    }

    pub fn with_concept(mut self, c: ConceptId) -> ParamSig {
        self.concept = Some(c);
        self
    }

    pub fn with_unit(mut self, unit: &str) -> ParamSig {
        self.unit = Some(unit.to_string());
        self
    }

    pub fn with_default(mut self, lit: Literal) -> ParamSig {
        self.default = Some(lit);
        self
    }

    pub fn effective_concept(&self, op_concept: &ConceptId) -> ConceptId {
        match &self.concept {
            Some(c) => c.clone(),
            None => ConceptId::argument(op_concept, &self.name),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OperationSig {
    pub name: String,
    pub params: Vec<ParamSig>,
    pub returns: SemType,
    pub concept: ConceptId,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub loc: Loc,
}

impl OperationSig {
    pub fn new(name: &str, concept: ConceptId, params: Vec<ParamSig>, returns: SemType) -> Self {
        OperationSig {
            name: name.to_string(),
            params,
            returns,
            concept,
            loc: Loc::default(),
        }
    }

    pub fn param_concepts(&self) -> Vec<ConceptId> {
        self.params
            .iter()
            .map(|p| p.effective_concept(&self.concept))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InterfaceSpec {
    pub name: String,
    pub direction: Direction,
    pub operations: Vec<OperationSig>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub loc: Loc,
}

impl InterfaceSpec {
    pub fn new(name: &str, direction: Direction, operations: Vec<OperationSig>) -> Self {
        InterfaceSpec {
            name: name.to_string(),
            direction,
            operations,
            loc: Loc::default(),
        }
    }

    pub fn operation(&self, name: &str) -> Option<&OperationSig> {
        self.operations.iter().find(|o| o.name == name)
    }

    /// Same interface seen from the other side of a connection.
    pub fn flipped(&self) -> InterfaceSpec {
        InterfaceSpec {
            direction: self.direction.flipped(),
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComponentSpec {
    pub name: String,
    pub version: Version,
    pub provided: Vec<InterfaceSpec>,
    pub required: Vec<InterfaceSpec>,
    pub meta: Vec<MetaEntry>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub source: SourceName,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub loc: Loc,
}

impl ComponentSpec {
    pub fn new(name: &str, version: Version) -> ComponentSpec {
        ComponentSpec {
            name: name.to_string(),
            version,
            provided: Vec::new(),
            required: Vec::new(),
            meta: Vec::new(),
            source: SourceName::default(),
            loc: Loc::default(),
        }
    }

    /// Sorts interfaces by name and meta entries by key (stable), the
    /// order canonical serialization uses.
    pub fn normalize(&mut self) {
        self.provided.sort_by(|a, b| a.name.cmp(&b.name));
        self.required.sort_by(|a, b| a.name.cmp(&b.name));
        self.meta.sort_by(|a, b| a.key.cmp(&b.key));
    }

    pub fn provided_interface(&self, name: &str) -> Option<&InterfaceSpec> {
        self.provided.iter().find(|i| i.name == name)
    }

    pub fn required_interface(&self, name: &str) -> Option<&InterfaceSpec> {
        self.required.iter().find(|i| i.name == name)
    }

    /// Interfaces in canonical (direction, name) order.
    pub fn interfaces(&self) -> impl Iterator<Item = &InterfaceSpec> {
        self.provided.iter().chain(self.required.iter())
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|m| m.key == key)
            .map(|m| m.value.as_str())
    }

    /// Sorted, deduplicated operation concepts across provided interfaces.
    pub fn provided_concepts(&self) -> Vec<ConceptId> {
        let mut out: Vec<ConceptId> = self
            .provided
            .iter()
            .flat_map(|i| i.operations.iter().map(|o| o.concept.clone()))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UseDecl {
    pub component: String,
    pub constraint: VersionConstraint,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Endpoint {
    pub component: String,
    pub interface: String,
}

impl Endpoint {
    pub fn new(component: &str, interface: &str) -> Endpoint {
        Endpoint {
            component: component.to_string(),
            interface: interface.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Connection {
    /// Component and required interface.
    pub consumer: Endpoint,
    /// Component and provided interface.
    pub provider: Endpoint,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub loc: Loc,
}

impl Connection {
    pub fn new(consumer: Endpoint, provider: Endpoint) -> Connection {
        Connection {
            consumer,
            provider,
            loc: Loc::default(),
        }
    }
}

impl fmt::Display for Connection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.requires.{} -> {}.provides.{}",
            self.consumer.component,
            self.consumer.interface,
            self.provider.component,
            self.provider.interface
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProjectSpec {
    pub name: String,
    pub uses: Vec<UseDecl>,
    pub connections: Vec<Connection>,
    pub demands: Vec<ConceptId>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub source: SourceName,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub loc: Loc,
}

impl ProjectSpec {
    pub fn new(name: &str) -> ProjectSpec {
        ProjectSpec {
            name: name.to_string(),
            uses: Vec::new(),
            connections: Vec::new(),
            demands: Vec::new(),
            source: SourceName::default(),
            loc: Loc::default(),
        }
    }

    pub fn use_of(&self, component: &str) -> Option<&UseDecl> {
        self.uses.iter().find(|u| u.component == component)
    }
}

/// Either kind of spec document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpecDocument {
    Component(ComponentSpec),
    Project(ProjectSpec),
}

#[cfg(feature = "serde")]
macro_rules! serde_via_str {
    ($t:ty, $parse:expr) => {
        impl serde::Serialize for $t {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }
        impl<'de> serde::Deserialize<'de> for $t {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = <String as serde::Deserialize>::deserialize(d)?;
                $parse(&s).ok_or_else(|| {
                    serde::de::Error::custom(alloc::format!(
                        "invalid {}: {:?}",
                        stringify!($t),
                        s
                    ))
                })
            }
        }
    };
}

#[cfg(feature = "serde")]
mod serde_impls {
    use super::*;
    use crate::spec_lang::parser::{parse_literal, parse_type};

    serde_via_str!(ConceptId, ConceptId::parse);
    serde_via_str!(Version, Version::parse);
    serde_via_str!(VersionConstraint, VersionConstraint::parse);
    serde_via_str!(SemType, |s: &str| parse_type(s).ok());
    serde_via_str!(Literal, |s: &str| parse_literal(s).ok());
}
