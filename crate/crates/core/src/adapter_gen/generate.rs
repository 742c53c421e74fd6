use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write;

use sha2::{Digest, Sha256};

use crate::analyser::{
    Conversion, ConnectionReport, Mismatch, OperationMatch, OperationOutcome, Slot, Verdict,
};
use crate::spec_lang::{
    serialize_interface, ComponentSpec, InterfaceSpec, Literal, MetaEntry, OperationSig, Version,
};
use crate::Ratio;

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum SlotAction {
    /// Pass consumer argument `i` through.
    Take(usize),
    Convert(usize, Conversion),
    Fill(Literal),
}

impl fmt::Display for SlotAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlotAction::Take(i) => write!(f, "TAKE({})", i),
            SlotAction::Convert(i, c) => write!(f, "CONVERT({}, {})", i, c),
            SlotAction::Fill(l) => write!(f, "FILL({})", l),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum ReturnAction {
    Pass,
    Convert(Conversion),
}

impl fmt::Display for ReturnAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReturnAction::Pass => f.write_str("PASS"),
            ReturnAction::Convert(c) => write!(f, "CONVERT({})", c),
        }
    }
}

/// How one required operation is served by one provided operation.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OpMapping {
    pub from: String,
    pub to: String,
    /// One action per provider parameter.
    pub slots: Vec<SlotAction>,
    pub return_action: ReturnAction,
}

impl fmt::Display for OpMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} [", self.from, self.to)?;
        for (i, s) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", s)?;
        }
        write!(f, "] {}", self.return_action)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Provenance {
    pub project: String,
    pub score: Ratio,
    pub tool_version: String,
}

/// A generated bridging component: implements the consumer's required
/// interface by delegating to the provider's provided interface.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdapterSpec {
    pub name: String,
    pub version: Version,
    pub consumer: String,
    pub provider: String,
    /// The consumer's required interface, verbatim.
    pub implements: InterfaceSpec,
    /// The provider's provided interface, verbatim.
    pub delegates_to: InterfaceSpec,
    pub mappings: Vec<OpMapping>,
    pub provenance: Provenance,
}

pub const ADAPTER_VERSION: Version = Version::new(1, 0, 0);

impl AdapterSpec {
    /// The adapter as an ordinary component: it provides what the consumer
    /// requires and requires what the provider provides.
    pub fn to_component_spec(&self) -> ComponentSpec {
        let mut spec = ComponentSpec::new(&self.name, self.version);
        spec.provided.push(self.implements.flipped());
        spec.required.push(self.delegates_to.flipped());
        let meta = [
            ("adapter.consumer", self.consumer.clone()),
            ("adapter.project", self.provenance.project.clone()),
            ("adapter.provider", self.provider.clone()),
            ("adapter.score", self.provenance.score.to_string()),
            ("adapter.tool_version", self.provenance.tool_version.clone()),
        ];
        spec.meta = meta
            .into_iter()
            .map(|(k, v)| MetaEntry {
                key: k.to_string(),
                value: v,
            })
            .collect();
        spec.normalize();
        spec
    }

    pub fn mapping(&self, from: &str) -> Option<&OpMapping> {
        self.mappings.iter().find(|m| m.from == from)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GenError {
    /// The connection is exact or incompatible.
    NotAdaptable(&'static str),
    Inconsistent(String),
}

impl GenError {
    pub fn code(&self) -> &'static str {
        match self {
            GenError::NotAdaptable(_) => "E_NOT_ADAPTABLE",
            GenError::Inconsistent(_) => "E_INCONSISTENT",
        }
    }
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::NotAdaptable(v) => {
                write!(f, "{}: connection verdict is {}", self.code(), v)
            }
            GenError::Inconsistent(m) => write!(f, "{}: {}", self.code(), m),
        }
    }
}

impl core::error::Error for GenError {}

/// Builds a mapping from the mismatch payloads of one operation match.
pub fn mapping_from_match(
    m: &OperationMatch,
    provider_op: &OperationSig,
) -> Result<OpMapping, GenError> {
    let arity = provider_op.params.len();
    let mut fills: Vec<Option<Literal>> = alloc::vec![None; arity];
    let mut converts: Vec<Option<Conversion>> = alloc::vec![None; arity];
    let mut order: Option<Vec<usize>> = None;
    let mut return_action = ReturnAction::Pass;
    for mm in &m.mismatches {
        match mm {
            Mismatch::DefaultFill { slot, value } => {
                *fills.get_mut(*slot).ok_or_else(|| {
                    GenError::Inconsistent(format!("fill slot {} out of range", slot))
                })? = Some(value.clone());
            }
            Mismatch::TypeConversion {
                slot: Slot::Param { provider, .. },
                conversion,
            } => {
                *converts.get_mut(*provider).ok_or_else(|| {
                    GenError::Inconsistent(format!("conversion slot {} out of range", provider))
                })? = Some(conversion.clone());
            }
            Mismatch::TypeConversion {
                slot: Slot::Return,
                conversion,
            } => return_action = ReturnAction::Convert(conversion.clone()),
            Mismatch::ParamPermutation { order: o } => order = Some(o.clone()),
            Mismatch::Rename { .. } | Mismatch::ConceptDistance { .. } => {}
            Mismatch::MissingOperation { .. } => {
                return Err(GenError::Inconsistent(String::from(
                    "matched operation carries MISSING_OPERATION",
                )))
            }
        }
    }
    let taken = fills.iter().filter(|f| f.is_none()).count();
    let order = order.unwrap_or_else(|| (0..taken).collect());
    if order.len() != taken {
        return Err(GenError::Inconsistent(format!(
            "{} slots to take but permutation has {} entries",
            taken,
            order.len()
        )));
    }
    let mut next = order.into_iter();
    let mut slots = Vec::with_capacity(arity);
    for slot in 0..arity {
        let action = match (fills[slot].take(), converts[slot].take()) {
            (Some(lit), None) => SlotAction::Fill(lit),
            (Some(_), Some(_)) => {
                return Err(GenError::Inconsistent(format!(
                    "slot {} is both filled and converted",
                    slot
                )))
            }
            (None, conv) => {
                // lengths were checked above
                let ci = next.next().unwrap_or_default();
                match conv {
                    Some(c) => SlotAction::Convert(ci, c),
                    None => SlotAction::Take(ci),
                }
            }
        };
        slots.push(action);
    }
    Ok(OpMapping {
        from: m.required.clone(),
        to: m.provided.clone(),
        slots,
        return_action,
    })
}

fn fingerprint8(implements: &InterfaceSpec, delegates: &InterfaceSpec, maps: &[OpMapping]) -> String {
    let mut text = String::new();
    text.push_str("implements\n");
    text.push_str(&serialize_interface(implements, ""));
    text.push_str("delegates\n");
    text.push_str(&serialize_interface(delegates, ""));
    text.push_str("mappings\n");
    for m in maps {
        let _ = writeln!(text, "{}", m);
    }
    let digest = Sha256::digest(text.as_bytes());
    let mut out = String::with_capacity(8);
    for b in &digest[..4] {
        let _ = write!(out, "{:02x}", b);
    }
    out
}

/// Generates the adapter for an ADAPTABLE connection.
pub fn generate_adapter(
    report: &ConnectionReport,
    consumer: &ComponentSpec,
    provider: &ComponentSpec,
    project: &str,
) -> Result<AdapterSpec, GenError> {
    let score = match &report.verdict {
        Verdict::Adaptable { score, .. } => *score,
        other => return Err(GenError::NotAdaptable(other.label())),
    };
    let conn = &report.connection;
    let implements = consumer
        .required_interface(&conn.consumer.interface)
        .ok_or_else(|| {
            GenError::Inconsistent(format!(
                "`{}` has no required interface `{}`",
                consumer.name, conn.consumer.interface
            ))
        })?;
    let delegates = provider
        .provided_interface(&conn.provider.interface)
        .ok_or_else(|| {
            GenError::Inconsistent(format!(
                "`{}` has no provided interface `{}`",
                provider.name, conn.provider.interface
            ))
        })?;
    let mut mappings = Vec::with_capacity(report.operations.len());
    for outcome in &report.operations {
        let m = match outcome {
            OperationOutcome::Matched(m) => m,
            OperationOutcome::Missing { required, .. } => {
                return Err(GenError::Inconsistent(format!(
                    "operation `{}` is unmatched",
                    required
                )))
            }
        };
        let target = delegates.operation(&m.provided).ok_or_else(|| {
            GenError::Inconsistent(format!("provider has no operation `{}`", m.provided))
        })?;
        mappings.push(mapping_from_match(m, target)?);
    }
    if mappings.len() != implements.operations.len() {
        return Err(GenError::Inconsistent(String::from(
            "report does not cover every required operation",
        )));
    }
    let fp = fingerprint8(implements, delegates, &mappings);
    Ok(AdapterSpec {
        name: format!("adapt_{}_{}_{}", consumer.name, provider.name, fp),
        version: ADAPTER_VERSION,
        consumer: consumer.name.clone(),
        provider: provider.name.clone(),
        implements: implements.clone(),
        delegates_to: delegates.clone(),
        mappings,
        provenance: Provenance {
            project: project.to_string(),
            score,
            tool_version: crate::TOOL_VERSION.to_string(),
        },
    })
}
