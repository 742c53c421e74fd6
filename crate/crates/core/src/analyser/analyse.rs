use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use super::conversion::ConversionTable;
use super::matching::{match_operation, Mismatch, OperationMatch};
use super::scoring::Scoring;
use crate::aslt::{Aslt, NodeKind, Origin};
use crate::spec_lang::{
    ComponentSpec, ConceptId, Connection, Direction, Endpoint, InterfaceSpec, OperationSig,
    ParamSig, ProjectSpec, SemType,
};
use crate::Ratio;

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShapeParam {
    pub ty: SemType,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub unit: Option<String>,
    pub concept: ConceptId,
}

/// Signature of a demanded operation with parameter names erased.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OpShape {
    pub params: Vec<ShapeParam>,
    pub returns: SemType,
}

impl OpShape {
    pub fn of(op: &OperationSig) -> OpShape {
        OpShape {
            params: op
                .params
                .iter()
                .map(|p| ShapeParam {
                    ty: p.ty.clone(),
                    unit: p.unit.clone(),
                    concept: p.effective_concept(&op.concept),
                })
                .collect(),
            returns: op.returns.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum DemandOrigin {
    Connection { index: usize, operation: String },
    Project,
}

/// Functionality a consumer needs that nothing connected provides.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Demand {
    /// Always the consumer-side concept.
    pub concept: ConceptId,
    pub shape: Option<OpShape>,
    pub origin: DemandOrigin,
}

impl Demand {
    /// The demand as a required operation signature, with synthetic
    /// parameter names and explicit parameter concepts.
    pub fn as_operation(&self) -> OperationSig {
        let name = match &self.origin {
            DemandOrigin::Connection { operation, .. } => operation.clone(),
            DemandOrigin::Project => self
                .concept
                .segments()
                .last()
                .unwrap_or("demand")
                .to_string(),
        };
        let (params, returns) = match &self.shape {
            Some(shape) => (
                shape
                    .params
                    .iter()
                    .enumerate()
                    .map(|(i, p)| ParamSig {
                        name: format!("p{}", i),
                        ty: p.ty.clone(),
                        concept: Some(p.concept.clone()),
                        unit: p.unit.clone(),
                        default: None,
                        loc: Default::default(),
                    })
                    .collect(),
                shape.returns.clone(),
            ),
            None => (Vec::new(), SemType::Unit),
        };
        OperationSig::new(&name, self.concept.clone(), params, returns)
    }
}

impl fmt::Display for Demand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.concept)?;
        match &self.origin {
            DemandOrigin::Connection { index, operation } => {
                write!(f, " (connection {}, operation {})", index, operation)
            }
            DemandOrigin::Project => f.write_str(" (project)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocatedMismatch {
    pub operation: String,
    pub mismatch: Mismatch,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum Verdict {
    Exact,
    Adaptable {
        score: Ratio,
        mismatches: Vec<LocatedMismatch>,
    },
    Incompatible {
        reason: String,
        mismatches: Vec<LocatedMismatch>,
    },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Exact => "EXACT",
            Verdict::Adaptable { .. } => "ADAPTABLE",
            Verdict::Incompatible { .. } => "INCOMPATIBLE",
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Verdict::Exact)
    }

    pub fn mismatches(&self) -> &[LocatedMismatch] {
        match self {
            Verdict::Exact => &[],
            Verdict::Adaptable { mismatches, .. } | Verdict::Incompatible { mismatches, .. } => {
                mismatches
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "outcome", rename_all = "snake_case"))]
pub enum OperationOutcome {
    Matched(OperationMatch),
    Missing {
        required: String,
        concept: ConceptId,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConnectionReport {
    pub index: usize,
    pub connection: Connection,
    pub verdict: Verdict,
    /// One entry per required operation, in declaration order.
    pub operations: Vec<OperationOutcome>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MatchReport {
    pub project: String,
    pub connections: Vec<ConnectionReport>,
    pub demands: Vec<Demand>,
}

impl MatchReport {
    pub fn all_exact(&self) -> bool {
        self.connections.iter().all(|c| c.verdict.is_exact())
    }

    pub fn any_incompatible(&self) -> bool {
        self.connections
            .iter()
            .any(|c| matches!(c.verdict, Verdict::Incompatible { .. }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnalyseError {
    Unresolved(String),
}

impl AnalyseError {
    pub fn code(&self) -> &'static str {
        "E_UNRESOLVED"
    }
}

impl fmt::Display for AnalyseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyseError::Unresolved(m) => write!(f, "E_UNRESOLVED: {}", m),
        }
    }
}

impl core::error::Error for AnalyseError {}

/// Finds the component and interface an endpoint names by walking the tree.
pub fn resolve_endpoint<'c>(
    tree: &Aslt,
    components: &'c [ComponentSpec],
    endpoint: &Endpoint,
    direction: Direction,
) -> Result<(usize, &'c InterfaceSpec), AnalyseError> {
    let cnode = tree.find_component(&endpoint.component).ok_or_else(|| {
        AnalyseError::Unresolved(format!("component `{}` is not used", endpoint.component))
    })?;
    let label = format!("{} {}", direction.keyword(), endpoint.interface);
    let inode = tree
        .find_child(cnode, NodeKind::Interface, &label)
        .ok_or_else(|| {
            AnalyseError::Unresolved(format!(
                "component `{}` has no {} interface `{}`",
                endpoint.component,
                match direction {
                    Direction::Provided => "provided",
                    Direction::Required => "required",
                },
                endpoint.interface
            ))
        })?;
    match tree.node(inode).map(|n| n.origin) {
        Some(Origin::Interface {
            component, index, ..
        }) => {
            let spec = components.get(component).ok_or_else(|| {
                AnalyseError::Unresolved(format!("tree refers to unknown component #{}", component))
            })?;
            let list = match direction {
                Direction::Provided => &spec.provided,
                Direction::Required => &spec.required,
            };
            list.get(index).map(|i| (component, i)).ok_or_else(|| {
                AnalyseError::Unresolved(format!("tree refers to unknown interface #{}", index))
            })
        }
        _ => Err(AnalyseError::Unresolved(format!(
            "node for `{}` carries no interface origin",
            label
        ))),
    }
}

fn better(a: &OperationMatch, b: &OperationMatch) -> bool {
    match a.score.cmp(&b.score) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => match a.mismatches.len().cmp(&b.mismatches.len()) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => a.provided < b.provided,
        },
    }
}

/// Best provider operation for one required operation: highest score, then
/// fewest mismatches, then smallest provider operation name.
pub fn best_match(
    required: &OperationSig,
    provider: &InterfaceSpec,
    table: &ConversionTable,
    scoring: &Scoring,
) -> Option<OperationMatch> {
    let mut best: Option<OperationMatch> = None;
    for candidate in &provider.operations {
        if let Some(m) = match_operation(required, candidate, table, scoring) {
            if best.as_ref().is_none_or(|b| better(&m, b)) {
                best = Some(m);
            }
        }
    }
    best
}

/// Matches one connection's consumer interface against its provider.
pub fn analyse_connection(
    index: usize,
    connection: &Connection,
    consumer: &InterfaceSpec,
    provider: &InterfaceSpec,
    table: &ConversionTable,
    scoring: &Scoring,
) -> (ConnectionReport, Vec<Demand>) {
    let mut operations = Vec::new();
    let mut mismatches = Vec::new();
    let mut demands = Vec::new();
    let mut total = Ratio::ZERO;
    let mut missing = Vec::new();
    for req in &consumer.operations {
        match best_match(req, provider, table, scoring) {
            Some(m) => {
                total = total + m.score;
                mismatches.extend(m.mismatches.iter().map(|x| LocatedMismatch {
                    operation: req.name.clone(),
                    mismatch: x.clone(),
                }));
                operations.push(OperationOutcome::Matched(m));
            }
            None => {
                missing.push(req.name.clone());
                mismatches.push(LocatedMismatch {
                    operation: req.name.clone(),
                    mismatch: Mismatch::MissingOperation {
                        concept: req.concept.clone(),
                    },
                });
                demands.push(Demand {
                    concept: req.concept.clone(),
                    shape: Some(OpShape::of(req)),
                    origin: DemandOrigin::Connection {
                        index,
                        operation: req.name.clone(),
                    },
                });
                operations.push(OperationOutcome::Missing {
                    required: req.name.clone(),
                    concept: req.concept.clone(),
                });
            }
        }
    }
    let verdict = if !missing.is_empty() {
        Verdict::Incompatible {
            reason: format!("no provided operation for: {}", missing.join(", ")),
            mismatches,
        }
    } else if mismatches.is_empty() {
        Verdict::Exact
    } else {
        let score = total.div_int(consumer.operations.len() as i64);
        if score >= scoring.threshold {
            Verdict::Adaptable { score, mismatches }
        } else {
            Verdict::Incompatible {
                reason: format!("aggregate score {} below threshold", score.to_decimal(3)),
                mismatches,
            }
        }
    };
    (
        ConnectionReport {
            index,
            connection: connection.clone(),
            verdict,
            operations,
        },
        demands,
    )
}

/// Compares every connection of `project` and collects unmet demand.
///
/// `tree` must have been built from the same project and component list.
pub fn analyse(
    tree: &Aslt,
    project: &ProjectSpec,
    components: &[ComponentSpec],
    table: &ConversionTable,
    scoring: &Scoring,
) -> Result<MatchReport, AnalyseError> {
    let mut connections = Vec::with_capacity(project.connections.len());
    let mut demands = Vec::new();
    for (index, conn) in project.connections.iter().enumerate() {
        let (_, consumer) = resolve_endpoint(tree, components, &conn.consumer, Direction::Required)?;
        let (_, provider) = resolve_endpoint(tree, components, &conn.provider, Direction::Provided)?;
        let (report, d) = analyse_connection(index, conn, consumer, provider, table, scoring);
        connections.push(report);
        demands.extend(d);
    }

    let used: Vec<usize> = tree
        .node(tree.root())
        .map(|root| {
            let ids: Vec<_> = if root.kind == NodeKind::Component {
                alloc::vec![root.id]
            } else {
                root.children.clone()
            };
            ids.into_iter()
                .filter_map(|id| match tree.node(id).map(|n| n.origin) {
                    Some(Origin::Component(ci)) => Some(ci),
                    _ => None,
                })
                .collect()
        })
        .unwrap_or_default();
    for concept in &project.demands {
        let satisfied = used.iter().any(|&ci| {
            components[ci]
                .provided
                .iter()
                .flat_map(|i| i.operations.iter())
                .any(|op| op.concept.hops_to(concept).is_some())
        });
        if !satisfied {
            demands.push(Demand {
                concept: concept.clone(),
                shape: None,
                origin: DemandOrigin::Project,
            });
        }
    }

    Ok(MatchReport {
        project: project.name.clone(),
        connections,
        demands,
    })
}

/// Re-runs [`analyse`]; true iff every connection is exact.
pub fn verify(
    tree: &Aslt,
    project: &ProjectSpec,
    components: &[ComponentSpec],
    table: &ConversionTable,
    scoring: &Scoring,
) -> Result<bool, AnalyseError> {
    Ok(analyse(tree, project, components, table, scoring)?.all_exact())
}
