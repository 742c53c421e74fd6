//! The adaptation workflow: read, compare, query the pool, generate what
//! is missing, integrate, store, verify.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use adapterforge_core::adapter_gen::{emit_stub, generate_adapter, AdapterSpec};
use adapterforge_core::analyser::{
    analyse, analyse_connection, resolve_endpoint, ConnectionReport, ConversionTable, Demand,
    DemandOrigin, MatchReport, OpShape, Scoring, Verdict,
};
use adapterforge_core::aslt::build_aslt;
use adapterforge_core::integrate::{integrate, Edit};
use adapterforge_core::spec_lang::{
    serialize_component, serialize_project, ComponentSpec, Connection, Direction, Endpoint,
    InterfaceSpec, ProjectSpec,
};
use adapterforge_core::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{canonical_json, emit_descriptor, DESCRIPTOR_EXT};
use crate::pool::{EntryKind, Pool, PoolDoc};
use crate::specs::{load_project, load_spec_dirs, COMPONENT_EXT, PROJECT_EXT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StepKind {
    Read,
    Compare,
    Query,
    Return,
    Invite,
    Generate,
    Integrate,
    Store,
    Verify,
}

impl StepKind {
    /// Position in the numbered workflow; storing and verifying follow it.
    pub fn number(self) -> Option<u8> {
        match self {
            StepKind::Read => Some(1),
            StepKind::Compare => Some(2),
            StepKind::Query => Some(3),
            StepKind::Return => Some(4),
            StepKind::Invite => Some(5),
            StepKind::Generate => Some(6),
            StepKind::Integrate => Some(7),
            StepKind::Store | StepKind::Verify => None,
        }
    }

    /// Coarse phase used to check trace ordering.
    pub fn phase(self) -> u8 {
        match self {
            StepKind::Read => 0,
            StepKind::Compare => 1,
            StepKind::Query | StepKind::Return | StepKind::Invite | StepKind::Generate => 2,
            StepKind::Integrate => 3,
            StepKind::Store => 4,
            StepKind::Verify => 5,
        }
    }
}

/// One trace entry. `tick` is a logical clock, so traces are reproducible.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub tick: u64,
    pub step: StepKind,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IntegrationSource {
    PoolHit { fingerprint: String },
    Generated { fingerprint: String },
}

impl IntegrationSource {
    pub fn fingerprint(&self) -> &str {
        match self {
            IntegrationSource::PoolHit { fingerprint } | IntegrationSource::Generated { fingerprint } => {
                fingerprint
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Integration {
    /// Connection index in the original project; `None` for a project-level
    /// demand.
    pub connection: Option<usize>,
    pub component: String,
    pub kind: EntryKind,
    #[serde(flatten)]
    pub source: IntegrationSource,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AddedComponent {
    Adapter(AdapterSpec),
    Component(ComponentSpec),
}

impl AddedComponent {
    pub fn component(&self) -> ComponentSpec {
        match self {
            AddedComponent::Adapter(a) => a.to_component_spec(),
            AddedComponent::Component(c) => c.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegratedProject {
    pub original: ProjectSpec,
    pub project: ProjectSpec,
    pub added: Vec<AddedComponent>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    AlreadyExact,
    Adapted,
    Unresolvable {
        demands: Vec<Demand>,
        diagnostics: Vec<String>,
    },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::AlreadyExact => "ALREADY_EXACT",
            Outcome::Adapted => "ADAPTED",
            Outcome::Unresolvable { .. } => "UNRESOLVABLE",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkflowResult {
    pub project: String,
    pub outcome: Outcome,
    pub integrations: Vec<Integration>,
    pub initial_report: MatchReport,
    pub final_report: MatchReport,
    pub integrated: Option<IntegratedProject>,
    pub steps: Vec<Step>,
}

struct Trace {
    steps: Vec<Step>,
}

impl Trace {
    fn push(&mut self, step: StepKind, detail: impl Into<String>) {
        let tick = self.steps.len() as u64 + 1;
        self.steps.push(Step {
            tick,
            step,
            detail: detail.into(),
        });
    }
}

/// Demands for every operation of a consumer interface.
fn interface_demands(index: usize, iface: &InterfaceSpec) -> Vec<Demand> {
    iface
        .operations
        .iter()
        .map(|op| Demand {
            concept: op.concept.clone(),
            shape: Some(OpShape::of(op)),
            origin: DemandOrigin::Connection {
                index,
                operation: op.name.clone(),
            },
        })
        .collect()
}

/// Pool entries serving every demand, ranked by mean score.
fn ranked(
    pool: &Pool,
    demands: &[Demand],
    table: &ConversionTable,
    scoring: &Scoring,
) -> Result<Vec<(String, Ratio, EntryKind)>> {
    let mut acc: BTreeMap<String, (Ratio, usize, EntryKind)> = BTreeMap::new();
    for d in demands {
        for hit in pool.query(d, None, table, scoring)? {
            let e = acc.entry(hit.fingerprint).or_insert((Ratio::ZERO, 0, hit.kind));
            e.0 = e.0 + hit.score;
            e.1 += 1;
        }
    }
    let mut out: Vec<_> = acc
        .into_iter()
        .filter(|(_, (_, n, _))| *n == demands.len())
        .map(|(fp, (sum, n, kind))| (fp, sum.div_int(n.max(1) as i64), kind))
        .filter(|(_, s, _)| *s >= scoring.threshold)
        .collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

fn adapter_hit(
    pool: &Pool,
    conn: &Connection,
    consumer: &InterfaceSpec,
    provider: &InterfaceSpec,
    demands: &[Demand],
    table: &ConversionTable,
    scoring: &Scoring,
) -> Result<Option<(String, AdapterSpec)>> {
    for (fp, _, kind) in ranked(pool, demands, table, scoring)? {
        if kind != EntryKind::Adapter {
            continue;
        }
        if let PoolDoc::Adapter(a) = pool.get(&fp)? {
            if a.consumer == conn.consumer.component
                && a.provider == conn.provider.component
                && a.implements == *consumer
                && a.delegates_to == *provider
            {
                return Ok(Some((fp, a)));
            }
        }
    }
    Ok(None)
}

struct ComponentHit {
    fingerprint: String,
    component: ComponentSpec,
    interface: String,
    report: ConnectionReport,
}

fn component_hit(
    pool: &Pool,
    project: &ProjectSpec,
    index: usize,
    conn: &Connection,
    consumer: &InterfaceSpec,
    demands: &[Demand],
    table: &ConversionTable,
    scoring: &Scoring,
) -> Result<Option<ComponentHit>> {
    for (fp, _, kind) in ranked(pool, demands, table, scoring)? {
        if kind != EntryKind::Component {
            continue;
        }
        let PoolDoc::Component(comp) = pool.get(&fp)? else {
            continue;
        };
        // never shadow a component the project already uses
        if project.use_of(&comp.name).is_some() {
            continue;
        }
        let mut best: Option<(String, ConnectionReport)> = None;
        for iface in &comp.provided {
            let rewired = Connection::new(
                conn.consumer.clone(),
                Endpoint::new(&comp.name, &iface.name),
            );
            let (report, _) = analyse_connection(index, &rewired, consumer, iface, table, scoring);
            let rank = |r: &ConnectionReport| match &r.verdict {
                Verdict::Exact => Some(Ratio::new(2, 1)),
                Verdict::Adaptable { score, .. } => Some(*score),
                Verdict::Incompatible { .. } => None,
            };
            if let Some(s) = rank(&report) {
                if best.as_ref().is_none_or(|(_, b)| rank(b).is_none_or(|bs| s > bs)) {
                    best = Some((iface.name.clone(), report));
                }
            }
        }
        if let Some((interface, report)) = best {
            return Ok(Some(ComponentHit {
                fingerprint: fp,
                component: comp,
                interface,
                report,
            }));
        }
    }
    Ok(None)
}

/// Runs the whole workflow on one project file. Writes only to the pool.
pub fn run_workflow(
    project_path: &Path,
    spec_dirs: &[PathBuf],
    pool: &Pool,
    table: &ConversionTable,
    scoring: &Scoring,
) -> Result<WorkflowResult> {
    let mut trace = Trace { steps: Vec::new() };
    let project = load_project(project_path)?;
    let components = load_spec_dirs(spec_dirs)?;
    trace.push(
        StepKind::Read,
        format!("{} with {} component spec(s)", project.name, components.len()),
    );
    let tree = build_aslt(&project, &components)?;
    let report = analyse(&tree, &project, &components, table, scoring)?;
    trace.push(
        StepKind::Compare,
        format!("{} connection(s)", report.connections.len()),
    );

    let mut replace_edits = Vec::new();
    let mut adapter_edits = Vec::new();
    let mut added: Vec<AddedComponent> = Vec::new();
    let mut integrations = Vec::new();
    let mut unresolved: Vec<Demand> = Vec::new();
    let mut fresh: Vec<AdapterSpec> = Vec::new();

    // adapter for an ADAPTABLE pairing: pool first, then generate
    let bridge = |trace: &mut Trace,
                      creport: &ConnectionReport,
                      consumer_spec: &ComponentSpec,
                      provider_spec: &ComponentSpec,
                      consumer: &InterfaceSpec,
                      provider: &InterfaceSpec|
     -> Result<(AdapterSpec, IntegrationSource)> {
        let conn = &creport.connection;
        let demands = interface_demands(creport.index, consumer);
        trace.push(StepKind::Query, format!("connection {}: {}", creport.index, conn));
        if let Some((fp, a)) = adapter_hit(pool, conn, consumer, provider, &demands, table, scoring)? {
            trace.push(StepKind::Return, format!("connection {}: {} {}", creport.index, a.name, fp));
            return Ok((a, IntegrationSource::PoolHit { fingerprint: fp }));
        }
        trace.push(StepKind::Invite, format!("connection {}", creport.index));
        let a = generate_adapter(creport, consumer_spec, provider_spec, &project.name)?;
        let fp = crate::pool::fingerprint(emit_descriptor(&a).as_bytes());
        trace.push(StepKind::Generate, format!("connection {}: {}", creport.index, a.name));
        Ok((a, IntegrationSource::Generated { fingerprint: fp }))
    };

    for creport in &report.connections {
        let i = creport.index;
        let conn = &creport.connection;
        match &creport.verdict {
            Verdict::Exact => {}
            Verdict::Adaptable { .. } => {
                let (ci, consumer) =
                    resolve_endpoint(&tree, &components, &conn.consumer, Direction::Required)?;
                let (pi, provider) =
                    resolve_endpoint(&tree, &components, &conn.provider, Direction::Provided)?;
                let (a, source) = bridge(
                    &mut trace,
                    creport,
                    &components[ci],
                    &components[pi],
                    consumer,
                    provider,
                )?;
                if matches!(source, IntegrationSource::Generated { .. }) {
                    fresh.push(a.clone());
                }
                integrations.push(Integration {
                    connection: Some(i),
                    component: a.name.clone(),
                    kind: EntryKind::Adapter,
                    source,
                });
                adapter_edits.push(Edit::InsertAdapter {
                    index: i,
                    adapter: a.clone(),
                });
                added.push(AddedComponent::Adapter(a));
            }
            Verdict::Incompatible { .. } => {
                let (ci, consumer) =
                    resolve_endpoint(&tree, &components, &conn.consumer, Direction::Required)?;
                let mut demands: Vec<Demand> = report
                    .demands
                    .iter()
                    .filter(|d| matches!(d.origin, DemandOrigin::Connection { index, .. } if index == i))
                    .cloned()
                    .collect();
                if demands.is_empty() {
                    demands = interface_demands(i, consumer);
                }
                let all = interface_demands(i, consumer);
                trace.push(StepKind::Query, format!("connection {}: {}", i, conn));
                let Some(hit) =
                    component_hit(pool, &project, i, conn, consumer, &all, table, scoring)?
                else {
                    unresolved.extend(demands);
                    continue;
                };
                trace.push(
                    StepKind::Return,
                    format!("connection {}: {} {}", i, hit.component.name, hit.fingerprint),
                );
                integrations.push(Integration {
                    connection: Some(i),
                    component: hit.component.name.clone(),
                    kind: EntryKind::Component,
                    source: IntegrationSource::PoolHit {
                        fingerprint: hit.fingerprint.clone(),
                    },
                });
                replace_edits.push(Edit::ReplaceProvider {
                    index: i,
                    component: hit.component.name.clone(),
                    version: hit.component.version,
                    interface: hit.interface.clone(),
                });
                if matches!(hit.report.verdict, Verdict::Adaptable { .. }) {
                    let provider = hit
                        .component
                        .provided_interface(&hit.interface)
                        .expect("interface was found above")
                        .clone();
                    let (a, source) = bridge(
                        &mut trace,
                        &hit.report,
                        &components[ci],
                        &hit.component,
                        consumer,
                        &provider,
                    )?;
                    if matches!(source, IntegrationSource::Generated { .. }) {
                        fresh.push(a.clone());
                    }
                    integrations.push(Integration {
                        connection: Some(i),
                        component: a.name.clone(),
                        kind: EntryKind::Adapter,
                        source,
                    });
                    adapter_edits.push(Edit::InsertAdapter {
                        index: i,
                        adapter: a.clone(),
                    });
                    added.push(AddedComponent::Adapter(a));
                }
                added.push(AddedComponent::Component(hit.component));
            }
        }
    }

    for d in report
        .demands
        .iter()
        .filter(|d| d.origin == DemandOrigin::Project)
    {
        trace.push(StepKind::Query, format!("demand {}", d.concept));
        let mut chosen = None;
        for hit in pool.query(d, None, table, scoring)? {
            if hit.kind != EntryKind::Component || hit.score < scoring.threshold {
                continue;
            }
            if project.use_of(&hit.name).is_some()
                || added.iter().any(|a| a.component().name == hit.name)
            {
                continue;
            }
            if let PoolDoc::Component(c) = pool.get(&hit.fingerprint)? {
                chosen = Some((hit.fingerprint, c));
                break;
            }
        }
        match chosen {
            Some((fp, c)) => {
                trace.push(StepKind::Return, format!("demand {}: {} {}", d.concept, c.name, fp));
                integrations.push(Integration {
                    connection: None,
                    component: c.name.clone(),
                    kind: EntryKind::Component,
                    source: IntegrationSource::PoolHit { fingerprint: fp },
                });
                replace_edits.push(Edit::AddComponent {
                    component: c.name.clone(),
                    version: c.version,
                });
                added.push(AddedComponent::Component(c));
            }
            None => unresolved.push(d.clone()),
        }
    }

    if integrations.is_empty() {
        let outcome = if unresolved.is_empty() {
            Outcome::AlreadyExact
        } else {
            Outcome::Unresolvable {
                demands: unresolved,
                diagnostics: Vec::new(),
            }
        };
        return Ok(WorkflowResult {
            project: project.name.clone(),
            outcome,
            integrations,
            final_report: report.clone(),
            initial_report: report,
            integrated: None,
            steps: trace.steps,
        });
    }

    let first = integrate(&project, &replace_edits)?;
    let rewritten = integrate(&first, &adapter_edits)?;
    trace.push(
        StepKind::Integrate,
        format!("{} integration(s)", integrations.len()),
    );
    for a in &fresh {
        let fp = pool.add(&PoolDoc::Adapter(a.clone()))?;
        trace.push(StepKind::Store, format!("{} {}", a.name, fp));
    }

    let mut all = components.clone();
    all.extend(added.iter().map(AddedComponent::component));
    let tree2 = build_aslt(&rewritten, &all)?;
    let final_report = analyse(&tree2, &rewritten, &all, table, scoring)?;
    trace.push(
        StepKind::Verify,
        if final_report.all_exact() { "all exact" } else { "mismatches remain" },
    );

    let outcome = if !unresolved.is_empty() {
        Outcome::Unresolvable {
            demands: unresolved,
            diagnostics: Vec::new(),
        }
    } else if final_report.all_exact() && final_report.demands.is_empty() {
        Outcome::Adapted
    } else {
        let diagnostics = final_report
            .connections
            .iter()
            .filter(|c| !c.verdict.is_exact())
            .map(|c| format!("connection {} still {}: {}", c.index, c.verdict.label(), c.connection))
            .collect();
        Outcome::Unresolvable {
            demands: final_report.demands.clone(),
            diagnostics,
        }
    };
    Ok(WorkflowResult {
        project: project.name.clone(),
        outcome,
        integrations,
        initial_report: report,
        final_report,
        integrated: Some(IntegratedProject {
            original: project,
            project: rewritten,
            added,
        }),
        steps: trace.steps,
    })
}

/// Files written for one workflow run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outputs {
    pub project: Option<PathBuf>,
    pub components: Vec<PathBuf>,
    pub descriptors: Vec<PathBuf>,
    pub stubs: Vec<PathBuf>,
    pub report: PathBuf,
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf> {
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes the integrated project, added components, adapter descriptors,
/// optional stubs and the structured report into `dir`.
pub fn write_outputs(
    result: &WorkflowResult,
    dir: &Path,
    stem: &str,
    template: Option<&str>,
) -> Result<Outputs> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Outputs::default();
    if let Some(ip) = &result.integrated {
        out.project = Some(write(
            dir.join(format!("{}.adapted.{}", stem, PROJECT_EXT)),
            &serialize_project(&ip.project),
        )?);
        for added in &ip.added {
            let comp = added.component();
            out.components.push(write(
                dir.join(format!("{}.{}", comp.name, COMPONENT_EXT)),
                &serialize_component(&comp),
            )?);
            if let AddedComponent::Adapter(a) = added {
                out.descriptors.push(write(
                    dir.join(format!("{}.{}", a.name, DESCRIPTOR_EXT)),
                    &emit_descriptor(a),
                )?);
                if let Some(t) = template {
                    out.stubs
                        .push(write(dir.join(format!("{}.stub", a.name)), &emit_stub(a, t)?)?);
                }
            }
        }
    }
    out.report = write(
        dir.join(format!("{}.report.json", stem)),
        &canonical_json(result),
    )?;
    Ok(out)
}
