//! Rewrites a project so that adapters and substitute components take part
//! in its connections.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::adapter_gen::AdapterSpec;
use crate::spec_lang::{Connection, Endpoint, Loc, ProjectSpec, UseDecl, Version, VersionConstraint};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Edit {
    /// Route connection `index` through `adapter`.
    InsertAdapter { index: usize, adapter: AdapterSpec },
    /// Point connection `index` at another component's provided interface.
    ReplaceProvider {
        index: usize,
        component: String,
        version: Version,
        interface: String,
    },
    /// Use an extra component, e.g. to satisfy a project-level demand.
    AddComponent { component: String, version: Version },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntegrateError {
    NoConnection(usize),
    InterfaceMismatch(String),
    Conflict(usize),
}

impl IntegrateError {
    pub fn code(&self) -> &'static str {
        match self {
            IntegrateError::NoConnection(_) => "E_NO_CONNECTION",
            IntegrateError::InterfaceMismatch(_) => "E_INTERFACE_MISMATCH",
            IntegrateError::Conflict(_) => "E_CONFLICT",
        }
    }
}

impl fmt::Display for IntegrateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegrateError::NoConnection(i) => {
                write!(f, "{}: project has no connection #{}", self.code(), i)
            }
            IntegrateError::InterfaceMismatch(m) => write!(f, "{}: {}", self.code(), m),
            IntegrateError::Conflict(i) => {
                write!(f, "{}: connection #{} edited twice", self.code(), i)
            }
        }
    }
}

impl core::error::Error for IntegrateError {}

fn pin(project: &mut ProjectSpec, component: &str, version: Version) {
    if project.use_of(component).is_none() {
        project.uses.push(UseDecl {
            component: String::from(component),
            constraint: VersionConstraint::Exact(version),
            loc: Loc::default(),
        });
    }
}

fn check_adapter(conn: &Connection, adapter: &AdapterSpec) -> Result<(), IntegrateError> {
    let ok = conn.consumer.component == adapter.consumer
        && conn.consumer.interface == adapter.implements.name
        && conn.provider.component == adapter.provider
        && conn.provider.interface == adapter.delegates_to.name;
    if ok {
        Ok(())
    } else {
        Err(IntegrateError::InterfaceMismatch(format!(
            "adapter `{}` bridges {}.{} -> {}.{}, connection is {}",
            adapter.name,
            adapter.consumer,
            adapter.implements.name,
            adapter.provider,
            adapter.delegates_to.name,
            conn
        )))
    }
}

/// Applies `edits` to a copy of `project`.
///
/// Connections keep their relative order; an adapted connection becomes two
/// consecutive ones (consumer to adapter, adapter to provider). New `uses`
/// are pinned to the exact version and appended after the existing ones.
pub fn integrate(project: &ProjectSpec, edits: &[Edit]) -> Result<ProjectSpec, IntegrateError> {
    let mut by_index: BTreeMap<usize, &Edit> = BTreeMap::new();
    for e in edits {
        let index = match e {
            Edit::InsertAdapter { index, .. } | Edit::ReplaceProvider { index, .. } => *index,
            Edit::AddComponent { .. } => continue,
        };
        if index >= project.connections.len() {
            return Err(IntegrateError::NoConnection(index));
        }
        if by_index.insert(index, e).is_some() {
            return Err(IntegrateError::Conflict(index));
        }
    }

    let mut out = project.clone();
    out.connections = Vec::with_capacity(project.connections.len() + edits.len());
    for (i, conn) in project.connections.iter().enumerate() {
        match by_index.get(&i) {
            None => out.connections.push(conn.clone()),
            Some(Edit::InsertAdapter { adapter, .. }) => {
                check_adapter(conn, adapter)?;
                out.connections.push(Connection {
                    consumer: conn.consumer.clone(),
                    provider: Endpoint::new(&adapter.name, &adapter.implements.name),
                    loc: conn.loc,
                });
                out.connections.push(Connection::new(
                    Endpoint::new(&adapter.name, &adapter.delegates_to.name),
                    conn.provider.clone(),
                ));
            }
            Some(Edit::ReplaceProvider {
                component,
                interface,
                ..
            }) => out.connections.push(Connection {
                consumer: conn.consumer.clone(),
                provider: Endpoint::new(component, interface),
                loc: conn.loc,
            }),
            Some(Edit::AddComponent { .. }) => unreachable!(),
        }
    }
    for e in edits {
        match e {
            Edit::InsertAdapter { adapter, .. } => pin(&mut out, &adapter.name, adapter.version),
            Edit::ReplaceProvider {
                component, version, ..
            }
            | Edit::AddComponent { component, version } => pin(&mut out, component, *version),
        }
    }
    Ok(out)
}
