//! Abstract Syntax Language Tree: a hierarchical element model over specs.
//!
//! Nodes are stored in a dense table indexed by [`NodeId`]. Structural
//! children follow the project → component → interface → operation →
//! parameter hierarchy; annotations (concepts, units, defaults, component
//! meta entries) hang off any structural node as `meta` nodes. `build`
//! assigns ids in preorder, visiting a node's meta children before its
//! structural children, which is also the traversal order.
//!
//! Trees are values. [`Aslt::attach_meta`] returns a new tree and
//! [`FoldView`] overlays never touch the tree they hide parts of.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::spec_lang::{
    ComponentSpec, Direction, Loc, ProjectSpec, SourceName, UseDecl, VersionConstraint,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Project,
    Component,
    Interface,
    Operation,
    Parameter,
    Meta,
}

impl NodeKind {
    pub const ALL: [NodeKind; 6] = [
        NodeKind::Project,
        NodeKind::Component,
        NodeKind::Interface,
        NodeKind::Operation,
        NodeKind::Parameter,
        NodeKind::Meta,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Project => "project",
            NodeKind::Component => "component",
            NodeKind::Interface => "interface",
            NodeKind::Operation => "operation",
            NodeKind::Parameter => "parameter",
            NodeKind::Meta => "meta",
        }
    }

    pub fn parse(s: &str) -> Option<NodeKind> {
        NodeKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// The only structural kind allowed directly below `self`.
    fn child_kind(self) -> Option<NodeKind> {
        match self {
            NodeKind::Project => Some(NodeKind::Component),
            NodeKind::Component => Some(NodeKind::Interface),
            NodeKind::Interface => Some(NodeKind::Operation),
            NodeKind::Operation => Some(NodeKind::Parameter),
            NodeKind::Parameter | NodeKind::Meta => None,
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a structural node came from in the input spec list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    None,
    /// Index into the component list passed to [`build_aslt`].
    Component(usize),
    Interface {
        component: usize,
        direction: Direction,
        index: usize,
    },
    Operation {
        component: usize,
        direction: Direction,
        interface: usize,
        index: usize,
    },
    Parameter {
        component: usize,
        direction: Direction,
        interface: usize,
        operation: usize,
        index: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AsltNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub label: String,
    pub children: Vec<NodeId>,
    pub meta_children: Vec<NodeId>,
    /// Key and value, for meta nodes only.
    pub meta: Option<(String, String)>,
    pub origin: Origin,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourcePos {
    pub file: Option<String>,
    pub line: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AsltError {
    Unresolved {
        component: String,
        constraint: VersionConstraint,
    },
    NoNode(NodeId),
    MetaOnMeta(NodeId),
}

impl AsltError {
    pub fn code(&self) -> &'static str {
        match self {
            AsltError::Unresolved { .. } => "E_UNRESOLVED",
            AsltError::NoNode(_) => "E_NO_NODE",
            AsltError::MetaOnMeta(_) => "E_META_ON_META",
        }
    }
}

impl fmt::Display for AsltError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AsltError::Unresolved {
                component,
                constraint,
            } => write!(
                f,
                "{}: no specification for component `{}` matching version `{}`",
                self.code(),
                component,
                constraint
            ),
            AsltError::NoNode(id) => write!(f, "{}: node {} does not exist", self.code(), id),
            AsltError::MetaOnMeta(id) => write!(
                f,
                "{}: node {} is a meta node and cannot carry meta information",
                self.code(),
                id
            ),
        }
    }
}

impl core::error::Error for AsltError {}

/// Picks the highest-versioned spec named by `decl` that satisfies its
/// constraint.
pub fn resolve_component(components: &[ComponentSpec], decl: &UseDecl) -> Option<usize> {
    components
        .iter()
        .enumerate()
        .filter(|(_, c)| c.name == decl.component && decl.constraint.matches(&c.version))
        .max_by(|(ia, a), (ib, b)| a.version.cmp(&b.version).then(ib.cmp(ia)))
        .map(|(i, _)| i)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Aslt {
    root: NodeId,
    nodes: Vec<AsltNode>,
    parents: Vec<Option<NodeId>>,
    source_map: BTreeMap<NodeId, SourcePos>,
}

struct Builder {
    nodes: Vec<AsltNode>,
    parents: Vec<Option<NodeId>>,
    source_map: BTreeMap<NodeId, SourcePos>,
}

impl Builder {
    fn node(
        &mut self,
        parent: Option<NodeId>,
        kind: NodeKind,
        label: String,
        origin: Origin,
    ) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(AsltNode {
            id,
            kind,
            label,
            children: Vec::new(),
            meta_children: Vec::new(),
            meta: None,
            origin,
        });
        self.parents.push(parent);
        if let Some(p) = parent {
            self.nodes[p.index()].children.push(id);
        }
        id
    }

    fn meta(&mut self, parent: NodeId, key: &str, value: String) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(AsltNode {
            id,
            kind: NodeKind::Meta,
            label: format!("{}={}", key, value),
            children: Vec::new(),
            meta_children: Vec::new(),
            meta: Some((key.to_string(), value)),
            origin: Origin::None,
        });
        self.parents.push(Some(parent));
        self.nodes[parent.index()].meta_children.push(id);
        id
    }

    fn locate(&mut self, id: NodeId, source: &SourceName, loc: Loc) {
        if loc.line > 0 {
            self.source_map.insert(
                id,
                SourcePos {
                    file: source.0.clone(),
                    line: loc.line,
                },
            );
        }
    }

    fn component(&mut self, parent: Option<NodeId>, spec: &ComponentSpec, ci: usize) -> NodeId {
        let cid = self.node(
            parent,
            NodeKind::Component,
            format!("{}@{}", spec.name, spec.version),
            Origin::Component(ci),
        );
        self.locate(cid, &spec.source, spec.loc);
        let mut meta: Vec<_> = spec.meta.iter().collect();
        meta.sort_by(|a, b| a.key.cmp(&b.key));
        for m in meta {
            self.meta(cid, &m.key, m.value.clone());
        }
        for (direction, list) in [
            (Direction::Provided, &spec.provided),
            (Direction::Required, &spec.required),
        ] {
            let mut order: Vec<usize> = (0..list.len()).collect();
            order.sort_by(|&a, &b| list[a].name.cmp(&list[b].name));
            for ii in order {
                let iface = &list[ii];
                let iid = self.node(
                    Some(cid),
                    NodeKind::Interface,
                    format!("{} {}", direction.keyword(), iface.name),
                    Origin::Interface {
                        component: ci,
                        direction,
                        index: ii,
                    },
                );
                self.locate(iid, &spec.source, iface.loc);
                for (oi, op) in iface.operations.iter().enumerate() {
                    let oid = self.node(
                        Some(iid),
                        NodeKind::Operation,
                        op.name.clone(),
                        Origin::Operation {
                            component: ci,
                            direction,
                            interface: ii,
                            index: oi,
                        },
                    );
                    self.locate(oid, &spec.source, op.loc);
                    self.meta(oid, "concept", op.concept.to_string());
                    self.meta(oid, "returns", op.returns.to_string());
                    for (pi, p) in op.params.iter().enumerate() {
                        let pid = self.node(
                            Some(oid),
                            NodeKind::Parameter,
                            format!("{}: {}", p.name, p.ty),
                            Origin::Parameter {
                                component: ci,
                                direction,
                                interface: ii,
                                operation: oi,
                                index: pi,
                            },
                        );
                        self.locate(pid, &spec.source, p.loc);
                        self.meta(pid, "concept", p.effective_concept(&op.concept).to_string());
                        if let Some(u) = &p.unit {
                            self.meta(pid, "unit", u.clone());
                        }
                        if let Some(d) = &p.default {
                            self.meta(pid, "default", d.to_string());
                        }
                    }
                }
            }
        }
        cid
    }

    fn finish(self, root: NodeId) -> Aslt {
        Aslt {
            root,
            nodes: self.nodes,
            parents: self.parents,
            source_map: self.source_map,
        }
    }
}

/// Builds the tree for a project: one component child per `uses` entry,
/// in `uses` order.
pub fn build_aslt(project: &ProjectSpec, components: &[ComponentSpec]) -> Result<Aslt, AsltError> {
    let mut b = Builder {
        nodes: Vec::new(),
        parents: Vec::new(),
        source_map: BTreeMap::new(),
    };
    let root = b.node(None, NodeKind::Project, project.name.clone(), Origin::None);
    b.locate(root, &project.source, project.loc);
    for decl in &project.uses {
        let ci = resolve_component(components, decl).ok_or_else(|| AsltError::Unresolved {
            component: decl.component.clone(),
            constraint: decl.constraint,
        })?;
        b.component(Some(root), &components[ci], ci);
    }
    Ok(b.finish(root))
}

/// Tree rooted at a single component.
pub fn build_component_aslt(component: &ComponentSpec) -> Aslt {
    let mut b = Builder {
        nodes: Vec::new(),
        parents: Vec::new(),
        source_map: BTreeMap::new(),
    };
    let root = b.component(None, component, 0);
    b.finish(root)
}

impl Aslt {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Option<&AsltNode> {
        self.nodes.get(id.index())
    }

    pub fn nodes(&self) -> &[AsltNode] {
        &self.nodes
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.parents.get(id.index()).copied().flatten()
    }

    pub fn source(&self, id: NodeId) -> Option<&SourcePos> {
        self.source_map.get(&id)
    }

    /// Structural child of `parent` with the given kind and label.
    pub fn find_child(&self, parent: NodeId, kind: NodeKind, label: &str) -> Option<NodeId> {
        self.node(parent)?
            .children
            .iter()
            .copied()
            .find(|&c| self.nodes[c.index()].kind == kind && self.nodes[c.index()].label == label)
    }

    /// Component node whose label starts with `<name>@`.
    pub fn find_component(&self, name: &str) -> Option<NodeId> {
        let root = &self.nodes[self.root.index()];
        if root.kind == NodeKind::Component {
            return (component_name(&root.label) == name).then_some(self.root);
        }
        root.children
            .iter()
            .copied()
            .find(|&c| component_name(&self.nodes[c.index()].label) == name)
    }

    /// Returns a new tree with one meta node appended under `target`.
    pub fn attach_meta(&self, target: NodeId, key: &str, value: &str) -> Result<Aslt, AsltError> {
        let node = self.node(target).ok_or(AsltError::NoNode(target))?;
        if node.kind == NodeKind::Meta {
            return Err(AsltError::MetaOnMeta(target));
        }
        let mut b = Builder {
            nodes: self.nodes.clone(),
            parents: self.parents.clone(),
            source_map: self.source_map.clone(),
        };
        b.meta(target, key, value.to_string());
        Ok(b.finish(self.root))
    }

    pub fn subtree_size(&self, id: NodeId) -> usize {
        let mut count = 0;
        let mut stack = alloc::vec![id];
        while let Some(n) = stack.pop() {
            count += 1;
            let node = &self.nodes[n.index()];
            stack.extend(node.meta_children.iter().copied());
            stack.extend(node.children.iter().copied());
        }
        count
    }

    /// Preorder `(id, depth)` pairs; meta children before structural ones.
    pub fn traverse(&self) -> Vec<(NodeId, usize)> {
        self.walk(&BTreeSet::new())
    }

    fn walk(&self, hidden: &BTreeSet<NodeId>) -> Vec<(NodeId, usize)> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![(self.root, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            if hidden.contains(&id) {
                continue;
            }
            out.push((id, depth));
            let node = &self.nodes[id.index()];
            for &c in node.children.iter().rev() {
                stack.push((c, depth + 1));
            }
            for &m in node.meta_children.iter().rev() {
                stack.push((m, depth + 1));
            }
        }
        out
    }

    fn render(&self, order: &[(NodeId, usize)]) -> String {
        let mut out = String::new();
        for &(id, depth) in order {
            let node = &self.nodes[id.index()];
            for _ in 0..depth {
                out.push_str("  ");
            }
            out.push_str(node.kind.as_str());
            out.push(' ');
            out.push_str(&node.label);
            out.push('\n');
        }
        out
    }

    /// Line-oriented dump: `<indent><kind> <label>`, two spaces per level.
    pub fn dump(&self) -> String {
        self.render(&self.traverse())
    }

    /// Full structural check: single parent per node, no cycles, childless
    /// meta nodes, and the kind hierarchy.
    pub fn check_integrity(&self) -> Result<(), String> {
        let n = self.nodes.len();
        let mut refs = alloc::vec![0usize; n];
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id.index() != i {
                return Err(format!("node at slot {} has id {}", i, node.id));
            }
            if node.kind == NodeKind::Meta
                && (!node.children.is_empty() || !node.meta_children.is_empty())
            {
                return Err(format!("meta node {} has children", node.id));
            }
            for &c in &node.children {
                let child = self.node(c).ok_or_else(|| format!("dangling child {}", c))?;
                if Some(child.kind) != node.kind.child_kind() {
                    return Err(format!(
                        "{} node {} under {} node {}",
                        child.kind, c, node.kind, node.id
                    ));
                }
                refs[c.index()] += 1;
                if self.parent(c) != Some(node.id) {
                    return Err(format!("parent link of {} is inconsistent", c));
                }
            }
            for &m in &node.meta_children {
                let child = self.node(m).ok_or_else(|| format!("dangling meta {}", m))?;
                if child.kind != NodeKind::Meta {
                    return Err(format!("meta list of {} holds {} node", node.id, child.kind));
                }
                refs[m.index()] += 1;
                if self.parent(m) != Some(node.id) {
                    return Err(format!("parent link of {} is inconsistent", m));
                }
            }
        }
        let root_kind = self.nodes[self.root.index()].kind;
        if !matches!(root_kind, NodeKind::Project | NodeKind::Component) {
            return Err(format!("root has kind {}", root_kind));
        }
        for (i, &r) in refs.iter().enumerate() {
            let expected = usize::from(i != self.root.index());
            if r != expected {
                return Err(format!("node #{} referenced {} times", i, r));
            }
        }
        // with one parent per node, reachability of all nodes rules out cycles
        if self.traverse().len() != n {
            return Err(String::from("tree contains unreachable nodes or a cycle"));
        }
        Ok(())
    }
}

fn component_name(label: &str) -> &str {
    label.split('@').next().unwrap_or(label)
}

/// Selects nodes by kind and/or label. Labels support `*` wildcards.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FoldPattern {
    pub kind: Option<NodeKind>,
    pub label: Option<String>,
}

impl FoldPattern {
    pub fn kind(kind: NodeKind) -> FoldPattern {
        FoldPattern {
            kind: Some(kind),
            label: None,
        }
    }

    /// Matches no node at all.
    pub fn nothing() -> FoldPattern {
        FoldPattern {
            kind: None,
            label: Some(String::from("\u{0}")),
        }
    }

    /// `kind`, `kind:label-glob` or `:label-glob`.
    pub fn parse(s: &str) -> Option<FoldPattern> {
        let (kind, label) = match s.split_once(':') {
            Some((k, l)) => (k, Some(l)),
            None => (s, None),
        };
        let kind = if kind.is_empty() {
            None
        } else {
            Some(NodeKind::parse(kind)?)
        };
        Some(FoldPattern {
            kind,
            label: label.map(ToString::to_string),
        })
    }

    pub fn matches(&self, node: &AsltNode) -> bool {
        self.kind.is_none_or(|k| k == node.kind)
            && self.label.as_deref().is_none_or(|l| glob_match(l, &node.label))
    }
}

fn glob_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let t: Vec<char> = text.chars().collect();
    let (mut pi, mut ti) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while ti < t.len() {
        if pi < p.len() && p[pi] == '*' {
            star = Some((pi, ti));
            pi += 1;
        } else if pi < p.len() && p[pi] == t[ti] {
            pi += 1;
            ti += 1;
        } else if let Some((sp, st)) = star {
            pi = sp + 1;
            ti = st + 1;
            star = Some((sp, st + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '*')
}

/// A non-destructive view of a tree with some subtrees folded away.
#[derive(Clone, Debug)]
pub struct FoldView<'a> {
    base: &'a Aslt,
    hidden: BTreeSet<NodeId>,
}

/// Hides every node matching `pattern` together with its descendants.
pub fn fold<'a>(tree: &'a Aslt, pattern: &FoldPattern) -> FoldView<'a> {
    let hidden = tree
        .nodes
        .iter()
        .filter(|n| pattern.matches(n))
        .map(|n| n.id)
        .collect();
    FoldView { base: tree, hidden }
}

impl<'a> FoldView<'a> {
    pub fn base(&self) -> &'a Aslt {
        self.base
    }

    /// Every node the pattern matched, including ones nested under another
    /// match.
    pub fn hidden(&self) -> &BTreeSet<NodeId> {
        &self.hidden
    }

    /// Hidden nodes with no hidden ancestor.
    pub fn hidden_roots(&self) -> Vec<NodeId> {
        self.hidden
            .iter()
            .copied()
            .filter(|&id| {
                let mut cur = self.base.parent(id);
                while let Some(p) = cur {
                    if self.hidden.contains(&p) {
                        return false;
                    }
                    cur = self.base.parent(p);
                }
                true
            })
            .collect()
    }

    pub fn traverse(&self) -> Vec<(NodeId, usize)> {
        self.base.walk(&self.hidden)
    }

    pub fn visible_count(&self) -> usize {
        self.traverse().len()
    }

    pub fn dump(&self) -> String {
        self.base.render(&self.traverse())
    }
}
