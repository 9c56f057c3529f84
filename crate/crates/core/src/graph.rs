//! OmniGraph domain types: typed nodes and edges for one sentence, instance
//! forests, and the weight configuration shared by both graph kernels.
//!
//! Graphs are immutable once built. Use [`GraphBuilder`] to assemble one with
//! edge-kind checking, or deserialize and run [`OmniGraph::validate`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Label carried by every designated-entity node.
pub const DESIGNATED_ENTITY_LABEL: &str = "Designated_Entity";
/// Label carried by every other-entity node.
pub const OTHER_ENTITY_LABEL: &str = "Other_Entity";

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    FrameName,
    FrameTarget,
    FrameElement,
    DesignatedEntity,
    OtherEntity,
    LexicalItem,
}

impl NodeKind {
    pub const ALL: [NodeKind; 6] = [
        NodeKind::FrameName,
        NodeKind::FrameTarget,
        NodeKind::FrameElement,
        NodeKind::DesignatedEntity,
        NodeKind::OtherEntity,
        NodeKind::LexicalItem,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::FrameName => "FrameName",
            NodeKind::FrameTarget => "FrameTarget",
            NodeKind::FrameElement => "FrameElement",
            NodeKind::DesignatedEntity => "DesignatedEntity",
            NodeKind::OtherEntity => "OtherEntity",
            NodeKind::LexicalItem => "LexicalItem",
        }
    }

    /// Short feature-type code (FN, FT, FE, DE, OE, LI).
    pub fn abbrev(self) -> &'static str {
        match self {
            NodeKind::FrameName => "FN",
            NodeKind::FrameTarget => "FT",
            NodeKind::FrameElement => "FE",
            NodeKind::DesignatedEntity => "DE",
            NodeKind::OtherEntity => "OE",
            NodeKind::LexicalItem => "LI",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeKind {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NodeKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s || k.abbrev() == s)
            .ok_or_else(|| GraphError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeKind {
    /// FrameTarget -> FrameName
    TargetEvokes,
    /// FrameElement -> FrameName
    ElementOf,
    /// DesignatedEntity | OtherEntity -> FrameElement
    FillsRole,
    /// FrameName -> FrameName, dependent frame points at its head frame
    FrameDependency,
    /// LexicalItem -> FrameElement
    LexicalFill,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 5] = [
        EdgeKind::TargetEvokes,
        EdgeKind::ElementOf,
        EdgeKind::FillsRole,
        EdgeKind::FrameDependency,
        EdgeKind::LexicalFill,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::TargetEvokes => "TargetEvokes",
            EdgeKind::ElementOf => "ElementOf",
            EdgeKind::FillsRole => "FillsRole",
            EdgeKind::FrameDependency => "FrameDependency",
            EdgeKind::LexicalFill => "LexicalFill",
        }
    }

    pub fn source_kinds(self) -> &'static [NodeKind] {
        match self {
            EdgeKind::TargetEvokes => &[NodeKind::FrameTarget],
            EdgeKind::ElementOf => &[NodeKind::FrameElement],
            EdgeKind::FillsRole => &[NodeKind::DesignatedEntity, NodeKind::OtherEntity],
            EdgeKind::FrameDependency => &[NodeKind::FrameName],
            EdgeKind::LexicalFill => &[NodeKind::LexicalItem],
        }
    }

    pub fn target_kind(self) -> NodeKind {
        match self {
            EdgeKind::TargetEvokes | EdgeKind::ElementOf | EdgeKind::FrameDependency => {
                NodeKind::FrameName
            }
            EdgeKind::FillsRole | EdgeKind::LexicalFill => NodeKind::FrameElement,
        }
    }

    pub fn allows(self, from: NodeKind, to: NodeKind) -> bool {
        self.source_kinds().contains(&from) && self.target_kind() == to
    }

    /// The edge kind connecting `from` to `to`, if any.
    pub fn for_endpoints(from: NodeKind, to: NodeKind) -> Option<EdgeKind> {
        EdgeKind::ALL.iter().copied().find(|k| k.allows(from, to))
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EdgeKind {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s_norm = if s == "FDEP" { "FrameDependency" } else { s };
        EdgeKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s_norm)
            .ok_or_else(|| GraphError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub kind: EdgeKind,
}

impl Edge {
    /// Checked constructor: the endpoint kinds must match `kind` and the edge
    /// may not be a self-loop.
    pub fn between(from: &Node, to: &Node, kind: EdgeKind) -> Result<Edge, GraphError> {
        if from.id == to.id {
            return Err(GraphError::SelfLoop(from.id));
        }
        if !kind.allows(from.kind, to.kind) {
            return Err(GraphError::KindMismatch {
                kind,
                from: from.kind,
                to: to.kind,
            });
        }
        Ok(Edge {
            from: from.id,
            to: to.id,
            kind,
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("unknown kind name `{0}`")]
    UnknownKind(String),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("{kind} cannot connect {from} to {to}")]
    KindMismatch {
        kind: EdgeKind,
        from: NodeKind,
        to: NodeKind,
    },
    #[error("no edge kind connects {from} to {to}")]
    NoEdgeKind { from: NodeKind, to: NodeKind },
    #[error("node {0} does not exist")]
    MissingNode(NodeId),
    #[error("graph `{sentence_id}` is invalid: {report}")]
    Invalid {
        sentence_id: String,
        report: ValidationReport,
    },
    #[error("instance forest is empty")]
    EmptyForest,
    #[error("invalid label value {0}, expected -1 or 1")]
    BadLabel(i64),
}

/// One violated invariant. Edge references use the edge's position in
/// [`OmniGraph::edges`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    DuplicateNodeId { node: NodeId },
    EmptyLabel { node: NodeId },
    DesignatedLabel { node: NodeId, label: String },
    DanglingEdge { edge: usize, node: NodeId },
    SelfLoop { edge: usize, node: NodeId },
    KindMismatch {
        edge: usize,
        kind: EdgeKind,
        from: NodeKind,
        to: NodeKind,
    },
    DuplicateEdge { edge: usize, first: usize },
    OutDegree {
        node: NodeId,
        kind: NodeKind,
        expected: EdgeKind,
        count: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateNodeId { node } => write!(f, "node id {node} used twice"),
            Violation::EmptyLabel { node } => write!(f, "node {node} has an empty label"),
            Violation::DesignatedLabel { node, label } => write!(
                f,
                "designated entity node {node} labeled `{label}` instead of `{DESIGNATED_ENTITY_LABEL}`"
            ),
            Violation::DanglingEdge { edge, node } => {
                write!(f, "edge #{edge} references missing node {node}")
            }
            Violation::SelfLoop { edge, node } => write!(f, "edge #{edge} is a self-loop on {node}"),
            Violation::KindMismatch {
                edge,
                kind,
                from,
                to,
            } => write!(f, "edge #{edge}: {kind} cannot connect {from} to {to}"),
            Violation::DuplicateEdge { edge, first } => {
                write!(f, "edge #{edge} duplicates edge #{first}")
            }
            Violation::OutDegree {
                node,
                kind,
                expected,
                count,
            } => write!(
                f,
                "{kind} node {node} has {count} {expected} out-edges, expected exactly 1"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("no violations");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Directed labeled graph for one sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmniGraph {
    sentence_id: String,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    /// Surface tokens of the sentence, kept for n-gram baselines.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tokens: Vec<String>,
}

impl OmniGraph {
    /// Assemble a graph without checking invariants. Call [`validate`](Self::validate)
    /// before trusting the result.
    pub fn from_parts(
        sentence_id: impl Into<String>,
        nodes: Vec<Node>,
        edges: Vec<Edge>,
        tokens: Vec<String>,
    ) -> Self {
        OmniGraph {
            sentence_id: sentence_id.into(),
            nodes,
            edges,
            tokens,
        }
    }

    pub fn empty(sentence_id: impl Into<String>) -> Self {
        Self::from_parts(sentence_id, Vec::new(), Vec::new(), Vec::new())
    }

    pub fn sentence_id(&self) -> &str {
        &self.sentence_id
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn nodes_of_kind(&self, kind: NodeKind) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(move |n| n.kind == kind)
    }

    pub fn out_edges(&self, id: NodeId) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == id)
    }

    /// Map from node id to position in [`nodes`](Self::nodes). Duplicate ids
    /// keep their first position.
    pub fn position_map(&self) -> HashMap<NodeId, usize> {
        let mut map = HashMap::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.iter().enumerate() {
            map.entry(n.id).or_insert(i);
        }
        map
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut by_id: HashMap<NodeId, &Node> = HashMap::with_capacity(self.nodes.len());
        for n in &self.nodes {
            if by_id.insert(n.id, n).is_some() {
                violations.push(Violation::DuplicateNodeId { node: n.id });
            }
            if n.label.is_empty() {
                violations.push(Violation::EmptyLabel { node: n.id });
            }
            if n.kind == NodeKind::DesignatedEntity && n.label != DESIGNATED_ENTITY_LABEL {
                violations.push(Violation::DesignatedLabel {
                    node: n.id,
                    label: n.label.clone(),
                });
            }
        }

        let mut seen: HashMap<Edge, usize> = HashMap::with_capacity(self.edges.len());
        let mut out_counts: HashMap<(NodeId, EdgeKind), usize> = HashMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            if let Some(&first) = seen.get(e) {
                violations.push(Violation::DuplicateEdge { edge: i, first });
                continue;
            }
            seen.insert(*e, i);
            if e.from == e.to {
                violations.push(Violation::SelfLoop {
                    edge: i,
                    node: e.from,
                });
            }
            let (from, to) = match (by_id.get(&e.from), by_id.get(&e.to)) {
                (Some(a), Some(b)) => (a, b),
                (a, _) => {
                    let node = if a.is_none() { e.from } else { e.to };
                    violations.push(Violation::DanglingEdge { edge: i, node });
                    continue;
                }
            };
            if !e.kind.allows(from.kind, to.kind) {
                violations.push(Violation::KindMismatch {
                    edge: i,
                    kind: e.kind,
                    from: from.kind,
                    to: to.kind,
                });
            }
            *out_counts.entry((e.from, e.kind)).or_default() += 1;
        }

        for n in &self.nodes {
            let expected = match n.kind {
                NodeKind::FrameTarget => EdgeKind::TargetEvokes,
                NodeKind::FrameElement => EdgeKind::ElementOf,
                _ => continue,
            };
            let count = out_counts.get(&(n.id, expected)).copied().unwrap_or(0);
            if count != 1 {
                violations.push(Violation::OutDegree {
                    node: n.id,
                    kind: n.kind,
                    expected,
                    count,
                });
            }
        }
        ValidationReport { violations }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_valid()
    }

    /// Number of nodes per (kind, label) pair.
    pub fn label_histogram(&self) -> BTreeMap<(NodeKind, &str), usize> {
        let mut hist = BTreeMap::new();
        for n in &self.nodes {
            *hist.entry((n.kind, n.label.as_str())).or_default() += 1;
        }
        hist
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Disjoint union with node ids re-based to 0..N in input order. No
/// invariants are checked.
pub(crate) fn rebased_union<'a>(graphs: impl IntoIterator<Item = &'a OmniGraph>) -> OmniGraph {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut ids = Vec::new();
    for g in graphs {
        let base = nodes.len() as NodeId;
        let pos = g.position_map();
        for (i, n) in g.nodes.iter().enumerate() {
            nodes.push(Node {
                id: base + i as NodeId,
                kind: n.kind,
                label: n.label.clone(),
            });
        }
        for e in &g.edges {
            let (Some(&a), Some(&b)) = (pos.get(&e.from), pos.get(&e.to)) else {
                continue;
            };
            edges.push(Edge {
                from: base + a as NodeId,
                to: base + b as NodeId,
                kind: e.kind,
            });
        }
        ids.push(g.sentence_id.as_str());
    }
    OmniGraph::from_parts(ids.join("+"), nodes, edges, Vec::new())
}

/// Disjoint union of sentence graphs. Node ids are re-based in input order
/// and no edges are added across inputs.
pub fn disjoint_union<'a>(
    graphs: impl IntoIterator<Item = &'a OmniGraph>,
) -> Result<OmniGraph, GraphError> {
    let graphs: Vec<&OmniGraph> = graphs.into_iter().collect();
    for g in &graphs {
        let report = g.validate();
        if !report.is_valid() {
            return Err(GraphError::Invalid {
                sentence_id: g.sentence_id.clone(),
                report,
            });
        }
    }
    Ok(rebased_union(graphs))
}

/// Incremental construction with kind-checked edges.
#[derive(Debug)]
pub struct GraphBuilder {
    sentence_id: String,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    edge_set: HashSet<Edge>,
    tokens: Vec<String>,
}

impl GraphBuilder {
    pub fn new(sentence_id: impl Into<String>) -> Self {
        GraphBuilder {
            sentence_id: sentence_id.into(),
            nodes: Vec::new(),
            edges: Vec::new(),
            edge_set: HashSet::new(),
            tokens: Vec::new(),
        }
    }

    pub fn tokens(mut self, tokens: Vec<String>) -> Self {
        self.tokens = tokens;
        self
    }

    /// Adds a node and returns its id. Designated-entity nodes always get the
    /// sentinel label regardless of `label`.
    pub fn add_node(&mut self, kind: NodeKind, label: impl Into<String>) -> NodeId {
        let id = self.nodes.len() as NodeId;
        let label = match kind {
            NodeKind::DesignatedEntity => DESIGNATED_ENTITY_LABEL.to_string(),
            _ => label.into(),
        };
        self.nodes.push(Node { id, kind, label });
        id
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id as usize)
    }

    /// Adds an edge whose kind is implied by the endpoint kinds. Returns
    /// `Ok(false)` if the identical edge already exists.
    pub fn connect(&mut self, from: NodeId, to: NodeId) -> Result<bool, GraphError> {
        let a = self.nodes.get(from as usize).ok_or(GraphError::MissingNode(from))?;
        let b = self.nodes.get(to as usize).ok_or(GraphError::MissingNode(to))?;
        let kind = EdgeKind::for_endpoints(a.kind, b.kind).ok_or(GraphError::NoEdgeKind {
            from: a.kind,
            to: b.kind,
        })?;
        self.add_edge(from, to, kind)
    }

    pub fn add_edge(&mut self, from: NodeId, to: NodeId, kind: EdgeKind) -> Result<bool, GraphError> {
        let a = self.nodes.get(from as usize).ok_or(GraphError::MissingNode(from))?;
        let b = self.nodes.get(to as usize).ok_or(GraphError::MissingNode(to))?;
        let edge = Edge::between(a, b, kind)?;
        if !self.edge_set.insert(edge) {
            return Ok(false);
        }
        self.edges.push(edge);
        Ok(true)
    }

    pub fn finish(self) -> OmniGraph {
        OmniGraph::from_parts(self.sentence_id, self.nodes, self.edges, self.tokens)
    }
}

/// Polarity label of an instance, serialized as -1 / 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    pub fn flip(self) -> Label {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

impl TryFrom<i64> for Label {
    type Error = GraphError;

    fn try_from(v: i64) -> Result<Self, Self::Error> {
        match v {
            -1 => Ok(Label::Negative),
            1 => Ok(Label::Positive),
            other => Err(GraphError::BadLabel(other)),
        }
    }
}

impl From<Label> for i64 {
    fn from(l: Label) -> i64 {
        match l {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Negative => f.write_str("-1"),
            Label::Positive => f.write_str("+1"),
        }
    }
}

/// All sentence graphs for one (entity, day) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub entity_id: String,
    pub date: NaiveDate,
    pub label: Label,
    pub graphs: Vec<OmniGraph>,
}

impl Instance {
    pub fn new(
        entity_id: impl Into<String>,
        date: NaiveDate,
        label: Label,
        graphs: Vec<OmniGraph>,
    ) -> Result<Self, GraphError> {
        if graphs.is_empty() {
            return Err(GraphError::EmptyForest);
        }
        Ok(Instance {
            entity_id: entity_id.into(),
            date,
            label,
            graphs,
        })
    }

    /// `entity:date`, used as the row key of kernel matrices.
    pub fn id(&self) -> String {
        format!("{}:{}", self.entity_id, self.date)
    }

    /// The forest as one graph; this is what the kernels compare.
    pub fn union_graph(&self) -> OmniGraph {
        rebased_union(&self.graphs)
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        if self.graphs.is_empty() {
            return Err(GraphError::EmptyForest);
        }
        for g in &self.graphs {
            let report = g.validate();
            if !report.is_valid() {
                return Err(GraphError::Invalid {
                    sentence_id: g.sentence_id.clone(),
                    report,
                });
            }
        }
        Ok(())
    }
}

/// Where walks of length >= 1 may start in the node-edge-weighting kernel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkOrigin {
    /// Any node may start a walk.
    #[default]
    Any,
    /// Walks of length >= 1 start at designated-entity nodes; degree 0 still
    /// compares every node.
    DesignatedEntity,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("weight for {0} must be finite and non-negative, got {1}")]
    BadWeight(String, f64),
    #[error("expected {expected} alphas for max_depth {depth}, got {got}")]
    AlphaLength {
        depth: usize,
        expected: usize,
        got: usize,
    },
    #[error("alphas must be non-negative, got {0}")]
    NegativeAlpha(f64),
    #[error("alphas must sum to 1, got {0}")]
    AlphaSum(f64),
    #[error("WL kernels accept only 0/1 weights, {0} has {1}")]
    NonBinaryWeight(String, f64),
}

/// Kernel weights, neighborhood depth and basis-kernel interpolation.
///
/// Kinds missing from the weight maps count as weight 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    pub node_weights: BTreeMap<NodeKind, f64>,
    pub edge_weights: BTreeMap<EdgeKind, f64>,
    pub max_depth: usize,
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub walk_origin: WalkOrigin,
}

impl WeightConfig {
    /// All weights 1 and alphas spread evenly over `0..=max_depth`.
    pub fn uniform(max_depth: usize) -> Self {
        let k = (max_depth + 1) as f64;
        WeightConfig {
            node_weights: NodeKind::ALL.iter().map(|&k| (k, 1.0)).collect(),
            edge_weights: EdgeKind::ALL.iter().map(|&k| (k, 1.0)).collect(),
            max_depth,
            alphas: vec![1.0 / k; max_depth + 1],
            walk_origin: WalkOrigin::Any,
        }
    }

    pub fn node_weight(&self, kind: NodeKind) -> f64 {
        self.node_weights.get(&kind).copied().unwrap_or(1.0)
    }

    pub fn edge_weight(&self, kind: EdgeKind) -> f64 {
        self.edge_weights.get(&kind).copied().unwrap_or(1.0)
    }

    pub fn with_node_weight(mut self, kind: NodeKind, w: f64) -> Self {
        self.node_weights.insert(kind, w);
        self
    }

    pub fn with_edge_weight(mut self, kind: EdgeKind, w: f64) -> Self {
        self.edge_weights.insert(kind, w);
        self
    }

    pub fn with_alphas(mut self, alphas: Vec<f64>) -> Self {
        self.max_depth = alphas.len().saturating_sub(1);
        self.alphas = alphas;
        self
    }

    pub fn with_walk_origin(mut self, origin: WalkOrigin) -> Self {
        self.walk_origin = origin;
        self
    }

    /// Node kinds with non-zero weight.
    pub fn enabled_node_kinds(&self) -> usize {
        NodeKind::ALL
            .iter()
            .filter(|&&k| self.node_weight(k) > 0.0)
            .count()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for k in NodeKind::ALL {
            let w = self.node_weight(k);
            if !w.is_finite() || w < 0.0 {
                return Err(ConfigError::BadWeight(k.to_string(), w));
            }
        }
        for k in EdgeKind::ALL {
            let w = self.edge_weight(k);
            if !w.is_finite() || w < 0.0 {
                return Err(ConfigError::BadWeight(k.to_string(), w));
            }
        }
        if self.alphas.len() != self.max_depth + 1 {
            return Err(ConfigError::AlphaLength {
                depth: self.max_depth,
                expected: self.max_depth + 1,
                got: self.alphas.len(),
            });
        }
        if let Some(&a) = self.alphas.iter().find(|a| !(**a >= 0.0)) {
            return Err(ConfigError::NegativeAlpha(a));
        }
        let sum: f64 = self.alphas.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ConfigError::AlphaSum(sum));
        }
        Ok(())
    }

    /// WL only understands presence/absence of node and edge kinds.
    pub fn validate_binary(&self) -> Result<(), ConfigError> {
        for k in NodeKind::ALL {
            let w = self.node_weight(k);
            if w != 0.0 && w != 1.0 {
                return Err(ConfigError::NonBinaryWeight(k.to_string(), w));
            }
        }
        for k in EdgeKind::ALL {
            let w = self.edge_weight(k);
            if w != 0.0 && w != 1.0 {
                return Err(ConfigError::NonBinaryWeight(k.to_string(), w));
            }
        }
        Ok(())
    }
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig::uniform(0)
    }
}
