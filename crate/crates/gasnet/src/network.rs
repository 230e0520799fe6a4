//! Graph model of a pipeline network: slack and non-slack nodes joined by
//! pipes and compressors, with structural validation.
//!
//! Flow sign convention: `f > 0` means flow in the declared `from -> to`
//! direction of an edge. A node's injection is the net flow it feeds into
//! the network, `q = sum(outgoing f) - sum(incoming f)`; withdrawals are
//! negative injections.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("edge '{edge}' references unknown node '{node}'")]
    UnknownNode { edge: String, node: String },
    #[error("duplicate node id '{0}'")]
    DuplicateNodeId(String),
    #[error("duplicate edge id '{0}'")]
    DuplicateEdgeId(String),
    #[error("edge '{0}' is a self-loop")]
    SelfLoop(String),
}

/// Role of a node in the boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    /// Pressure specified, injection unknown.
    Slack { pressure: f64 },
    /// Injection specified (positive = supply, negative = withdrawal),
    /// pressure unknown.
    NonSlack { injection: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    /// Elevation above datum, m (or nondimensional after scaling).
    pub elevation: Option<f64>,
}

/// Pipe parameters; dimensional on ingestion, nondimensional after scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipeParams {
    pub length: f64,
    pub diameter: f64,
    pub area: f64,
    pub friction: f64,
    /// Component of the gravity unit vector along the flow direction,
    /// resolved at construction (elevations take precedence over an
    /// explicitly supplied value). Positive means the pipe descends.
    pub sin_theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EdgeKind {
    Pipe(PipeParams),
    Compressor { ratio: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn is_pipe(&self) -> bool {
        matches!(self.kind, EdgeKind::Pipe(_))
    }

    pub fn pipe_params(&self) -> Option<&PipeParams> {
        match &self.kind {
            EdgeKind::Pipe(p) => Some(p),
            EdgeKind::Compressor { .. } => None,
        }
    }
}

/// Edge description with node ids, consumed by [`Network::new`].
#[derive(Debug, Clone)]
pub struct EdgeSpec {
    pub id: String,
    pub from: String,
    pub to: String,
    pub kind: EdgeSpecKind,
}

#[derive(Debug, Clone)]
pub enum EdgeSpecKind {
    Pipe {
        length: f64,
        diameter: f64,
        /// Defaults to the circular cross-section `pi D^2 / 4`.
        area: Option<f64>,
        friction: f64,
        /// Used only when the endpoint elevations are not both given.
        sin_theta: Option<f64>,
    },
    Compressor { ratio: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiagnosticKind {
    NoSlackNode,
    NoPipes,
    Disconnected { components: usize },
    NonPositiveLength,
    NonPositiveDiameter,
    NonPositiveArea,
    NegativeFriction,
    NonPositiveSlackPressure,
    CompressorRatioBelowOne,
    InclineOutOfRange,
    ParallelEdges,
}

/// One structural finding from [`Network::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub entity: Option<String>,
    pub severity: Severity,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match &self.entity {
            Some(e) => write!(f, "{sev}: {:?} at '{e}'", self.kind),
            None => write!(f, "{sev}: {:?}", self.kind),
        }
    }
}

/// Immutable pipeline network graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
}

impl Network {
    /// Builds the graph, resolving node references and per-pipe inclines.
    ///
    /// When both endpoint elevations are known, the incline is derived as
    /// `sin_theta = (z_from - z_to) / L` (descending pipes positive, matching
    /// the gravity term of the momentum balance) and clamped to `[-1, 1]`;
    /// an explicit `sin_theta` is used otherwise.
    pub fn new(nodes: Vec<Node>, edge_specs: Vec<EdgeSpec>) -> Result<Self, NetworkError> {
        let mut index = std::collections::HashMap::new();
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.id.clone(), i).is_some() {
                return Err(NetworkError::DuplicateNodeId(node.id.clone()));
            }
        }
        let mut edges = Vec::with_capacity(edge_specs.len());
        let mut edge_ids = std::collections::HashSet::new();
        for spec in edge_specs {
            if !edge_ids.insert(spec.id.clone()) {
                return Err(NetworkError::DuplicateEdgeId(spec.id));
            }
            let from = *index.get(&spec.from).ok_or_else(|| NetworkError::UnknownNode {
                edge: spec.id.clone(),
                node: spec.from.clone(),
            })?;
            let to = *index.get(&spec.to).ok_or_else(|| NetworkError::UnknownNode {
                edge: spec.id.clone(),
                node: spec.to.clone(),
            })?;
            if from == to {
                return Err(NetworkError::SelfLoop(spec.id));
            }
            let kind = match spec.kind {
                EdgeSpecKind::Pipe {
                    length,
                    diameter,
                    area,
                    friction,
                    sin_theta,
                } => {
                    let resolved = match (nodes[from].elevation, nodes[to].elevation) {
                        (Some(zf), Some(zt)) if length > 0.0 => {
                            ((zf - zt) / length).clamp(-1.0, 1.0)
                        }
                        _ => sin_theta.unwrap_or(0.0),
                    };
                    EdgeKind::Pipe(PipeParams {
                        length,
                        diameter,
                        area: area.unwrap_or(std::f64::consts::PI * diameter * diameter / 4.0),
                        friction,
                        sin_theta: resolved,
                    })
                }
                EdgeSpecKind::Compressor { ratio } => EdgeKind::Compressor { ratio },
            };
            edges.push(Edge {
                id: spec.id,
                from,
                to,
                kind,
            });
        }
        Ok(Self::from_parts(nodes, edges))
    }

    /// Assembles a network from already-resolved parts (used by scaling and
    /// by tests); recomputes the incidence lists.
    pub fn from_parts(nodes: Vec<Node>, edges: Vec<Edge>) -> Self {
        let mut incoming = vec![Vec::new(); nodes.len()];
        let mut outgoing = vec![Vec::new(); nodes.len()];
        for (e, edge) in edges.iter().enumerate() {
            outgoing[edge.from].push(e);
            incoming[edge.to].push(e);
        }
        Self {
            nodes,
            edges,
            incoming,
            outgoing,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn pipe_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_pipe()).count()
    }

    pub fn compressor_count(&self) -> usize {
        self.edges.len() - self.pipe_count()
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// `(incoming, outgoing)` edge indices at a node.
    pub fn incidence(&self, node: usize) -> (&[usize], &[usize]) {
        (&self.incoming[node], &self.outgoing[node])
    }

    pub fn slack_nodes(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.nodes.iter().enumerate().filter_map(|(i, n)| match n.kind {
            NodeKind::Slack { pressure } => Some((i, pressure)),
            NodeKind::NonSlack { .. } => None,
        })
    }

    pub fn first_slack(&self) -> Option<(usize, f64)> {
        self.slack_nodes().next()
    }

    pub fn total_pipe_length(&self) -> f64 {
        self.edges
            .iter()
            .filter_map(|e| e.pipe_params())
            .map(|p| p.length)
            .sum()
    }

    pub fn longest_pipe_length(&self) -> Option<f64> {
        self.edges
            .iter()
            .filter_map(|e| e.pipe_params())
            .map(|p| p.length)
            .fold(None, |acc: Option<f64>, l| Some(acc.map_or(l, |m| m.max(l))))
    }

    /// Structural validation. An empty list means the network is well-posed:
    /// connected, at least one slack node and one pipe, positive geometry,
    /// compressor ratios at least one. Parallel edges are flagged as
    /// warnings only.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        let error = |kind, entity: Option<String>| Diagnostic {
            kind,
            entity,
            severity: Severity::Error,
        };

        if self.slack_nodes().next().is_none() {
            diags.push(error(DiagnosticKind::NoSlackNode, None));
        }
        if self.pipe_count() == 0 {
            diags.push(error(DiagnosticKind::NoPipes, None));
        }
        for node in &self.nodes {
            if let NodeKind::Slack { pressure } = node.kind {
                if pressure <= 0.0 || pressure.is_nan() {
                    diags.push(error(
                        DiagnosticKind::NonPositiveSlackPressure,
                        Some(node.id.clone()),
                    ));
                }
            }
        }
        let mut seen_pairs = std::collections::HashSet::new();
        for edge in &self.edges {
            match &edge.kind {
                EdgeKind::Pipe(p) => {
                    if p.length <= 0.0 || p.length.is_nan() {
                        diags.push(error(DiagnosticKind::NonPositiveLength, Some(edge.id.clone())));
                    }
                    if p.diameter <= 0.0 || p.diameter.is_nan() {
                        diags
                            .push(error(DiagnosticKind::NonPositiveDiameter, Some(edge.id.clone())));
                    }
                    if p.area <= 0.0 || p.area.is_nan() {
                        diags.push(error(DiagnosticKind::NonPositiveArea, Some(edge.id.clone())));
                    }
                    if p.friction < 0.0 {
                        diags.push(error(DiagnosticKind::NegativeFriction, Some(edge.id.clone())));
                    }
                    if p.sin_theta.abs() > 1.0 {
                        diags.push(error(DiagnosticKind::InclineOutOfRange, Some(edge.id.clone())));
                    }
                }
                EdgeKind::Compressor { ratio } => {
                    if *ratio < 1.0 || ratio.is_nan() {
                        diags.push(error(
                            DiagnosticKind::CompressorRatioBelowOne,
                            Some(edge.id.clone()),
                        ));
                    }
                }
            }
            let key = (edge.from.min(edge.to), edge.from.max(edge.to));
            if !seen_pairs.insert(key) {
                diags.push(Diagnostic {
                    kind: DiagnosticKind::ParallelEdges,
                    entity: Some(edge.id.clone()),
                    severity: Severity::Warning,
                });
            }
        }
        let components = self.component_count();
        if self.node_count() > 0 && components > 1 {
            diags.push(error(DiagnosticKind::Disconnected { components }, None));
        }

        // Counting identity of the network system: one equation per
        // compressor, pipe, non-slack and slack node matches one unknown per
        // node and per edge. Structural by construction.
        let ns = self
            .nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::NonSlack { .. }))
            .count();
        let s = self.node_count() - ns;
        debug_assert_eq!(
            self.compressor_count() + self.pipe_count() + ns + s,
            self.edge_count() + self.node_count()
        );

        diags
    }

    pub fn has_fatal(diags: &[Diagnostic]) -> bool {
        diags.iter().any(|d| d.severity == Severity::Error)
    }

    fn component_count(&self) -> usize {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut components = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(v) = stack.pop() {
                for &e in self.incoming[v].iter().chain(&self.outgoing[v]) {
                    let edge = &self.edges[e];
                    let other = if edge.from == v { edge.to } else { edge.from };
                    if !seen[other] {
                        seen[other] = true;
                        stack.push(other);
                    }
                }
            }
        }
        components
    }

    /// Net injection `sum(out) - sum(in)` at every slack node, given edge
    /// flows in declaration order.
    pub fn slack_injections(&self, flows: &[f64]) -> Vec<(usize, f64)> {
        self.slack_nodes()
            .map(|(i, _)| (i, self.net_outflow(i, flows)))
            .collect()
    }

    /// Net flow leaving a node through its incident edges.
    pub fn net_outflow(&self, node: usize, flows: &[f64]) -> f64 {
        let outgoing: f64 = self.outgoing[node].iter().map(|&e| flows[e]).sum();
        let incoming: f64 = self.incoming[node].iter().map(|&e| flows[e]).sum();
        outgoing - incoming
    }

    /// Sum of all injections, specified and computed; zero at a mass-
    /// conserving solution.
    pub fn global_imbalance(&self, flows: &[f64]) -> f64 {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| match n.kind {
                NodeKind::Slack { .. } => self.net_outflow(i, flows),
                NodeKind::NonSlack { injection } => injection,
            })
            .sum()
    }
}
