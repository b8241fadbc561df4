//! Graph and demand model.
//!
//! Nodes and edges are kept in lexicographic order of their labels. Every
//! iteration, tie-break and RNG draw follows that order, which makes sampling
//! and path selection reproducible for a given input.

mod io;
mod paths;
mod sample;

use std::borrow::Borrow;
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{load_topology, read_topology, to_edge_list_json, EdgeListDoc, EdgeRecord, TopologyFormat};
pub use paths::{bfs_hops, shortest_path, shortest_path_in, EdgeMask, Route};
pub use sample::{generate_demands, sample_reduced_network, sample_reduced_network_with};

/// Distance assigned to links whose source file carries no geometry.
pub const DEFAULT_DISTANCE_KM: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(label: impl Into<String>) -> Result<Self, TopologyError> {
        let label = label.into();
        if label.is_empty() {
            return Err(TopologyError::EmptyNodeId);
        }
        Ok(Self(label))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for NodeId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Undirected link. Endpoints are stored with `u < v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub distance_km: f64,
}

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("node id must not be empty")]
    EmptyNodeId,
    #[error("duplicate node id `{0}`")]
    DuplicateNode(NodeId),
    #[error("{location}: edge references unknown node `{node}`")]
    UnknownNode { location: String, node: String },
    #[error("{location}: self-loop on node `{node}`")]
    SelfLoop { location: String, node: String },
    #[error("{location}: distance must be a finite non-negative number, got {value}")]
    BadDistance { location: String, value: f64 },
    #[error("unknown node `{0}`")]
    NodeNotInGraph(String),
    #[error("{format} parse error at {location}: {message}")]
    Parse {
        format: &'static str,
        location: String,
        message: String,
    },
    #[error("probability must lie in [0, 1], got {0}")]
    BadProbability(f64),
    #[error("graph needs at least 2 nodes to generate demands, has {0}")]
    TooFewNodes(usize),
    #[error("requested {requested} demands but only {available} eligible pairs exist")]
    InsufficientPairs { requested: usize, available: usize },
    #[error("demand {index}: source and destination are both `{node}`")]
    DegenerateDemand { index: usize, node: NodeId },
    #[error("demand {index}: endpoint `{node}` is not in the graph")]
    DemandEndpointMissing { index: usize, node: NodeId },
    #[error("l_max must be at least 1")]
    ZeroLengthBound,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Non-fatal observations made while building a graph.
#[derive(Debug, Clone, PartialEq)]
pub enum TopologyWarning {
    DuplicateEdge { location: String, u: NodeId, v: NodeId },
}

impl fmt::Display for TopologyWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyWarning::DuplicateEdge { location, u, v } => {
                write!(f, "{location}: duplicate edge {u}-{v} collapsed")
            }
        }
    }
}

/// Undirected simple graph of quantum nodes and single-channel links.
///
/// Immutable once built. Node indices follow label order; edge indices follow
/// the order of their `(u, v)` index pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    nodes: Vec<NodeId>,
    edges: Vec<Edge>,
    ends: Vec<(usize, usize)>,
    // (neighbor, edge index), sorted by neighbor
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl NetworkGraph {
    /// Builds a graph from labels and `(u, v, distance_km)` triples. Duplicate
    /// undirected edges keep the first occurrence.
    pub fn new<I, S>(nodes: I, edges: &[(S, S, Option<f64>)]) -> Result<Self, TopologyError>
    where
        I: IntoIterator,
        I::Item: Into<String>,
        S: AsRef<str>,
    {
        let mut b = GraphBuilder::default();
        for n in nodes {
            b.add_node(n)?;
        }
        for (i, (u, v, d)) in edges.iter().enumerate() {
            b.add_edge(u.as_ref(), v.as_ref(), *d, || format!("edge #{i}"))?;
        }
        Ok(b.build().0)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, idx: usize) -> &NodeId {
        &self.nodes[idx]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(id)).ok()
    }

    pub fn require(&self, id: &str) -> Result<usize, TopologyError> {
        self.index_of(id)
            .ok_or_else(|| TopologyError::NodeNotInGraph(id.to_string()))
    }

    /// Endpoint indices of edge `e`, smaller first.
    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        self.ends[e]
    }

    /// `(neighbor, edge)` pairs of `node`, ordered by neighbor.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        let adj = &self.adjacency[a];
        adj.binary_search_by_key(&b, |&(n, _)| n).ok().map(|i| adj[i].1)
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    /// Same node set, only the edges for which `keep` returns true.
    pub fn subgraph(&self, mut keep: impl FnMut(usize, &Edge) -> bool) -> NetworkGraph {
        let raw = self
            .edges
            .iter()
            .enumerate()
            .filter(|(e, edge)| keep(*e, edge))
            .map(|(e, edge)| (self.ends[e], edge.distance_km))
            .collect();
        NetworkGraph::from_parts(self.nodes.clone(), raw)
    }
}

impl NetworkGraph {
    fn from_parts(nodes: Vec<NodeId>, mut raw: Vec<((usize, usize), f64)>) -> Self {
        raw.sort_by_key(|a| a.0);
        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut edges = Vec::with_capacity(raw.len());
        let mut ends = Vec::with_capacity(raw.len());
        for (e, &((a, b), d)) in raw.iter().enumerate() {
            adjacency[a].push((b, e));
            adjacency[b].push((a, e));
            ends.push((a, b));
            edges.push(Edge {
                u: nodes[a].clone(),
                v: nodes[b].clone(),
                distance_km: d,
            });
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Self {
            nodes,
            edges,
            ends,
            adjacency,
        }
    }
}

/// Incremental graph construction with validation.
#[derive(Debug, Default)]
pub(crate) struct GraphBuilder {
    nodes: BTreeSet<NodeId>,
    // keyed by labels so that indices can be assigned after all nodes are known
    edges: BTreeMap<(NodeId, NodeId), f64>,
    warnings: Vec<TopologyWarning>,
}

impl GraphBuilder {
    pub(crate) fn add_node(&mut self, label: impl Into<String>) -> Result<(), TopologyError> {
        let id = NodeId::new(label)?;
        if !self.nodes.insert(id.clone()) {
            return Err(TopologyError::DuplicateNode(id));
        }
        Ok(())
    }

    pub(crate) fn add_edge(
        &mut self,
        u: &str,
        v: &str,
        distance_km: Option<f64>,
        location: impl Fn() -> String,
    ) -> Result<(), TopologyError> {
        for end in [u, v] {
            if !self.nodes.contains(end) {
                return Err(TopologyError::UnknownNode {
                    location: location(),
                    node: end.to_string(),
                });
            }
        }
        if u == v {
            return Err(TopologyError::SelfLoop {
                location: location(),
                node: u.to_string(),
            });
        }
        let d = distance_km.unwrap_or(DEFAULT_DISTANCE_KM);
        if !(d.is_finite() && d >= 0.0) {
            return Err(TopologyError::BadDistance {
                location: location(),
                value: d,
            });
        }
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        let key = (NodeId(a.to_string()), NodeId(b.to_string()));
        match self.edges.entry(key) {
            Entry::Occupied(e) => {
                let (u, v) = e.key().clone();
                self.warnings.push(TopologyWarning::DuplicateEdge {
                    location: location(),
                    u,
                    v,
                });
            }
            Entry::Vacant(e) => {
                e.insert(d);
            }
        }
        Ok(())
    }

    pub(crate) fn build(self) -> (NetworkGraph, Vec<TopologyWarning>) {
        let nodes: Vec<NodeId> = self.nodes.into_iter().collect();
        let index: BTreeMap<&NodeId, usize> = nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
        let raw = self
            .edges
            .iter()
            .map(|((a, b), &d)| ((index[a], index[b]), d))
            .collect();
        (NetworkGraph::from_parts(nodes, raw), self.warnings)
    }
}

/// Ordered source/destination pair asking for one end-to-end path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demand {
    pub index: usize,
    pub source: NodeId,
    pub dest: NodeId,
}

/// A graph, an ordered demand list and the hop bound on every path.
#[derive(Debug, Clone, PartialEq)]
pub struct MerrInstance {
    pub graph: NetworkGraph,
    pub demands: Vec<Demand>,
    pub l_max: u32,
}

impl MerrInstance {
    /// Builds an instance from `(source, dest)` label pairs and validates it.
    pub fn new<S: AsRef<str>>(graph: NetworkGraph, pairs: &[(S, S)], l_max: u32) -> Result<Self, TopologyError> {
        let demands = pairs
            .iter()
            .enumerate()
            .map(|(index, (s, d))| {
                Ok(Demand {
                    index,
                    source: NodeId::new(s.as_ref())?,
                    dest: NodeId::new(d.as_ref())?,
                })
            })
            .collect::<Result<Vec<_>, TopologyError>>()?;
        let inst = Self { graph, demands, l_max };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), TopologyError> {
        if self.l_max == 0 {
            return Err(TopologyError::ZeroLengthBound);
        }
        for (pos, d) in self.demands.iter().enumerate() {
            for end in [&d.source, &d.dest] {
                if self.graph.index_of(end.as_str()).is_none() {
                    return Err(TopologyError::DemandEndpointMissing {
                        index: pos,
                        node: end.clone(),
                    });
                }
            }
            if d.source == d.dest {
                return Err(TopologyError::DegenerateDemand {
                    index: pos,
                    node: d.source.clone(),
                });
            }
        }
        Ok(())
    }

    /// Node indices `(source, dest)` of every demand. Panics on an invalid
    /// instance; call [`MerrInstance::validate`] first.
    pub fn endpoints(&self) -> Vec<(usize, usize)> {
        self.demands
            .iter()
            .map(|d| {
                (
                    self.graph.index_of(d.source.as_str()).expect("validated"),
                    self.graph.index_of(d.dest.as_str()).expect("validated"),
                )
            })
            .collect()
    }
}
