use std::collections::VecDeque;

use super::{NetworkGraph, NodeId, TopologyError};

/// Set of edges still available in a working copy of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMask {
    alive: Vec<bool>,
}

impl EdgeMask {
    pub fn all(g: &NetworkGraph) -> Self {
        Self {
            alive: vec![true; g.edge_count()],
        }
    }

    pub fn none(g: &NetworkGraph) -> Self {
        Self {
            alive: vec![false; g.edge_count()],
        }
    }

    pub fn contains(&self, e: usize) -> bool {
        self.alive[e]
    }

    pub fn insert(&mut self, e: usize) {
        self.alive[e] = true;
    }

    pub fn remove(&mut self, e: usize) {
        self.alive[e] = false;
    }

    pub fn remove_all(&mut self, edges: &[usize]) {
        for &e in edges {
            self.alive[e] = false;
        }
    }

    pub fn len(&self) -> usize {
        self.alive.iter().filter(|a| **a).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn intersect(&self, other: &EdgeMask) -> EdgeMask {
        EdgeMask {
            alive: self.alive.iter().zip(&other.alive).map(|(a, b)| *a && *b).collect(),
        }
    }
}

/// A simple path as node indices plus the edges joining them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Route {
    pub fn hops(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self, g: &NetworkGraph) -> Vec<NodeId> {
        self.nodes.iter().map(|&n| g.node(n).clone()).collect()
    }
}

/// Hop distances from `source` over the edges in `mask`; `None` if unreachable.
pub fn bfs_hops(g: &NetworkGraph, mask: &EdgeMask, source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.node_count()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].expect("queued nodes have a distance");
        for &(w, e) in g.neighbors(u) {
            if mask.contains(e) && dist[w].is_none() {
                dist[w] = Some(du + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Minimum-hop path from `s` to `t` over the edges in `mask`.
///
/// Among equal-hop predecessors the one with the smallest label is chosen, so
/// the result depends only on the graph and the mask.
pub fn shortest_path_in(g: &NetworkGraph, mask: &EdgeMask, s: usize, t: usize) -> Option<Route> {
    let mut dist: Vec<Option<usize>> = vec![None; g.node_count()];
    dist[s] = Some(0);
    let mut queue = VecDeque::from([s]);
    'search: while let Some(u) = queue.pop_front() {
        if u == t {
            break;
        }
        let du = dist[u].expect("queued nodes have a distance");
        for &(w, e) in g.neighbors(u) {
            if mask.contains(e) && dist[w].is_none() {
                dist[w] = Some(du + 1);
                if w == t {
                    break 'search;
                }
                queue.push_back(w);
            }
        }
    }
    // Every node closer than t has been labelled by now.
    let hops = dist[t]?;
    let mut nodes = vec![t];
    let mut edges = Vec::with_capacity(hops);
    let mut cur = t;
    for level in (0..hops).rev() {
        let &(prev, e) = g
            .neighbors(cur)
            .iter()
            .find(|&&(w, e)| mask.contains(e) && dist[w] == Some(level))
            .expect("a node at distance d+1 has a neighbour at distance d");
        nodes.push(prev);
        edges.push(e);
        cur = prev;
    }
    nodes.reverse();
    edges.reverse();
    Some(Route { nodes, edges })
}

/// Minimum-hop path between two labelled nodes of `g`, with its hop count.
pub fn shortest_path(g: &NetworkGraph, s: &str, t: &str) -> Result<Option<(Vec<NodeId>, usize)>, TopologyError> {
    let (si, ti) = (g.require(s)?, g.require(t)?);
    Ok(shortest_path_in(g, &EdgeMask::all(g), si, ti).map(|r| (r.labels(g), r.hops())))
}
