use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AlgorithmError, Decision, OutcomeStats, RoutingOutcome};
use crate::topology::{MerrInstance, NetworkGraph, Route};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleLimits {
    /// Bounded simple paths enumerated per demand before giving up.
    pub max_paths_per_demand: usize,
    /// Search-tree nodes visited before giving up.
    pub max_search_nodes: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_paths_per_demand: 20_000,
            max_search_nodes: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("demand {demand} has more than {limit} bounded simple paths")]
    TooManyPaths { demand: usize, limit: usize },
    #[error("exhaustive search exceeded {limit} nodes")]
    SearchLimit { limit: usize },
}

/// Largest number of demands that can be served at once by pairwise
/// edge-disjoint simple paths within the hop bound, by exhaustive search.
pub fn brute_force_oracle(instance: &MerrInstance, limits: OracleLimits) -> Result<usize, AlgorithmError> {
    Ok(brute_force_routing(instance, limits)?.met_count())
}

/// [`brute_force_oracle`] together with one optimal routing.
pub fn brute_force_routing(instance: &MerrInstance, limits: OracleLimits) -> Result<RoutingOutcome, AlgorithmError> {
    let start = Instant::now();
    instance.validate()?;
    let g = &instance.graph;
    let words = g.edge_count().div_ceil(64).max(1);
    let mut candidates = Vec::with_capacity(instance.demands.len());
    for (i, &(s, d)) in instance.endpoints().iter().enumerate() {
        let mut paths = bounded_paths(g, s, d, instance.l_max as usize, limits.max_paths_per_demand).ok_or(
            OracleError::TooManyPaths {
                demand: i,
                limit: limits.max_paths_per_demand,
            },
        )?;
        paths.sort_by_key(Route::hops);
        let with_bits = paths
            .into_iter()
            .map(|r| {
                let mut bits = vec![0u64; words];
                for &e in &r.edges {
                    bits[e / 64] |= 1 << (e % 64);
                }
                (bits, r)
            })
            .collect();
        candidates.push(with_bits);
    }
    let mut search = Search {
        candidates: &candidates,
        used: vec![0; words],
        chosen: vec![None; candidates.len()],
        best: 0,
        best_choice: vec![None; candidates.len()],
        nodes: 0,
        limit: limits.max_search_nodes,
    };
    search.run(0, 0)?;
    let decisions = search
        .best_choice
        .iter()
        .enumerate()
        .map(|(i, c)| match c {
            Some(k) => Decision::Satisfied {
                path: candidates[i][*k].1.labels(g),
            },
            None => Decision::Rejected,
        })
        .collect();
    let stats = OutcomeStats {
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        ..OutcomeStats::default()
    };
    Ok(RoutingOutcome::new(decisions, stats))
}

struct Search<'a> {
    candidates: &'a [Vec<(Vec<u64>, Route)>],
    used: Vec<u64>,
    chosen: Vec<Option<usize>>,
    best: usize,
    best_choice: Vec<Option<usize>>,
    nodes: usize,
    limit: usize,
}

impl Search<'_> {
    fn run(&mut self, demand: usize, met: usize) -> Result<(), OracleError> {
        self.nodes += 1;
        if self.nodes > self.limit {
            return Err(OracleError::SearchLimit { limit: self.limit });
        }
        if met > self.best {
            self.best = met;
            self.best_choice.clone_from(&self.chosen);
        }
        let remaining = self.candidates.len() - demand;
        if demand == self.candidates.len() || met + remaining <= self.best {
            return Ok(());
        }
        for (k, (bits, _)) in self.candidates[demand].iter().enumerate() {
            if bits.iter().zip(&self.used).any(|(a, b)| a & b != 0) {
                continue;
            }
            self.used.iter_mut().zip(bits).for_each(|(u, b)| *u |= b);
            self.chosen[demand] = Some(k);
            self.run(demand + 1, met + 1)?;
            self.chosen[demand] = None;
            self.used.iter_mut().zip(bits).for_each(|(u, b)| *u &= !b);
            if met + remaining <= self.best {
                return Ok(());
            }
        }
        self.run(demand + 1, met)
    }
}

/// All simple `s`→`t` paths of at most `max_hops` hops, or `None` if there
/// are more than `limit`.
fn bounded_paths(g: &NetworkGraph, s: usize, t: usize, max_hops: usize, limit: usize) -> Option<Vec<Route>> {
    fn dfs(
        g: &NetworkGraph,
        t: usize,
        max_hops: usize,
        limit: usize,
        on_path: &mut [bool],
        route: &mut Route,
        out: &mut Vec<Route>,
    ) -> bool {
        let cur = *route.nodes.last().expect("route starts at the source");
        if cur == t {
            out.push(route.clone());
            return out.len() <= limit;
        }
        if route.hops() == max_hops {
            return true;
        }
        for &(w, e) in g.neighbors(cur) {
            if on_path[w] {
                continue;
            }
            on_path[w] = true;
            route.nodes.push(w);
            route.edges.push(e);
            let ok = dfs(g, t, max_hops, limit, on_path, route, out);
            route.nodes.pop();
            route.edges.pop();
            on_path[w] = false;
            if !ok {
                return false;
            }
        }
        true
    }
    let mut on_path = vec![false; g.node_count()];
    on_path[s] = true;
    let mut route = Route {
        nodes: vec![s],
        edges: vec![],
    };
    let mut out = Vec::new();
    dfs(g, t, max_hops, limit, &mut on_path, &mut route, &mut out).then_some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k4() -> NetworkGraph {
        NetworkGraph::new(
            ["a", "b", "c", "d"],
            &[
                ("a", "b", None),
                ("a", "c", None),
                ("a", "d", None),
                ("b", "c", None),
                ("b", "d", None),
                ("c", "d", None),
            ],
        )
        .unwrap()
    }

    #[test]
    fn path_counts_in_k4() {
        // a to b in K4: direct, via c, via d, via c-d, via d-c.
        let g = k4();
        let all = bounded_paths(&g, 0, 1, 3, 100).unwrap();
        assert_eq!(all.len(), 5);
        assert_eq!(bounded_paths(&g, 0, 1, 2, 100).unwrap().len(), 3);
        assert_eq!(bounded_paths(&g, 0, 1, 1, 100).unwrap().len(), 1);
        assert!(bounded_paths(&g, 0, 1, 3, 4).is_none());
    }

    #[test]
    fn empty_demand_set() {
        let inst = MerrInstance::new(k4(), &[] as &[(&str, &str)], 3).unwrap();
        assert_eq!(brute_force_oracle(&inst, OracleLimits::default()).unwrap(), 0);
    }

    #[test]
    fn k4_star_demands() {
        // a has degree 3, so at most three demands leaving a; each takes one edge at a.
        let inst = MerrInstance::new(k4(), &[("a", "b"), ("a", "c"), ("a", "d")], 3).unwrap();
        let out = brute_force_routing(&inst, OracleLimits::default()).unwrap();
        assert_eq!(out.met_count(), 3);
        out.check(&inst).unwrap();
        let inst = MerrInstance::new(k4(), &[("a", "b"), ("a", "c"), ("a", "d"), ("a", "b")], 3).unwrap();
        assert_eq!(brute_force_oracle(&inst, OracleLimits::default()).unwrap(), 3);
    }

    #[test]
    fn limits_are_reported() {
        let inst = MerrInstance::new(k4(), &[("a", "b")], 3).unwrap();
        let tight = OracleLimits {
            max_paths_per_demand: 2,
            ..OracleLimits::default()
        };
        assert!(matches!(
            brute_force_oracle(&inst, tight),
            Err(AlgorithmError::Oracle(OracleError::TooManyPaths {
                demand: 0,
                limit: 2
            }))
        ));
        let tiny = OracleLimits {
            max_search_nodes: 1,
            ..OracleLimits::default()
        };
        assert!(matches!(
            brute_force_oracle(&inst, tiny),
            Err(AlgorithmError::Oracle(OracleError::SearchLimit { .. }))
        ));
    }
}
