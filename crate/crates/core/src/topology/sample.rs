use rand::seq::index;
use rand::Rng;

use super::{bfs_hops, Demand, Edge, EdgeMask, NetworkGraph, TopologyError};
use crate::rng::rng_from_seed;

/// Keeps each edge independently with probability `p_entangle`.
///
/// One Bernoulli draw per edge in edge order, so the result is a function of
/// `(g, p_entangle, seed)`.
pub fn sample_reduced_network(g: &NetworkGraph, p_entangle: f64, seed: u64) -> Result<NetworkGraph, TopologyError> {
    sample_reduced_network_with(g, |_| p_entangle, seed)
}

/// Like [`sample_reduced_network`] with a per-edge success probability.
pub fn sample_reduced_network_with(
    g: &NetworkGraph,
    p_edge: impl Fn(&Edge) -> f64,
    seed: u64,
) -> Result<NetworkGraph, TopologyError> {
    let probs: Vec<f64> = g.edges().iter().map(p_edge).collect();
    if let Some(&bad) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(TopologyError::BadProbability(bad));
    }
    let mut rng = rng_from_seed(seed);
    let keep: Vec<bool> = probs.iter().map(|&p| rng.gen_bool(p)).collect();
    Ok(g.subgraph(|e, _| keep[e]))
}

/// Samples `n` distinct unordered node pairs uniformly without replacement
/// among pairs whose hop distance is between 1 and `max_sp_hops`.
///
/// Each pair becomes a demand from its smaller label to its larger label. The
/// demand order is the sampling order.
pub fn generate_demands(
    g: &NetworkGraph,
    n: usize,
    max_sp_hops: usize,
    seed: u64,
) -> Result<Vec<Demand>, TopologyError> {
    if g.node_count() < 2 {
        return Err(TopologyError::TooFewNodes(g.node_count()));
    }
    let all = EdgeMask::all(g);
    let mut eligible = Vec::new();
    for a in 0..g.node_count() {
        let dist = bfs_hops(g, &all, a);
        for (b, d) in dist.iter().enumerate().skip(a + 1) {
            if matches!(d, Some(h) if (1..=max_sp_hops).contains(h)) {
                eligible.push((a, b));
            }
        }
    }
    if eligible.len() < n {
        return Err(TopologyError::InsufficientPairs {
            requested: n,
            available: eligible.len(),
        });
    }
    let mut rng = rng_from_seed(seed);
    Ok(index::sample(&mut rng, eligible.len(), n)
        .into_iter()
        .enumerate()
        .map(|(i, k)| {
            let (a, b) = eligible[k];
            Demand {
                index: i,
                source: g.node(a).clone(),
                dest: g.node(b).clone(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn triangle() -> NetworkGraph {
        NetworkGraph::new(["a", "b", "c"], &[("a", "b", None), ("b", "c", None), ("a", "c", None)]).unwrap()
    }

    #[test]
    fn certain_and_impossible_entanglement() {
        let g = triangle();
        assert_eq!(sample_reduced_network(&g, 1.0, 3).unwrap(), g);
        let none = sample_reduced_network(&g, 0.0, 3).unwrap();
        assert_eq!(none.edge_count(), 0);
        assert_eq!(none.node_count(), 3);
        assert!(matches!(
            sample_reduced_network(&g, 1.5, 0),
            Err(TopologyError::BadProbability(_))
        ));
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let g = triangle();
        for seed in 0..20 {
            assert_eq!(
                sample_reduced_network(&g, 0.5, seed).unwrap(),
                sample_reduced_network(&g, 0.5, seed).unwrap()
            );
        }
    }

    #[test]
    fn single_pair() {
        let g = NetworkGraph::new(["a", "b"], &[("a", "b", None)]).unwrap();
        let d = generate_demands(&g, 1, 8, 11).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].source.as_str(), d[0].dest.as_str()), ("a", "b"));
    }

    #[test]
    fn triangle_all_pairs() {
        let d = generate_demands(&triangle(), 3, 1, 5).unwrap();
        let pairs: BTreeSet<(String, String)> = d.iter().map(|d| (d.source.to_string(), d.dest.to_string())).collect();
        let expect: BTreeSet<(String, String)> = [("a", "b"), ("a", "c"), ("b", "c")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        assert_eq!(pairs, expect);
        assert_eq!(d.iter().map(|d| d.index).collect::<Vec<_>>(), [0, 1, 2]);
    }

    #[test]
    fn too_few_pairs() {
        let g = NetworkGraph::new(["a", "b", "c"], &[("a", "b", None)]).unwrap();
        let err = generate_demands(&g, 2, 8, 0).unwrap_err();
        assert!(matches!(
            err,
            TopologyError::InsufficientPairs {
                requested: 2,
                available: 1
            }
        ));
        let lone = NetworkGraph::new(["a"], &[] as &[(&str, &str, Option<f64>)]).unwrap();
        assert!(matches!(
            generate_demands(&lone, 1, 8, 0),
            Err(TopologyError::TooFewNodes(1))
        ));
    }
}
