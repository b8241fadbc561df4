use std::time::Instant;

use super::{AlgorithmError, Decision, OutcomeStats, RoutingOutcome};
use crate::topology::{shortest_path_in, EdgeMask, MerrInstance, Route};

/// Shortest-path-first greedy.
///
/// Each round computes a shortest path for every undecided demand on the
/// edges not yet taken. Demands without a path within the hop bound are
/// rejected; the shortest of the rest (lowest index on ties) is served and its
/// edges removed. Rounds repeat until every demand is decided.
pub fn plba(instance: &MerrInstance) -> Result<RoutingOutcome, AlgorithmError> {
    let start = Instant::now();
    instance.validate()?;
    let g = &instance.graph;
    let mut routes = vec![None; instance.demands.len()];
    shortest_first(instance, &mut EdgeMask::all(g), &mut routes);
    let decisions = routes
        .into_iter()
        .map(|r| match r.expect("every demand is decided") {
            Some(r) => Decision::Satisfied { path: r.labels(g) },
            None => Decision::Rejected,
        })
        .collect();
    let stats = OutcomeStats {
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        ..OutcomeStats::default()
    };
    Ok(RoutingOutcome::new(decisions, stats))
}

/// Greedy rounds over the demands still `None` in `routes`, taking edges out
/// of `available`. Afterwards every entry is `Some(route)` or `Some(None)`.
pub(crate) fn shortest_first(instance: &MerrInstance, available: &mut EdgeMask, routes: &mut [Option<Option<Route>>]) {
    let g = &instance.graph;
    let ends = instance.endpoints();
    let l_max = instance.l_max as usize;
    loop {
        let mut best: Option<(usize, Route)> = None;
        for (i, &(s, d)) in ends.iter().enumerate() {
            if routes[i].is_some() {
                continue;
            }
            match shortest_path_in(g, available, s, d).filter(|r| r.hops() <= l_max) {
                None => routes[i] = Some(None),
                Some(r) => {
                    if best.as_ref().is_none_or(|(_, b)| r.hops() < b.hops()) {
                        best = Some((i, r));
                    }
                }
            }
        }
        let Some((i, r)) = best else { break };
        available.remove_all(&r.edges);
        routes[i] = Some(Some(r));
    }
}
