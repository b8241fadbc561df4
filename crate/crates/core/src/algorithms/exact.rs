use std::time::Instant;

use super::greedy::shortest_first;
use super::{plba, AlgorithmError, RoutingOutcome};
use crate::formulation::{build_merr_model, decode_paths, Arc, MerrModel};
use crate::lp::{solve_mip_with, LinearProgram, MipError, MipSolution, MipStatus, DEFAULT_NODE_LIMIT, TOL_FEAS};
use crate::topology::{bfs_hops, shortest_path_in, EdgeMask, MerrInstance, Route};

/// Optimal routing via branch-and-bound on the integer program.
pub fn solve_ilp_exact(instance: &MerrInstance) -> Result<RoutingOutcome, AlgorithmError> {
    solve_ilp_exact_with(instance, DEFAULT_NODE_LIMIT)
}

pub fn solve_ilp_exact_with(instance: &MerrInstance, node_limit: usize) -> Result<RoutingOutcome, AlgorithmError> {
    let start = Instant::now();
    let model = build_merr_model(instance)?;
    let mut out = solve_model_exact(&model, node_limit)?;
    out.stats.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(out)
}

/// Solves an already built (possibly modified) model to optimality.
///
/// The greedy routing seeds the search as the first incumbent when it is
/// feasible for `model`, and [`guided_routing`] proposes incumbents from the
/// node relaxations. `stats.lp_objective` holds the optimal integer
/// objective.
pub fn solve_model_exact(model: &MerrModel<'_>, node_limit: usize) -> Result<RoutingOutcome, AlgorithmError> {
    let start = Instant::now();
    let finish = |sol: &MipSolution| -> Result<RoutingOutcome, AlgorithmError> {
        let mut out = decode_paths(model, &sol.x)?;
        out.stats.lp_objective = Some(sol.objective);
        out.stats.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        Ok(out)
    };
    let greedy = model.encode(&plba(model.instance)?)?;
    // Pinned bounds can exclude the greedy routing.
    let seed = model.lp.is_feasible(&greedy, TOL_FEAS).then_some(greedy.as_slice());
    let guided = |x: &[f64]| Some(model.encode_routes(&guided_routing(model, x)));
    let lp = without_detours(model);
    match solve_mip_with(&lp, &model.integer_vars(), node_limit, seed, Some(&guided)) {
        Ok(sol) if sol.status == MipStatus::Optimal => finish(&sol),
        Ok(_) => Err(AlgorithmError::Relaxation("integer program is infeasible".into())),
        Err(MipError::NodeLimit {
            limit,
            incumbent,
            best_bound,
            gap,
        }) => Err(AlgorithmError::NodeLimit {
            limit,
            best_bound,
            gap,
            incumbent: incumbent.map(|s| finish(&s)).transpose()?.map(Box::new),
        }),
        Err(MipError::Lp(e)) => Err(e.into()),
        Err(e) => Err(AlgorithmError::Relaxation(e.to_string())),
    }
}

/// Copy of the model's program with every arc that no path within the hop
/// bound can use fixed to zero: arc u→v of demand i survives only if
/// dist(s_i, u) + 1 + dist(v, d_i) <= l_max. Stripping cycles from an optimal
/// point leaves such a path per served demand, so the optimum is unchanged.
fn without_detours(model: &MerrModel<'_>) -> LinearProgram {
    let g = model.graph();
    let l_max = model.instance.l_max as usize;
    let all = EdgeMask::all(g);
    let mut lp = model.lp.clone();
    for (i, &(s, d)) in model.endpoints.iter().enumerate() {
        let from_s = bfs_hops(g, &all, s);
        let to_d = bfs_hops(g, &all, d);
        for e in 0..g.edge_count() {
            for forward in [true, false] {
                let arc = Arc { edge: e, forward };
                let usable = match (from_s[arc.tail(g)], to_d[arc.head(g)]) {
                    (Some(a), Some(b)) => a + 1 + b <= l_max,
                    _ => false,
                };
                let bounds = &mut lp.bounds[model.vars.column(i, arc)];
                if !usable && bounds.0 == 0.0 {
                    bounds.1 = 0.0;
                }
            }
        }
    }
    lp
}

/// Edge-disjoint routing read off a fractional flow.
///
/// Demands go in order of decreasing source outflow, each taking a shortest
/// path over the free edges its own flow touches. Demands left without a path
/// are then offered the remaining edges shortest-first.
pub(crate) fn guided_routing(model: &MerrModel<'_>, x: &[f64]) -> Vec<Option<Route>> {
    let inst = model.instance;
    let g = model.graph();
    let l_max = inst.l_max as usize;
    let mut order: Vec<(usize, f64)> = (0..model.endpoints.len())
        .map(|i| (i, model.source_outflow(i, x)))
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut available = EdgeMask::all(g);
    let mut routes = vec![None; order.len()];
    for &(i, out) in &order {
        if out <= TOL_FEAS {
            continue;
        }
        let mut mask = EdgeMask::none(g);
        for e in 0..g.edge_count() {
            let flow = |forward| x[model.vars.column(i, Arc { edge: e, forward })];
            if available.contains(e) && flow(true) + flow(false) > TOL_FEAS {
                mask.insert(e);
            }
        }
        let (s, d) = model.endpoints[i];
        if let Some(r) = shortest_path_in(g, &mask, s, d).filter(|r| r.hops() <= l_max) {
            available.remove_all(&r.edges);
            routes[i] = Some(Some(r));
        }
    }
    shortest_first(inst, &mut available, &mut routes);
    routes.into_iter().map(Option::flatten).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::NetworkGraph;

    #[test]
    fn disconnected_demand_is_rejected() {
        let g = NetworkGraph::new(["a", "b", "c", "d"], &[("a", "b", None), ("c", "d", None)]).unwrap();
        let inst = MerrInstance::new(g, &[("a", "b"), ("a", "d")], 4).unwrap();
        let out = solve_ilp_exact(&inst).unwrap();
        assert_eq!(out.met_count(), 1);
        assert_eq!(out.path_labels(0).unwrap(), ["a", "b"]);
        assert!(out.path_labels(1).is_none());
        out.check(&inst).unwrap();
    }

    #[test]
    fn hop_bound_binds() {
        let g = NetworkGraph::new(["a", "b", "c"], &[("a", "b", None), ("b", "c", None)]).unwrap();
        let inst = MerrInstance::new(g.clone(), &[("a", "c")], 1).unwrap();
        assert_eq!(solve_ilp_exact(&inst).unwrap().met_count(), 0);
        let inst = MerrInstance::new(g, &[("a", "c")], 2).unwrap();
        assert_eq!(solve_ilp_exact(&inst).unwrap().met_count(), 1);
    }

    #[test]
    fn detour_arcs_are_fixed_to_zero() {
        // a - b - c plus a long way round a - p - q - c.
        let g = NetworkGraph::new(
            ["a", "b", "c", "p", "q"],
            &[
                ("a", "b", None),
                ("b", "c", None),
                ("a", "p", None),
                ("p", "q", None),
                ("q", "c", None),
            ],
        )
        .unwrap();
        let inst = MerrInstance::new(g, &[("a", "c")], 2).unwrap();
        let model = build_merr_model(&inst).unwrap();
        let lp = without_detours(&model);
        let open: Vec<String> = (0..model.vars.len())
            .filter(|&j| lp.bounds[j].1 > 0.0)
            .map(|j| model.column_name(j))
            .collect();
        assert_eq!(open, ["f_0_a_b", "f_0_b_c"]);
        assert_eq!(solve_model_exact(&model, 100).unwrap().met_count(), 1);
    }

    #[test]
    fn guided_routing_follows_the_flow() {
        let g = NetworkGraph::new(
            ["a", "b", "c", "p", "q"],
            &[
                ("a", "b", None),
                ("b", "c", None),
                ("a", "p", None),
                ("p", "q", None),
                ("q", "c", None),
            ],
        )
        .unwrap();
        let inst = MerrInstance::new(g, &[("a", "c")], 3).unwrap();
        let model = build_merr_model(&inst).unwrap();
        let mut x = vec![0.0; model.vars.len()];
        for (t, h) in [("a", "p"), ("p", "q"), ("q", "c")] {
            let e = model
                .graph()
                .edge_between(model.graph().index_of(t).unwrap(), model.graph().index_of(h).unwrap())
                .unwrap();
            let forward = model.graph().node(model.graph().endpoints(e).0).as_str() == t;
            x[model.vars.column(0, Arc { edge: e, forward })] = 0.6;
        }
        let routes = guided_routing(&model, &x);
        let r = routes[0].as_ref().unwrap();
        assert_eq!(
            r.labels(model.graph()),
            ["a", "p", "q", "c"].map(|s| crate::topology::NodeId::new(s).unwrap())
        );
        // No flow at all falls back to the greedy shortest path.
        let routes = guided_routing(&model, &vec![0.0; model.vars.len()]);
        assert_eq!(routes[0].as_ref().unwrap().hops(), 2);
    }
}
