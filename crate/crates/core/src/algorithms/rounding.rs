use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AlgorithmError, Decision, OutcomeStats, RoutingOutcome};
use crate::formulation::{build_merr_model, relax, Arc, MerrModel};
use crate::lp::{solve_lp, LpStatus};
use crate::rng::rng_from_seed;
use crate::topology::{shortest_path_in, EdgeMask, MerrInstance, Route};

/// Half-based rounding sends a flow to 1 when it is at least this. The slack
/// below 0.5 absorbs simplex noise on values that are exactly one half.
pub const HALF_THRESHOLD: f64 = 0.5 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundingMethod {
    Half,
    Randomized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingInfo {
    pub method: RoundingMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Demands whose relaxed flow was already an integral, short enough path.
    pub settled_by_lp: usize,
    /// Objective of the rounded vector before path extraction: one per
    /// settled demand plus the rounded source out-arcs of the others.
    pub rounded_objective: f64,
}

/// An optimal solution of the relaxation, ready to be rounded any number of
/// times.
#[derive(Debug, Clone)]
pub struct RelaxedSolution<'a> {
    model: MerrModel<'a>,
    x: Vec<f64>,
    objective: f64,
    settled: Vec<Option<Route>>,
    lp_ms: f64,
}

impl<'a> RelaxedSolution<'a> {
    pub fn solve(instance: &'a MerrInstance) -> Result<Self, AlgorithmError> {
        let start = Instant::now();
        let model = build_merr_model(instance)?;
        let sol = solve_lp(&relax(&model))?;
        if sol.status != LpStatus::Optimal {
            return Err(AlgorithmError::Relaxation(format!("{:?}", sol.status)));
        }
        let l_max = instance.l_max as usize;
        let mut settled = Vec::with_capacity(model.endpoints.len());
        for i in 0..model.endpoints.len() {
            let route = if model.demand_is_integral(i, &sol.x) {
                model.decode_demand(i, &sol.x)?.route.filter(|r| r.hops() <= l_max)
            } else {
                None
            };
            settled.push(route);
        }
        Ok(Self {
            model,
            x: sol.x,
            objective: sol.objective,
            settled,
            lp_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    }

    pub fn model(&self) -> &MerrModel<'a> {
        &self.model
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn settled_count(&self) -> usize {
        self.settled.iter().filter(|r| r.is_some()).count()
    }

    /// Every column of an unsettled demand goes to 1 iff its value is at
    /// least one half.
    pub fn round_half(&self) -> RoutingOutcome {
        let start = Instant::now();
        let rounded: Vec<bool> = self.x.iter().map(|&v| v >= HALF_THRESHOLD).collect();
        self.extract(&rounded, RoundingMethod::Half, None, start)
    }

    /// Every column of an unsettled demand goes to 1 with probability equal
    /// to its value. One uniform draw per column of the unsettled demands, in
    /// column order.
    pub fn round_randomized(&self, seed: u64) -> RoutingOutcome {
        let start = Instant::now();
        let rounded = self.randomized_vector(seed);
        self.extract(&rounded, RoundingMethod::Randomized, Some(seed), start)
    }

    /// The pre-extraction objective of [`Self::round_randomized`] for `seed`.
    pub fn randomized_objective(&self, seed: u64) -> f64 {
        self.rounded_objective(&self.randomized_vector(seed))
    }

    fn randomized_vector(&self, seed: u64) -> Vec<bool> {
        let mut rng = rng_from_seed(seed);
        let mut rounded = vec![false; self.x.len()];
        for (i, route) in self.settled.iter().enumerate() {
            if route.is_some() {
                continue;
            }
            for c in self.model.vars.demand_columns(i) {
                rounded[c] = rng.gen::<f64>() < self.x[c];
            }
        }
        rounded
    }

    fn rounded_objective(&self, rounded: &[bool]) -> f64 {
        let obj = &self.model.lp.objective;
        let mut total = 0.0;
        for (i, route) in self.settled.iter().enumerate() {
            total += match route {
                Some(_) => 1.0,
                None => self
                    .model
                    .vars
                    .demand_columns(i)
                    .filter(|&c| rounded[c])
                    .map(|c| obj[c])
                    .sum(),
            };
        }
        total
    }

    /// Settled demands keep their relaxed paths. The others, in demand order,
    /// take a shortest path over the edges they rounded to 1 (either
    /// direction) that no earlier demand holds, if one exists within the hop
    /// bound.
    fn extract(&self, rounded: &[bool], method: RoundingMethod, seed: Option<u64>, start: Instant) -> RoutingOutcome {
        let m = &self.model;
        let g = m.graph();
        let l_max = m.instance.l_max as usize;
        let mut available = EdgeMask::all(g);
        for r in self.settled.iter().flatten() {
            available.remove_all(&r.edges);
        }
        let mut decisions = Vec::with_capacity(self.settled.len());
        for (i, settled) in self.settled.iter().enumerate() {
            if let Some(r) = settled {
                decisions.push(Decision::Satisfied { path: r.labels(g) });
                continue;
            }
            let mut mask = EdgeMask::none(g);
            for e in 0..g.edge_count() {
                let on = |forward| rounded[m.vars.column(i, Arc { edge: e, forward })];
                if available.contains(e) && (on(true) || on(false)) {
                    mask.insert(e);
                }
            }
            let (s, d) = m.endpoints[i];
            match shortest_path_in(g, &mask, s, d).filter(|r| r.hops() <= l_max) {
                Some(r) => {
                    available.remove_all(&r.edges);
                    decisions.push(Decision::Satisfied { path: r.labels(g) });
                }
                None => decisions.push(Decision::Rejected),
            }
        }
        let stats = OutcomeStats {
            runtime_ms: self.lp_ms + start.elapsed().as_secs_f64() * 1e3,
            lp_objective: Some(self.objective),
            rounding: Some(RoundingInfo {
                method,
                seed,
                settled_by_lp: self.settled_count(),
                rounded_objective: self.rounded_objective(rounded),
            }),
            ..OutcomeStats::default()
        };
        RoutingOutcome::new(decisions, stats)
    }
}

/// Half-based rounding of the relaxation.
pub fn hbra(instance: &MerrInstance) -> Result<RoutingOutcome, AlgorithmError> {
    Ok(RelaxedSolution::solve(instance)?.round_half())
}

/// Single-pass randomized rounding of the relaxation.
pub fn rra(instance: &MerrInstance, seed: u64) -> Result<RoutingOutcome, AlgorithmError> {
    Ok(RelaxedSolution::solve(instance)?.round_randomized(seed))
}
