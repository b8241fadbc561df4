//! Routing algorithms and the routing-rate metric.
//!
//! * [`solve_ilp_exact`]: branch-and-bound on the full integer program.
//! * [`hbra`]: solve the relaxation, round every flow of at least one half up.
//! * [`rra`]: solve the relaxation, round each flow up with probability equal
//!   to its value, once.
//! * [`plba`]: repeatedly serve the demand with the shortest remaining path.
//! * [`brute_force_oracle`]: exhaustive search over bounded simple paths, for
//!   small instances only.

mod exact;
mod greedy;
mod oracle;
mod rounding;

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formulation::FormulationError;
use crate::lp::LpError;
use crate::topology::{MerrInstance, NodeId, TopologyError};

pub use exact::{solve_ilp_exact, solve_ilp_exact_with, solve_model_exact};
pub use greedy::plba;
pub use oracle::{brute_force_oracle, brute_force_routing, OracleError, OracleLimits};
pub use rounding::{hbra, rra, RelaxedSolution, RoundingInfo, RoundingMethod, HALF_THRESHOLD};

/// What happened to one demand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Decision {
    Satisfied { path: Vec<NodeId> },
    Rejected,
}

impl Decision {
    pub fn path(&self) -> Option<&[NodeId]> {
        match self {
            Decision::Satisfied { path } => Some(path),
            Decision::Rejected => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutcomeStats {
    pub met_count: usize,
    pub cycles_stripped: usize,
    pub runtime_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounding: Option<RoundingInfo>,
}

/// Per-demand decisions (in demand order) plus run statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingOutcome {
    pub decisions: Vec<Decision>,
    pub stats: OutcomeStats,
}

impl RoutingOutcome {
    /// Sets `stats.met_count` from `decisions`.
    pub fn new(decisions: Vec<Decision>, mut stats: OutcomeStats) -> Self {
        stats.met_count = decisions.iter().filter(|d| d.path().is_some()).count();
        Self { decisions, stats }
    }

    pub fn met_count(&self) -> usize {
        self.stats.met_count
    }

    pub fn path_labels(&self, demand: usize) -> Option<Vec<&str>> {
        self.decisions
            .get(demand)?
            .path()
            .map(|p| p.iter().map(NodeId::as_str).collect())
    }

    /// Checks every structural promise of an outcome against `instance`.
    pub fn check(&self, instance: &MerrInstance) -> Result<(), OutcomeViolation> {
        use OutcomeViolation as V;
        if self.decisions.len() != instance.demands.len() {
            return Err(V::DecisionCount {
                expected: instance.demands.len(),
                got: self.decisions.len(),
            });
        }
        let g = &instance.graph;
        let mut owner: Vec<Option<usize>> = vec![None; g.edge_count()];
        let mut met = 0;
        for (i, (decision, demand)) in self.decisions.iter().zip(&instance.demands).enumerate() {
            let Some(path) = decision.path() else { continue };
            met += 1;
            if path.first() != Some(&demand.source) || path.last() != Some(&demand.dest) {
                return Err(V::Endpoints { demand: i });
            }
            let hops = path.len() - 1;
            if hops > instance.l_max as usize {
                return Err(V::TooLong { demand: i, hops });
            }
            let mut idx = Vec::with_capacity(path.len());
            for n in path {
                idx.push(g.index_of(n.as_str()).ok_or(V::UnknownNode { demand: i })?);
            }
            let mut seen = idx.clone();
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(V::NotSimple { demand: i });
            }
            for w in idx.windows(2) {
                let e = g.edge_between(w[0], w[1]).ok_or(V::MissingEdge { demand: i })?;
                if let Some(other) = owner[e].replace(i) {
                    return Err(V::SharedEdge { demand: i, other });
                }
            }
        }
        if met != self.stats.met_count {
            return Err(V::MetCount {
                counted: met,
                reported: self.stats.met_count,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OutcomeViolation {
    #[error("{got} decisions for {expected} demands")]
    DecisionCount { expected: usize, got: usize },
    #[error("demand {demand}: path does not run from its source to its destination")]
    Endpoints { demand: usize },
    #[error("demand {demand}: path has {hops} hops, above the bound")]
    TooLong { demand: usize, hops: usize },
    #[error("demand {demand}: path names a node outside the graph")]
    UnknownNode { demand: usize },
    #[error("demand {demand}: path repeats a node")]
    NotSimple { demand: usize },
    #[error("demand {demand}: consecutive path nodes are not adjacent")]
    MissingEdge { demand: usize },
    #[error("demand {demand} shares an edge with demand {other}")]
    SharedEdge { demand: usize, other: usize },
    #[error("met_count says {reported}, decisions say {counted}")]
    MetCount { counted: usize, reported: usize },
}

#[derive(Debug, Error)]
pub enum AlgorithmError {
    #[error(transparent)]
    Instance(#[from] TopologyError),
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("relaxation is not solvable to optimality: {0}")]
    Relaxation(String),
    #[error("branch-and-bound node limit {limit} reached (best bound {best_bound}, gap {gap})")]
    NodeLimit {
        limit: usize,
        best_bound: f64,
        gap: f64,
        incumbent: Option<Box<RoutingOutcome>>,
    },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// The selectable solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ilp,
    Hbra,
    Rra,
    Plba,
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Self::Ilp, Self::Hbra, Self::Rra, Self::Plba, Self::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ilp => "ilp",
            Self::Hbra => "hbra",
            Self::Rra => "rra",
            Self::Plba => "plba",
            Self::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected ilp, hbra, rra, plba or oracle)"))
    }
}

/// Satisfied demands over total demands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateReport {
    pub met: usize,
    pub total: usize,
    pub rate: Ratio<usize>,
}

impl RateReport {
    pub fn as_f64(&self) -> f64 {
        *self.rate.numer() as f64 / *self.rate.denom() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RateError {
    #[error("rate undefined for empty demand set")]
    NoDemands,
    #[error("{met} met demands exceed the total of {total}")]
    MetExceedsTotal { met: usize, total: usize },
}

pub fn entangled_routing_rate(outcome: &RoutingOutcome, total: usize) -> Result<RateReport, RateError> {
    rate_of(outcome.met_count(), total)
}

/// [`entangled_routing_rate`] from raw counts.
pub fn rate_of(met: usize, total: usize) -> Result<RateReport, RateError> {
    if total == 0 {
        return Err(RateError::NoDemands);
    }
    if met > total {
        return Err(RateError::MetExceedsTotal { met, total });
    }
    Ok(RateReport {
        met,
        total,
        rate: Ratio::new(met, total),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::NetworkGraph;

    fn labels(p: &[&str]) -> Vec<NodeId> {
        p.iter().map(|s| NodeId::new(*s).unwrap()).collect()
    }

    fn square() -> MerrInstance {
        let g = NetworkGraph::new(
            ["a", "b", "c", "d"],
            &[("a", "b", None), ("b", "c", None), ("c", "d", None), ("d", "a", None)],
        )
        .unwrap();
        MerrInstance::new(g, &[("a", "c"), ("b", "d")], 2).unwrap()
    }

    #[test]
    fn rates() {
        let r = rate_of(2, 2).unwrap();
        assert_eq!(r.as_f64(), 1.0);
        assert_eq!(rate_of(1, 2).unwrap().as_f64(), 0.5);
        assert_eq!(rate_of(0, 5).unwrap().as_f64(), 0.0);
        let r = rate_of(13, 20).unwrap();
        assert_eq!(r.rate, Ratio::new(13, 20));
        assert_eq!(r.as_f64(), 0.65);
        assert_eq!(rate_of(0, 0), Err(RateError::NoDemands));
        assert!(rate_of(3, 2).is_err());
    }

    #[test]
    fn checker_rejects_shared_edges() {
        let inst = square();
        let out = RoutingOutcome::new(
            vec![
                Decision::Satisfied {
                    path: labels(&["a", "b", "c"]),
                },
                Decision::Satisfied {
                    path: labels(&["b", "a", "d"]),
                },
            ],
            OutcomeStats::default(),
        );
        // a-b is used twice.
        assert_eq!(
            out.check(&inst),
            Err(OutcomeViolation::SharedEdge { demand: 1, other: 0 })
        );
        let out = RoutingOutcome::new(
            vec![
                Decision::Satisfied {
                    path: labels(&["a", "b", "c"]),
                },
                Decision::Rejected,
            ],
            OutcomeStats::default(),
        );
        assert_eq!(out.check(&inst), Ok(()));
        assert_eq!(out.met_count(), 1);
    }

    #[test]
    fn checker_catches_each_violation() {
        let inst = square();
        let one = |p: &[&str]| {
            RoutingOutcome::new(
                vec![Decision::Satisfied { path: labels(p) }, Decision::Rejected],
                OutcomeStats::default(),
            )
        };
        assert_eq!(
            one(&["b", "c"]).check(&inst),
            Err(OutcomeViolation::Endpoints { demand: 0 })
        );
        assert_eq!(
            one(&["a", "c"]).check(&inst),
            Err(OutcomeViolation::MissingEdge { demand: 0 })
        );
        assert_eq!(
            one(&["a", "b", "a", "b", "c"]).check(&inst),
            Err(OutcomeViolation::TooLong { demand: 0, hops: 4 })
        );
        assert_eq!(
            one(&["a", "b", "a", "c"]).check(&inst),
            Err(OutcomeViolation::TooLong { demand: 0, hops: 3 })
        );
        let mut loose = inst.clone();
        loose.l_max = 8;
        assert_eq!(
            one(&["a", "b", "a", "d", "c"]).check(&loose),
            Err(OutcomeViolation::NotSimple { demand: 0 })
        );
        let mut lying = one(&["a", "b", "c"]);
        lying.stats.met_count = 2;
        assert!(matches!(lying.check(&inst), Err(OutcomeViolation::MetCount { .. })));
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("simplex".parse::<Algorithm>().is_err());
    }

    #[test]
    fn decision_json_shape() {
        let d = Decision::Satisfied {
            path: labels(&["a", "b"]),
        };
        assert_eq!(
            serde_json::to_string(&d).unwrap(),
            r#"{"status":"satisfied","path":["a","b"]}"#
        );
        assert_eq!(
            serde_json::to_string(&Decision::Rejected).unwrap(),
            r#"{"status":"rejected"}"#
        );
    }
}
