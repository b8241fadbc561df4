//! Flow formulation of the routing problem.
//!
//! Every undirected edge `{u, v}` (stored with `u < v`) becomes two arcs,
//! `u→v` and `v→u`, and every demand gets its own 0/1 flow variable on every
//! arc. Column `i·2|E| + 2e` is demand `i` on `u→v` of edge `e`, column
//! `i·2|E| + 2e + 1` is `v→u`. Rows, in order:
//!
//! 1. capacity, one per edge: both arcs over all demands sum to at most 1;
//! 2. conservation, one per demand per node other than that demand's own
//!    source and destination: inflow equals outflow;
//! 3. length, one per demand: all arcs the demand uses sum to at most `l_max`;
//! 4. source outflow, one per demand: at most 1.
//!
//! Arcs entering a demand's source have upper bound 0 instead of a row. The
//! objective is the total source outflow.
//!
//! The length row counts every arc a demand uses, cycles included. Decoding
//! strips those cycles, so a decoded path can be shorter than the length the
//! model charged for it.

use std::ops::Range;

use thiserror::Error;

use crate::algorithms::{Decision, OutcomeStats, RoutingOutcome};
use crate::lp::{LinearProgram, Relation, TOL_INT};
use crate::topology::{MerrInstance, NetworkGraph, Route, TopologyError};

/// One direction of an undirected edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arc {
    pub edge: usize,
    /// `true` for `u→v` with `u < v`.
    pub forward: bool,
}

impl Arc {
    pub fn tail(self, g: &NetworkGraph) -> usize {
        let (u, v) = g.endpoints(self.edge);
        if self.forward {
            u
        } else {
            v
        }
    }

    pub fn head(self, g: &NetworkGraph) -> usize {
        let (u, v) = g.endpoints(self.edge);
        if self.forward {
            v
        } else {
            u
        }
    }

    fn offset(self) -> usize {
        2 * self.edge + usize::from(!self.forward)
    }
}

/// Bijection between `(demand, arc)` and column index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarIndex {
    demands: usize,
    edges: usize,
}

impl VarIndex {
    pub fn new(demands: usize, edges: usize) -> Self {
        Self { demands, edges }
    }

    pub fn len(&self) -> usize {
        2 * self.edges * self.demands
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, demand: usize, arc: Arc) -> usize {
        debug_assert!(demand < self.demands && arc.edge < self.edges);
        demand * 2 * self.edges + arc.offset()
    }

    pub fn decode(&self, column: usize) -> (usize, Arc) {
        let per = 2 * self.edges;
        let (demand, off) = (column / per, column % per);
        (
            demand,
            Arc {
                edge: off / 2,
                forward: off % 2 == 0,
            },
        )
    }

    /// Columns of one demand.
    pub fn demand_columns(&self, demand: usize) -> Range<usize> {
        let per = 2 * self.edges;
        demand * per..(demand + 1) * per
    }
}

/// Row ranges of each constraint family inside [`MerrModel::lp`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowLayout {
    pub capacity: Range<usize>,
    pub conservation: Range<usize>,
    pub length: Range<usize>,
    pub source_outflow: Range<usize>,
}

/// The integer program for one instance.
#[derive(Debug, Clone)]
pub struct MerrModel<'a> {
    pub instance: &'a MerrInstance,
    pub lp: LinearProgram,
    pub vars: VarIndex,
    pub rows: RowLayout,
    /// `(source, dest)` node indices per demand.
    pub endpoints: Vec<(usize, usize)>,
}

#[derive(Debug, Error)]
pub enum FormulationError {
    #[error(transparent)]
    Instance(#[from] TopologyError),
    #[error("solution vector has {got} entries, model has {expected} columns")]
    Length { expected: usize, got: usize },
    #[error("demand {demand}: column {column} has non-integral value {value}")]
    NotIntegral { demand: usize, column: usize, value: f64 },
    #[error("demand {demand}: flow walk stuck at node `{node}` without an exit arc")]
    Stuck { demand: usize, node: String },
    #[error("demand {demand}: path {path:?} is not a walk in the graph")]
    NotAPath { demand: usize, path: Vec<String> },
}

pub fn build_merr_model(instance: &MerrInstance) -> Result<MerrModel<'_>, FormulationError> {
    instance.validate()?;
    let g = &instance.graph;
    let endpoints = instance.endpoints();
    let k = instance.demands.len();
    let m = g.edge_count();
    let vars = VarIndex::new(k, m);
    let arcs = |e: usize| {
        [
            Arc { edge: e, forward: true },
            Arc {
                edge: e,
                forward: false,
            },
        ]
    };

    let mut objective = vec![0.0; vars.len()];
    let mut bounds = vec![(0.0, 1.0); vars.len()];
    for (i, &(s, _)) in endpoints.iter().enumerate() {
        for &(_, e) in g.neighbors(s) {
            for arc in arcs(e) {
                let col = vars.column(i, arc);
                if arc.tail(g) == s {
                    objective[col] = 1.0;
                } else {
                    bounds[col] = (0.0, 0.0);
                }
            }
        }
    }
    let mut lp = LinearProgram::new(objective, bounds);

    let start = lp.constraints.len();
    for e in 0..m {
        let terms = (0..k)
            .flat_map(|i| arcs(e).map(move |a| (vars.column(i, a), 1.0)))
            .collect();
        lp.add_constraint(terms, Relation::Le, 1.0);
    }
    let capacity = start..lp.constraints.len();

    let start = lp.constraints.len();
    for (i, &(s, d)) in endpoints.iter().enumerate() {
        for node in (0..g.node_count()).filter(|&n| n != s && n != d) {
            let mut terms = Vec::with_capacity(2 * g.degree(node));
            for &(_, e) in g.neighbors(node) {
                for arc in arcs(e) {
                    let sign = if arc.tail(g) == node { 1.0 } else { -1.0 };
                    terms.push((vars.column(i, arc), sign));
                }
            }
            lp.add_constraint(terms, Relation::Eq, 0.0);
        }
    }
    let conservation = start..lp.constraints.len();

    let start = lp.constraints.len();
    for i in 0..k {
        let terms = vars.demand_columns(i).map(|c| (c, 1.0)).collect();
        lp.add_constraint(terms, Relation::Le, f64::from(instance.l_max));
    }
    let length = start..lp.constraints.len();

    let start = lp.constraints.len();
    for (i, &(s, _)) in endpoints.iter().enumerate() {
        let terms = g
            .neighbors(s)
            .iter()
            .flat_map(|&(_, e)| arcs(e))
            .filter(|a| a.tail(g) == s)
            .map(|a| (vars.column(i, a), 1.0))
            .collect();
        lp.add_constraint(terms, Relation::Le, 1.0);
    }
    let source_outflow = start..lp.constraints.len();

    Ok(MerrModel {
        instance,
        lp,
        vars,
        rows: RowLayout {
            capacity,
            conservation,
            length,
            source_outflow,
        },
        endpoints,
    })
}

/// The linear relaxation: same rows and objective, every column continuous
/// in its `[0, 1]` box. Columns pinned to 0 (arcs into a source) stay pinned.
pub fn relax(model: &MerrModel<'_>) -> LinearProgram {
    model.lp.clone()
}

impl MerrModel<'_> {
    /// All columns are binary.
    pub fn integer_vars(&self) -> Vec<usize> {
        (0..self.vars.len()).collect()
    }

    pub fn graph(&self) -> &NetworkGraph {
        &self.instance.graph
    }

    /// Descriptive column name `f_<demand>_<tail>_<head>`.
    pub fn column_name(&self, column: usize) -> String {
        let (i, arc) = self.vars.decode(column);
        let g = self.graph();
        format!("f_{i}_{}_{}", g.node(arc.tail(g)), g.node(arc.head(g)))
    }

    /// Model in the plain-text LP format with descriptive column names.
    pub fn to_lp_format(&self) -> String {
        self.lp.to_lp_format_with(|j| self.column_name(j))
    }

    /// Forces `demand` onto `path` (node labels from source to destination):
    /// its arcs along the path are fixed to 1 and all its other arcs to 0.
    pub fn pin_path<S: AsRef<str>>(&mut self, demand: usize, path: &[S]) -> Result<(), FormulationError> {
        let g = &self.instance.graph;
        let not_a_path = || FormulationError::NotAPath {
            demand,
            path: path.iter().map(|s| s.as_ref().to_string()).collect(),
        };
        let nodes: Vec<usize> = path
            .iter()
            .map(|s| g.index_of(s.as_ref()))
            .collect::<Option<_>>()
            .ok_or_else(not_a_path)?;
        let mut on_path = vec![false; self.vars.len()];
        for w in nodes.windows(2) {
            let e = g.edge_between(w[0], w[1]).ok_or_else(not_a_path)?;
            let forward = g.endpoints(e).0 == w[0];
            on_path[self.vars.column(demand, Arc { edge: e, forward })] = true;
        }
        for col in self.vars.demand_columns(demand) {
            let v = if on_path[col] { 1.0 } else { 0.0 };
            self.lp.bounds[col] = (v, v);
        }
        Ok(())
    }

    /// 0/1 vector routing each satisfied demand of `outcome` along its path.
    /// The result is feasible whenever the outcome passes
    /// [`RoutingOutcome::check`].
    pub fn encode(&self, outcome: &RoutingOutcome) -> Result<Vec<f64>, FormulationError> {
        let g = self.graph();
        let mut x = vec![0.0; self.vars.len()];
        for (i, decision) in outcome.decisions.iter().enumerate() {
            let Some(path) = decision.path() else { continue };
            let not_a_path = || FormulationError::NotAPath {
                demand: i,
                path: path.iter().map(|n| n.to_string()).collect(),
            };
            if i >= self.endpoints.len() {
                return Err(not_a_path());
            }
            let nodes: Vec<usize> = path
                .iter()
                .map(|n| g.index_of(n.as_str()))
                .collect::<Option<_>>()
                .ok_or_else(not_a_path)?;
            for w in nodes.windows(2) {
                let e = g.edge_between(w[0], w[1]).ok_or_else(not_a_path)?;
                let forward = g.endpoints(e).0 == w[0];
                x[self.vars.column(i, Arc { edge: e, forward })] = 1.0;
            }
        }
        Ok(x)
    }

    /// 0/1 point routing demand `i` along `routes[i]`; `None` sends no flow.
    pub fn encode_routes(&self, routes: &[Option<Route>]) -> Vec<f64> {
        let g = self.graph();
        let mut x = vec![0.0; self.vars.len()];
        for (i, r) in routes.iter().enumerate() {
            let Some(r) = r else { continue };
            for (w, &e) in r.nodes.windows(2).zip(&r.edges) {
                let forward = g.endpoints(e).0 == w[0];
                x[self.vars.column(i, Arc { edge: e, forward })] = 1.0;
            }
        }
        x
    }

    /// Total flow of `demand` out of its source in `x`.
    pub fn source_outflow(&self, demand: usize, x: &[f64]) -> f64 {
        let row = &self.lp.constraints[self.rows.source_outflow.start + demand];
        row.activity(x)
    }

    /// Whether every column of `demand` is within `TOL_INT` of 0 or 1.
    pub fn demand_is_integral(&self, demand: usize, x: &[f64]) -> bool {
        self.vars
            .demand_columns(demand)
            .all(|c| (x[c] - x[c].round()).abs() <= TOL_INT)
    }

    /// Extracts the simple source→destination path of one demand from an
    /// integral flow, stripping cycles.
    pub fn decode_demand(&self, demand: usize, x: &[f64]) -> Result<DemandFlow, FormulationError> {
        if x.len() != self.vars.len() {
            return Err(FormulationError::Length {
                expected: self.vars.len(),
                got: x.len(),
            });
        }
        let g = self.graph();
        let cols = self.vars.demand_columns(demand);
        for c in cols.clone() {
            if (x[c] - x[c].round()).abs() > TOL_INT {
                return Err(FormulationError::NotIntegral {
                    demand,
                    column: c,
                    value: x[c],
                });
            }
        }
        // Arcs carrying flow, grouped by tail, in column order.
        let mut out: Vec<Vec<Arc>> = vec![Vec::new(); g.node_count()];
        let mut live = 0usize;
        for c in cols {
            if x[c] > 0.5 {
                let (_, arc) = self.vars.decode(c);
                out[arc.tail(g)].push(arc);
                live += 1;
            }
        }
        let mut walker = Walker::new(g, out);
        let (s, d) = self.endpoints[demand];
        let route = if self.source_outflow(demand, x) > 0.5 {
            Some(walker.walk(s, Some(d)).map_err(|node| FormulationError::Stuck {
                demand,
                node: g.node(node).to_string(),
            })?)
        } else {
            None
        };
        let mut cycles = walker.cycles;
        let path_arcs = route.as_ref().map_or(0, Route::hops);
        // Whatever remains is a circulation; count its cycles.
        while let Some(start) = walker.next_tail() {
            walker.walk(start, None).map_err(|node| FormulationError::Stuck {
                demand,
                node: g.node(node).to_string(),
            })?;
        }
        cycles = cycles.max(walker.cycles);
        debug_assert!(walker.used <= live && path_arcs <= live);
        Ok(DemandFlow {
            route,
            cycles_stripped: cycles,
            arcs_used: live,
        })
    }
}

/// Decoded flow of a single demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandFlow {
    pub route: Option<Route>,
    pub cycles_stripped: usize,
    /// Arcs with flow 1 (what the length row charged).
    pub arcs_used: usize,
}

struct Walker<'g> {
    g: &'g NetworkGraph,
    out: Vec<Vec<Arc>>,
    next: Vec<usize>,
    pos: Vec<Option<usize>>,
    cycles: usize,
    used: usize,
}

impl<'g> Walker<'g> {
    fn new(g: &'g NetworkGraph, out: Vec<Vec<Arc>>) -> Self {
        let n = out.len();
        Self {
            g,
            out,
            next: vec![0; n],
            pos: vec![None; n],
            cycles: 0,
            used: 0,
        }
    }

    fn take(&mut self, node: usize) -> Option<Arc> {
        let arc = self.out[node].get(self.next[node]).copied()?;
        self.next[node] += 1;
        self.used += 1;
        Some(arc)
    }

    fn next_tail(&self) -> Option<usize> {
        (0..self.out.len()).find(|&n| self.next[n] < self.out[n].len())
    }

    /// Follows unused arcs from `start`, erasing loops as they close. With a
    /// target, stops on reaching it and returns the loop-free route. Without
    /// one, runs until stuck at `start`. `Err(node)` if stuck elsewhere.
    fn walk(&mut self, start: usize, target: Option<usize>) -> Result<Route, usize> {
        let mut nodes = vec![start];
        let mut edges = Vec::new();
        self.pos[start] = Some(0);
        let mut cur = start;
        while Some(cur) != target {
            let Some(arc) = self.take(cur) else {
                if target.is_none() && nodes.len() == 1 {
                    break;
                }
                for &n in &nodes {
                    self.pos[n] = None;
                }
                return Err(cur);
            };
            let head = arc.head(self.g);
            if let Some(k) = self.pos[head] {
                self.cycles += 1;
                for &n in &nodes[k + 1..] {
                    self.pos[n] = None;
                }
                nodes.truncate(k + 1);
                edges.truncate(k);
            } else {
                self.pos[head] = Some(nodes.len());
                nodes.push(head);
                edges.push(arc.edge);
            }
            cur = head;
        }
        for &n in &nodes {
            self.pos[n] = None;
        }
        Ok(Route { nodes, edges })
    }
}

/// Turns an integral solution of `model` into per-demand decisions.
///
/// Demands with source outflow 1 are satisfied along their loop-free path;
/// the rest are rejected. Flow cycles are stripped and counted.
pub fn decode_paths(model: &MerrModel<'_>, x: &[f64]) -> Result<RoutingOutcome, FormulationError> {
    let g = model.graph();
    let mut decisions = Vec::with_capacity(model.endpoints.len());
    let mut cycles = 0;
    for i in 0..model.endpoints.len() {
        let flow = model.decode_demand(i, x)?;
        cycles += flow.cycles_stripped;
        decisions.push(match flow.route {
            Some(r) => Decision::Satisfied { path: r.labels(g) },
            None => Decision::Rejected,
        });
    }
    let mut outcome = RoutingOutcome::new(decisions, OutcomeStats::default());
    outcome.stats.cycles_stripped = cycles;
    Ok(outcome)
}
