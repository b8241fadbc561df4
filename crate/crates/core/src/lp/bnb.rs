//! Depth-first branch-and-bound for binary programs.
//!
//! Each node fixes one more variable and warm-starts the parent relaxation.
//! The branching variable is the one whose value is closest to 0.5 (lowest
//! index on ties); the `x = 1` child is explored before `x = 0`. A node is
//! pruned when its relaxation bound cannot beat the incumbent. When every
//! objective coefficient sits on an integer variable and is itself an
//! integer, bounds are rounded down before the comparison. A known feasible
//! point can be passed in as the starting incumbent, and a primal heuristic
//! can propose points from each fractional node solution.

use thiserror::Error;

use super::simplex::{Relaxation, Solved};
use super::{LinearProgram, LpError, TOL_FEAS, TOL_INT};

pub const DEFAULT_NODE_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MipSolution {
    pub status: MipStatus,
    /// Integer variables hold exact `0.0`/`1.0`. Empty when infeasible.
    pub x: Vec<f64>,
    pub objective: f64,
    pub nodes_explored: usize,
}

#[derive(Debug, Error)]
pub enum MipError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("integer variable {var} has bounds [{lo}, {hi}], only binary variables are supported")]
    NonBinary { var: usize, lo: f64, hi: f64 },
    #[error("integer variable index {0} out of range")]
    BadIntegerIndex(usize),
    #[error("starting point is infeasible or not integral")]
    InvalidStart,
    #[error("node limit {limit} reached (best bound {best_bound}, gap {gap})")]
    NodeLimit {
        limit: usize,
        incumbent: Option<Box<MipSolution>>,
        best_bound: f64,
        gap: f64,
    },
}

struct Pending {
    parent: Relaxation,
    var: usize,
    value: f64,
    bound: f64,
}

struct Search<'a> {
    lp: &'a LinearProgram,
    integer_vars: Vec<usize>,
    integral_objective: bool,
    incumbent: Option<(Vec<f64>, f64)>,
}

impl Search<'_> {
    fn can_improve(&self, bound: f64) -> bool {
        match &self.incumbent {
            None => true,
            Some((_, best)) if self.integral_objective => (bound + TOL_INT).floor() > best + 0.5,
            Some((_, best)) => bound > best + TOL_FEAS,
        }
    }

    fn branching_var(&self, x: &[f64]) -> Option<usize> {
        let mut pick = None;
        let mut best = TOL_INT;
        for &j in &self.integer_vars {
            let frac = x[j] - x[j].floor();
            let dist = frac.min(1.0 - frac);
            if dist > best {
                best = dist;
                pick = Some(j);
            }
        }
        pick
    }

    fn admissible(&self, x: &[f64]) -> bool {
        self.lp.is_feasible(x, TOL_FEAS)
            && self
                .integer_vars
                .iter()
                .all(|&j| (x[j] - x[j].round()).abs() <= TOL_INT)
    }

    fn accept(&mut self, mut x: Vec<f64>) {
        for &j in &self.integer_vars {
            x[j] = x[j].round();
        }
        let obj = self.lp.objective_value(&x);
        let better = match &self.incumbent {
            None => true,
            Some((_, best)) => obj > *best + TOL_FEAS,
        };
        if better {
            self.incumbent = Some((x, obj));
        }
    }
}

/// Maximizes `lp` with the variables in `integer_vars` restricted to {0, 1}.
///
/// At most `node_limit` relaxations are solved. Hitting the limit returns
/// [`MipError::NodeLimit`] with the incumbent (if any) and the bound gap.
pub fn solve_mip(lp: &LinearProgram, integer_vars: &[usize], node_limit: usize) -> Result<MipSolution, MipError> {
    solve_mip_from(lp, integer_vars, node_limit, None)
}

/// [`solve_mip`] with `start` as the initial incumbent. `start` must be
/// feasible within `TOL_FEAS` and integral on `integer_vars`.
pub fn solve_mip_from(
    lp: &LinearProgram,
    integer_vars: &[usize],
    node_limit: usize,
    start: Option<&[f64]>,
) -> Result<MipSolution, MipError> {
    solve_mip_with(lp, integer_vars, node_limit, start, None)
}

/// Maps a fractional node solution to a candidate integer point.
pub type Heuristic<'h> = dyn Fn(&[f64]) -> Option<Vec<f64>> + 'h;

/// [`solve_mip_from`] plus a primal heuristic called on every fractional node.
/// Candidates that are infeasible or not integral are ignored.
pub fn solve_mip_with(
    lp: &LinearProgram,
    integer_vars: &[usize],
    node_limit: usize,
    start: Option<&[f64]>,
    heuristic: Option<&Heuristic<'_>>,
) -> Result<MipSolution, MipError> {
    lp.validate()?;
    let mut ints = integer_vars.to_vec();
    ints.sort_unstable();
    ints.dedup();
    for &j in &ints {
        let &(lo, hi) = lp.bounds.get(j).ok_or(MipError::BadIntegerIndex(j))?;
        if lo < 0.0 || hi > 1.0 {
            return Err(MipError::NonBinary { var: j, lo, hi });
        }
    }
    let is_int = {
        let mut v = vec![false; lp.num_vars];
        ints.iter().for_each(|&j| v[j] = true);
        v
    };
    let integral_objective = lp
        .objective
        .iter()
        .enumerate()
        .all(|(j, &c)| c == 0.0 || (is_int[j] && c.fract() == 0.0));

    let mut search = Search {
        lp,
        integer_vars: ints,
        integral_objective,
        incumbent: None,
    };
    if let Some(x) = start {
        if !search.admissible(x) {
            return Err(MipError::InvalidStart);
        }
        search.accept(x.to_vec());
    }
    let mut nodes = 0usize;
    let mut stack: Vec<Pending> = Vec::new();
    let mut current = match Relaxation::solve(lp)? {
        Solved::Optimal(r) => Some(r),
        Solved::Infeasible => None,
        Solved::Unbounded => return Err(LpError::Engine("bounded program reported unbounded".into()).into()),
    };
    nodes += 1;

    loop {
        if let Some(node) = current.take() {
            let bound = node.objective();
            if !search.can_improve(bound) {
                continue;
            }
            let x = node.values(lp);
            match search.branching_var(&x) {
                None => search.accept(x),
                Some(j) => {
                    if let Some(y) = heuristic.and_then(|h| h(&x)) {
                        if y.len() == lp.num_vars && search.admissible(&y) {
                            search.accept(y);
                            if !search.can_improve(bound) {
                                continue;
                            }
                        }
                    }
                    if nodes >= node_limit {
                        stack.push(Pending {
                            parent: node,
                            var: j,
                            value: 0.0,
                            bound,
                        });
                        return Err(limit_error(&search, &stack, node_limit, nodes));
                    }
                    stack.push(Pending {
                        parent: node.clone(),
                        var: j,
                        value: 0.0,
                        bound,
                    });
                    nodes += 1;
                    current = optimal(node.fix(j, 1.0)?);
                }
            }
        } else if let Some(p) = stack.pop() {
            if !search.can_improve(p.bound) {
                continue;
            }
            if nodes >= node_limit {
                stack.push(p);
                return Err(limit_error(&search, &stack, node_limit, nodes));
            }
            nodes += 1;
            current = optimal(p.parent.fix(p.var, p.value)?);
        } else {
            break;
        }
    }

    Ok(match search.incumbent {
        Some((x, objective)) => MipSolution {
            status: MipStatus::Optimal,
            x,
            objective,
            nodes_explored: nodes,
        },
        None => MipSolution {
            status: MipStatus::Infeasible,
            x: Vec::new(),
            objective: f64::NEG_INFINITY,
            nodes_explored: nodes,
        },
    })
}

fn optimal(s: Solved) -> Option<Relaxation> {
    match s {
        Solved::Optimal(r) => Some(r),
        Solved::Infeasible | Solved::Unbounded => None,
    }
}

fn limit_error(search: &Search, stack: &[Pending], limit: usize, nodes: usize) -> MipError {
    let open_bound = stack.iter().map(|p| p.bound).fold(f64::NEG_INFINITY, f64::max);
    let incumbent = search.incumbent.as_ref().map(|(x, obj)| {
        Box::new(MipSolution {
            status: MipStatus::Optimal,
            x: x.clone(),
            objective: *obj,
            nodes_explored: nodes,
        })
    });
    let best_obj = incumbent.as_ref().map_or(f64::NEG_INFINITY, |s| s.objective);
    let best_bound = open_bound.max(best_obj);
    MipError::NodeLimit {
        limit,
        incumbent,
        best_bound,
        gap: best_bound - best_obj,
    }
}
