//! Simplex front end.
//!
//! The pivoting itself is delegated to `microlp` (bounded-variable revised
//! simplex with sparse LU factors and dual-simplex warm starts). This module
//! owns the translation, status mapping and the post-solve feasibility check.

use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome, Variable};

use super::{LinearProgram, LpError, Relation, TOL_FEAS};

// Values this close to a bound are snapped onto it.
const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of [`solve_lp`]. `x` is empty and `objective` is `-inf`
/// (infeasible) or `+inf` (unbounded) unless the status is optimal.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    fn infeasible() -> Self {
        Self {
            status: LpStatus::Infeasible,
            x: Vec::new(),
            objective: f64::NEG_INFINITY,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Solves `lp` to a basic optimal solution.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    Ok(match Relaxation::solve(lp)? {
        Solved::Optimal(r) => r.to_solution(lp)?,
        Solved::Infeasible => LpSolution::infeasible(),
        Solved::Unbounded => LpSolution {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            objective: f64::INFINITY,
        },
    })
}

pub(crate) enum Solved {
    Optimal(Relaxation),
    Infeasible,
    Unbounded,
}

/// A solved relaxation that can be re-solved after fixing variables.
#[derive(Clone)]
pub(crate) struct Relaxation {
    solution: microlp::Solution,
    vars: Vec<Variable>,
}

impl Relaxation {
    /// Rows without terms are checked here and not passed to the engine.
    pub(crate) fn solve(lp: &LinearProgram) -> Result<Solved, LpError> {
        let mut problem = Problem::new(OptimizationDirection::Maximize);
        let vars: Vec<Variable> = lp
            .objective
            .iter()
            .zip(&lp.bounds)
            .map(|(&c, &b)| problem.add_var(c, b))
            .collect();
        for c in &lp.constraints {
            if c.terms.is_empty() {
                if c.violation(&[]) > TOL_FEAS {
                    return Ok(Solved::Infeasible);
                }
                continue;
            }
            let op = match c.relation {
                Relation::Le => ComparisonOp::Le,
                Relation::Eq => ComparisonOp::Eq,
            };
            let expr: Vec<(Variable, f64)> = c.terms.iter().map(|&(j, a)| (vars[j], a)).collect();
            problem.add_constraint(expr, op, c.rhs);
        }
        Self::wrap(problem.solve(), vars)
    }

    fn wrap(outcome: Result<SolveOutcome, microlp::Error>, vars: Vec<Variable>) -> Result<Solved, LpError> {
        match outcome {
            Ok(SolveOutcome::Solution(solution)) => Ok(Solved::Optimal(Self { solution, vars })),
            Ok(SolveOutcome::Interrupted(_)) => Err(LpError::Engine("solve interrupted".into())),
            Err(microlp::Error::Infeasible) => Ok(Solved::Infeasible),
            Err(microlp::Error::Unbounded) => Ok(Solved::Unbounded),
            Err(e) => Err(LpError::Engine(e.to_string())),
        }
    }

    /// Re-solves with `x[var] = value`.
    pub(crate) fn fix(self, var: usize, value: f64) -> Result<Solved, LpError> {
        let v = self.vars[var];
        Self::wrap(self.solution.fix_var(v, value), self.vars)
    }

    pub(crate) fn values(&self, lp: &LinearProgram) -> Vec<f64> {
        self.vars
            .iter()
            .zip(&lp.bounds)
            .map(|(&v, &(lo, hi))| {
                let x = self.solution.var_value_raw(v);
                if (x - lo).abs() <= SNAP {
                    lo
                } else if (x - hi).abs() <= SNAP {
                    hi
                } else {
                    x.clamp(lo, hi)
                }
            })
            .collect()
    }

    pub(crate) fn objective(&self) -> f64 {
        self.solution.objective()
    }

    fn to_solution(&self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        let x = self.values(lp);
        let violation = lp.max_violation(&x);
        if violation > TOL_FEAS {
            return Err(LpError::Engine(format!(
                "optimal point violates a row by {violation:e}"
            )));
        }
        Ok(LpSolution {
            status: LpStatus::Optimal,
            objective: lp.objective_value(&x),
            x,
        })
    }
}
