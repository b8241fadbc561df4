//! Linear programs and binary branch-and-bound.
//!
//! Programs are stated as maximizations with sparse `≤`/`=` rows and finite
//! per-variable bounds. [`solve_lp`] returns a basic optimal solution from the
//! simplex engine; [`solve_mip`] runs depth-first branch-and-bound over those
//! relaxations for programs whose integer variables are binary.

mod bnb;
mod simplex;

use std::fmt::{self, Write as _};

use thiserror::Error;

pub use bnb::{
    solve_mip, solve_mip_from, solve_mip_with, Heuristic, MipError, MipSolution, MipStatus, DEFAULT_NODE_LIMIT,
};
pub use simplex::{solve_lp, LpSolution, LpStatus};

/// Feasibility tolerance on rows and bounds.
pub const TOL_FEAS: f64 = 1e-7;
/// Distance from the nearest integer below which a value counts as integral.
pub const TOL_INT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
        })
    }
}

/// One sparse row `Σ coeff·x[var] (≤|=) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates this row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// `maximize objective·x` subject to `constraints` and `bounds`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("objective has {got} coefficients, expected {expected}")]
    ObjectiveLength { expected: usize, got: usize },
    #[error("bounds cover {got} variables, expected {expected}")]
    BoundsLength { expected: usize, got: usize },
    #[error("variable {var}: bounds [{lo}, {hi}] must satisfy 0 <= lo <= hi < inf")]
    BadBounds { var: usize, lo: f64, hi: f64 },
    #[error("row {row}: variable index {var} out of range (num_vars = {num_vars})")]
    IndexOutOfRange { row: usize, var: usize, num_vars: usize },
    #[error("row {row}: variable {var} appears more than once")]
    DuplicateTerm { row: usize, var: usize },
    #[error("row {row}: non-finite coefficient or right-hand side")]
    NonFinite { row: usize },
    #[error("objective coefficient of variable {0} is not finite")]
    NonFiniteObjective(usize),
    #[error("simplex engine failure: {0}")]
    Engine(String),
}

impl LinearProgram {
    /// Program with the given objective, bounds and no rows.
    pub fn new(objective: Vec<f64>, bounds: Vec<(f64, f64)>) -> Self {
        Self {
            num_vars: objective.len(),
            objective,
            constraints: Vec::new(),
            bounds,
        }
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        self.constraints.push(Constraint { terms, relation, rhs });
        self.constraints.len() - 1
    }

    /// Structural checks run before every solve.
    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars;
        if self.objective.len() != n {
            return Err(LpError::ObjectiveLength {
                expected: n,
                got: self.objective.len(),
            });
        }
        if self.bounds.len() != n {
            return Err(LpError::BoundsLength {
                expected: n,
                got: self.bounds.len(),
            });
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(LpError::NonFiniteObjective(j));
        }
        for (var, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
                return Err(LpError::BadBounds { var, lo, hi });
            }
        }
        let mut seen = vec![usize::MAX; n];
        for (row, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(LpError::NonFinite { row });
            }
            for &(var, a) in &c.terms {
                if var >= n {
                    return Err(LpError::IndexOutOfRange { row, var, num_vars: n });
                }
                if !a.is_finite() {
                    return Err(LpError::NonFinite { row });
                }
                if seen[var] == row {
                    return Err(LpError::DuplicateTerm { row, var });
                }
                seen[var] = row;
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| c.violation(x));
        let bounds = self
            .bounds
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &v)| (lo - v).max(v - hi).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.num_vars && self.max_violation(x) <= tol
    }

    /// Plain-text dump in CPLEX LP style, variables named `x<j>`.
    pub fn to_lp_format(&self) -> String {
        self.to_lp_format_with(|j| format!("x{j}"))
    }

    /// Plain-text dump in CPLEX LP style with caller-chosen variable names.
    pub fn to_lp_format_with(&self, name: impl Fn(usize) -> String) -> String {
        let mut out = String::from("Maximize\n obj:");
        let term = |out: &mut String, a: f64, j: usize, first: bool| {
            let sign = if a < 0.0 {
                " -"
            } else if first {
                ""
            } else {
                " +"
            };
            let mag = a.abs();
            if mag == 1.0 {
                let _ = write!(out, "{sign} {}", name(j));
            } else {
                let _ = write!(out, "{sign} {mag} {}", name(j));
            }
        };
        let mut first = true;
        for (j, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                term(&mut out, c, j, first);
                first = false;
            }
        }
        if first {
            out.push_str(" 0");
        }
        out.push_str("\nSubject To\n");
        for (r, c) in self.constraints.iter().enumerate() {
            let _ = write!(out, " c{r}:");
            if c.terms.is_empty() {
                out.push_str(" 0");
            }
            for (k, &(j, a)) in c.terms.iter().enumerate() {
                term(&mut out, a, j, k == 0);
            }
            let _ = writeln!(out, " {} {}", c.relation, c.rhs);
        }
        out.push_str("Bounds\n");
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            let _ = writeln!(out, " {lo} <= {} <= {hi}", name(j));
        }
        out.push_str("End\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_shape_errors() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0], vec![(0.0, 1.0); 2]);
        assert_eq!(lp.validate(), Ok(()));
        lp.add_constraint(vec![(2, 1.0)], Relation::Le, 1.0);
        assert!(matches!(lp.validate(), Err(LpError::IndexOutOfRange { var: 2, .. })));
        lp.constraints[0].terms = vec![(0, 1.0), (0, 2.0)];
        assert!(matches!(lp.validate(), Err(LpError::DuplicateTerm { var: 0, .. })));
        lp.constraints.clear();
        lp.bounds[1] = (1.0, 0.0);
        assert!(matches!(lp.validate(), Err(LpError::BadBounds { var: 1, .. })));
        lp.bounds[1] = (0.0, f64::INFINITY);
        assert!(lp.validate().is_err());
        lp.bounds.pop();
        assert!(matches!(lp.validate(), Err(LpError::BoundsLength { .. })));
    }

    #[test]
    fn violation_measures() {
        let mut lp = LinearProgram::new(vec![1.0, 0.0], vec![(0.0, 1.0); 2]);
        lp.add_constraint(vec![(0, 1.0), (1, 1.0)], Relation::Le, 1.0);
        lp.add_constraint(vec![(0, 1.0), (1, -1.0)], Relation::Eq, 0.0);
        assert_eq!(lp.max_violation(&[0.5, 0.5]), 0.0);
        assert!((lp.max_violation(&[1.0, 0.5]) - 0.5).abs() < 1e-15);
        assert!((lp.max_violation(&[1.5, 1.5]) - 2.0).abs() < 1e-15);
        assert!(lp.is_feasible(&[0.25, 0.25], TOL_FEAS));
    }

    #[test]
    fn lp_format_dump() {
        let mut lp = LinearProgram::new(vec![3.0, 2.0], vec![(0.0, 10.0); 2]);
        lp.add_constraint(vec![(0, 1.0), (1, 1.0)], Relation::Le, 4.0);
        lp.add_constraint(vec![(0, 1.0), (1, -3.0)], Relation::Eq, 0.0);
        let text = lp.to_lp_format();
        assert_eq!(
            text,
            "Maximize\n obj: 3 x0 + 2 x1\nSubject To\n c0: x0 + x1 <= 4\n c1: x0 - 3 x1 = 0\nBounds\n 0 <= x0 <= 10\n 0 <= x1 <= 10\nEnd\n"
        );
    }
}
