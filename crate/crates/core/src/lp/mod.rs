//! The relaxed label-flipping linear program and its solvers.
//!
//! [`build_lp`] produces the sparse formulation. Two interchangeable
//! backends implement [`LpSolver`]:
//!
//! * [`ParametricCutSolver`] (default) solves the LP exactly through a short
//!   sequence of minimum cuts and scales to thousands of nodes.
//! * [`DenseSimplex`] runs a textbook two-phase simplex over the explicit
//!   constraint rows; it serves small instances and cross-checks.

mod cut;
mod maxflow;
mod problem;
mod simplex;

use serde::{Deserialize, Serialize};

pub use cut::ParametricCutSolver;
pub use problem::{build_lp, LinearConstraint, LpProblem, Sense};
pub use simplex::{DenseSimplex, SimplexSolution};

use crate::error::Result;
use crate::types::FractionalSolution;

/// Anything that returns an optimal relaxed labeling for an [`LpProblem`].
pub trait LpSolver {
    fn solve(&self, problem: &LpProblem) -> Result<FractionalSolution>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpBackend {
    #[default]
    ParametricCut,
    Simplex,
}

/// Solves `problem` with the chosen backend.
pub fn solve_lp(problem: &LpProblem, backend: LpBackend) -> Result<FractionalSolution> {
    match backend {
        LpBackend::ParametricCut => ParametricCutSolver::default().solve(problem),
        LpBackend::Simplex => DenseSimplex::default().solve(problem),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{square, triangle_with_isolated};

    #[test]
    fn generous_budget_keeps_the_labels() {
        let (g, y) = square();
        let problem = build_lp(&g, &y, 4.0).unwrap();
        for backend in [LpBackend::ParametricCut, LpBackend::Simplex] {
            let sol = solve_lp(&problem, backend).unwrap();
            assert!(sol.objective().abs() < 1e-9);
            assert_eq!(sol.values(), &[1.0, 0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn zero_budget_on_the_triangle_costs_one() {
        let (g, y) = triangle_with_isolated();
        let problem = build_lp(&g, &y, 0.0).unwrap();
        for backend in [LpBackend::ParametricCut, LpBackend::Simplex] {
            let sol = solve_lp(&problem, backend).unwrap();
            assert!((sol.objective() - 1.0).abs() < 1e-9, "{backend:?}");
        }
    }

    #[test]
    fn backend_names() {
        assert_eq!(
            serde_json::to_string(&LpBackend::ParametricCut).unwrap(),
            "\"parametric_cut\""
        );
        assert_eq!(LpBackend::default(), LpBackend::ParametricCut);
    }
}
