//! Exact LP backend based on parametric minimum cuts.
//!
//! For fixed `y` the relaxed objective `f(y) = Σ|y_i − y'_i|` and the relaxed
//! error `g(y) = Σ w|y_i − y_j|` are both total-variation functionals, so
//! every threshold set of an optimal `y` is itself optimal for the Lagrangian
//! `f + λg`. The LP optimum therefore lies on the segment between two binary
//! minimisers of `f + λg` whose errors bracket `m`, and those are found by
//! bisecting on the breakpoints of the lower envelope with min-cut oracles.

use super::maxflow::FlowNetwork;
use super::problem::LpProblem;
use super::LpSolver;
use crate::error::{Error, Result};
use crate::types::{budget_slack, FractionalSolution};

#[derive(Debug, Clone)]
pub struct ParametricCutSolver {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ParametricCutSolver {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
struct Cut {
    labels: Vec<u8>,
    f: f64,
    g: f64,
}

fn evaluate(problem: &LpProblem, labels: Vec<u8>) -> Cut {
    let f = labels
        .iter()
        .zip(problem.original())
        .filter(|(a, b)| a != b)
        .count() as f64;
    let g = problem
        .edges()
        .iter()
        .filter(|e| labels[e.i] != labels[e.j])
        .map(|e| e.w)
        .sum();
    Cut { labels, f, g }
}

/// Binary minimiser of `unary · f + λ g` that honours fixed nodes.
fn min_cut(problem: &LpProblem, lambda: f64, unary: bool) -> Cut {
    let n = problem.num_nodes();
    let (s, t) = (n, n + 1);
    let mut net = FlowNetwork::new(n + 2);
    for (i, fixed) in problem.fixed().iter().enumerate() {
        match fixed {
            Some(1) => net.add_arc(s, i, f64::INFINITY),
            Some(_) => net.add_arc(i, t, f64::INFINITY),
            None if unary => {
                // label 1 is the source side; cutting costs 1 when y_i ≠ y'_i
                if problem.original()[i] == 1 {
                    net.add_arc(s, i, 1.0);
                } else {
                    net.add_arc(i, t, 1.0);
                }
            }
            None => {}
        }
    }
    for e in problem.edges() {
        net.add_edge(e.i, e.j, lambda * e.w);
    }
    net.max_flow(s, t);
    let side = net.source_side(s);
    evaluate(problem, side[..n].iter().map(|&b| u8::from(b)).collect())
}

impl ParametricCutSolver {
    fn finish(&self, problem: &LpProblem, a: &Cut, b: &Cut) -> Result<FractionalSolution> {
        let m = problem.budget();
        let theta = if a.g - b.g > 0.0 {
            ((m - b.g) / (a.g - b.g)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let values: Vec<f64> = a
            .labels
            .iter()
            .zip(&b.labels)
            .map(|(&ya, &yb)| match (ya, yb) {
                (1, 1) => 1.0,
                (0, 0) => 0.0,
                (1, _) => theta,
                _ => 1.0 - theta,
            })
            .collect();
        FractionalSolution::new(values, problem.original())
    }
}

impl LpSolver for ParametricCutSolver {
    fn solve(&self, problem: &LpProblem) -> Result<FractionalSolution> {
        let m = problem.budget();
        let slack = budget_slack(m);

        // a: minimal flips, ignoring error (the original labels, with fixings)
        let a_labels: Vec<u8> = problem
            .original()
            .iter()
            .zip(problem.fixed())
            .map(|(&y, f)| f.unwrap_or(y))
            .collect();
        let mut a = evaluate(problem, a_labels);
        if a.g <= m + slack {
            return FractionalSolution::new(
                a.labels.iter().map(|&v| f64::from(v)).collect(),
                problem.original(),
            );
        }

        // b: minimal error, ignoring flips
        let mut b = min_cut(problem, 1.0, false);
        if b.g > m + slack.max(self.tolerance) {
            return Err(Error::Infeasible);
        }
        for _ in 0..self.max_iterations {
            let denom = a.g - b.g;
            if denom <= slack {
                return self.finish(problem, &b, &b);
            }
            let lambda = (b.f - a.f) / denom;
            let c = min_cut(problem, lambda, true);
            let line = a.f + lambda * a.g;
            let scale = line.abs().max(1.0);
            if c.f + lambda * c.g >= line - self.tolerance * scale {
                return self.finish(problem, &a, &b);
            }
            if c.g > m + slack {
                a = c;
            } else if c.g < m - slack {
                b = c;
            } else {
                return self.finish(problem, &c, &c);
            }
        }
        Err(Error::SolverFailure(format!(
            "parametric search did not settle within {} cuts",
            self.max_iterations
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{chain, square, triangle_with_isolated};
    use crate::lp::build_lp;
    use crate::lp::simplex::DenseSimplex;

    #[test]
    fn unconstrained_budget_returns_original() {
        let (g, y) = square();
        let p = build_lp(&g, &y, 4.0).unwrap();
        let sol = ParametricCutSolver::default().solve(&p).unwrap();
        assert_eq!(sol.values(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(sol.objective(), 0.0);
    }

    #[test]
    fn square_at_m2_matches_simplex_objective() {
        let (g, y) = square();
        let p = build_lp(&g, &y, 2.0).unwrap();
        let cut = ParametricCutSolver::default().solve(&p).unwrap();
        let lp = DenseSimplex::default().solve(&p).unwrap();
        assert!((cut.objective() - 1.0).abs() < 1e-9);
        assert!((lp.objective() - 1.0).abs() < 1e-9);
        let x = p.primal_from_labels(cut.values());
        assert!(p.max_violation(&x) < 1e-9);
    }

    #[test]
    fn triangle_zero_error_flips_one_node() {
        let (g, y) = triangle_with_isolated();
        let p = build_lp(&g, &y, 0.0).unwrap();
        let sol = ParametricCutSolver::default().solve(&p).unwrap();
        assert!((sol.objective() - 1.0).abs() < 1e-9);
        assert!(sol.is_binary());
        assert_eq!(sol.values(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn chain_half_error_is_fractional() {
        let (g, y) = chain();
        let p = build_lp(&g, &y, 0.5).unwrap();
        let sol = ParametricCutSolver::default().solve(&p).unwrap();
        let reference = DenseSimplex::default().solve(&p).unwrap();
        assert!((sol.objective() - reference.objective()).abs() < 1e-9);
        assert!((sol.objective() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fixed_nodes_can_make_the_problem_infeasible() {
        let (g, y) = triangle_with_isolated();
        let p = build_lp(&g, &y, 0.0)
            .unwrap()
            .with_fixed(1, 1)
            .unwrap()
            .with_fixed(2, 0)
            .unwrap();
        assert!(matches!(
            ParametricCutSolver::default().solve(&p),
            Err(Error::Infeasible)
        ));
    }
}
