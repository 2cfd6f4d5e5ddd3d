//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Intended for small instances and as an independent reference for the
//! parametric cut backend; the tableau is `O(rows × cols)` in memory.

use super::problem::{LinearConstraint, LpProblem, Sense};
use super::LpSolver;
use crate::error::{Error, Result};
use crate::types::FractionalSolution;

/// Terms, sense and right-hand side.
type SparseRow = (Vec<(usize, f64)>, Sense, f64);

#[derive(Debug, Clone)]
pub struct DenseSimplex {
    pub tolerance: f64,
    pub max_pivots: usize,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_pivots: 200_000,
        }
    }
}

/// Optimal point and objective value of a general LP.
#[derive(Debug, Clone)]
pub struct SimplexSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Column {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// Reduced costs; the last entry holds minus the objective value.
    cost: Vec<f64>,
    basis: Vec<usize>,
    kinds: Vec<Column>,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        *self.rows[r].last().unwrap()
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let width = self.rows[r].len();
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for c in 0..width {
                    row[c] -= f * pivot_row[c];
                }
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for (cost, p) in self.cost.iter_mut().zip(&pivot_row) {
                *cost -= f * p;
            }
        }
        self.basis[r] = col;
    }

    /// Runs simplex iterations until optimality. Columns rejected by
    /// `allowed` never enter the basis.
    fn optimize(
        &mut self,
        tol: f64,
        max_pivots: usize,
        pivots: &mut usize,
        allowed: impl Fn(usize) -> bool,
    ) -> Result<()> {
        let ncols = self.kinds.len();
        loop {
            // Bland: lowest-index improving column
            let Some(col) = (0..ncols).find(|&c| allowed(c) && self.cost[c] < -tol) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][col];
                if a > tol {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((best, best_ratio)) => {
                            if ratio < best_ratio - tol
                                || (ratio <= best_ratio + tol && self.basis[r] < self.basis[best])
                            {
                                Some((r, ratio))
                            } else {
                                Some((best, best_ratio))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::SolverFailure("LP is unbounded".into()));
            };
            self.pivot(r, col);
            *pivots += 1;
            if *pivots > max_pivots {
                return Err(Error::SolverFailure(format!(
                    "pivot limit {max_pivots} exceeded"
                )));
            }
        }
    }
}

impl DenseSimplex {
    /// Minimises `objective · x` subject to `constraints` and per-variable
    /// finite `(lower, upper)` bounds.
    pub fn solve_general(
        &self,
        objective: &[f64],
        constraints: &[LinearConstraint],
        bounds: &[(f64, f64)],
    ) -> Result<SimplexSolution> {
        let nvars = objective.len();
        let tol = self.tolerance;

        // Shift x = lower + x' so that every structural column is ≥ 0, and
        // express upper bounds as ordinary rows.
        let mut rows: Vec<SparseRow> = Vec::new();
        for c in constraints {
            let shift: f64 = c.terms.iter().map(|&(k, a)| a * bounds[k].0).sum();
            rows.push((c.terms.clone(), c.sense, c.rhs - shift));
        }
        for (k, &(lo, hi)) in bounds.iter().enumerate() {
            if hi < lo {
                return Err(Error::Infeasible);
            }
            rows.push((vec![(k, 1.0)], Sense::Le, hi - lo));
        }

        let nrows = rows.len();
        let mut kinds = vec![Column::Structural; nvars];
        let mut row_slack = Vec::with_capacity(nrows);
        let mut row_art = Vec::with_capacity(nrows);
        let mut normalized = Vec::with_capacity(nrows);
        for (terms, sense, rhs) in rows {
            // keep the right-hand side non-negative
            let (terms, sense, rhs) = if rhs < 0.0 {
                let flipped = match sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                };
                (
                    terms.into_iter().map(|(k, a)| (k, -a)).collect::<Vec<_>>(),
                    flipped,
                    -rhs,
                )
            } else {
                (terms, sense, rhs)
            };
            row_slack.push(kinds.len());
            kinds.push(Column::Slack);
            if sense == Sense::Ge {
                row_art.push(Some(kinds.len()));
                kinds.push(Column::Artificial);
            } else {
                row_art.push(None);
            }
            normalized.push((terms, sense, rhs));
        }

        let ncols = kinds.len();
        let mut table = Tableau {
            rows: Vec::with_capacity(nrows),
            cost: vec![0.0; ncols + 1],
            basis: Vec::with_capacity(nrows),
            kinds,
        };
        for (r, (terms, sense, rhs)) in normalized.into_iter().enumerate() {
            let mut row = vec![0.0; ncols + 1];
            for (k, a) in terms {
                row[k] += a;
            }
            row[ncols] = rhs;
            match sense {
                Sense::Le => {
                    row[row_slack[r]] = 1.0;
                    table.basis.push(row_slack[r]);
                }
                Sense::Ge => {
                    row[row_slack[r]] = -1.0;
                    let art = row_art[r].expect("artificial for >= row");
                    row[art] = 1.0;
                    table.basis.push(art);
                }
            }
            table.rows.push(row);
        }

        let mut pivots = 0usize;
        let has_artificial = row_art.iter().any(Option::is_some);
        if has_artificial {
            // phase 1: minimise the sum of artificials
            for c in 0..ncols {
                if table.kinds[c] == Column::Artificial {
                    table.cost[c] = 1.0;
                }
            }
            for r in 0..nrows {
                if table.kinds[table.basis[r]] == Column::Artificial {
                    let row = table.rows[r].clone();
                    for (c, v) in row.into_iter().enumerate() {
                        table.cost[c] -= v;
                    }
                }
            }
            table.optimize(tol, self.max_pivots, &mut pivots, |_| true)?;
            let infeasibility = -table.cost[ncols];
            if infeasibility > tol.max(1e-7) {
                return Err(Error::Infeasible);
            }
            // drive zero-level artificials out of the basis where possible
            for r in 0..nrows {
                if table.kinds[table.basis[r]] != Column::Artificial {
                    continue;
                }
                if let Some(col) = (0..ncols)
                    .find(|&c| table.kinds[c] != Column::Artificial && table.rows[r][c].abs() > tol)
                {
                    table.pivot(r, col);
                }
            }
        }

        // phase 2
        let mut cost = vec![0.0; ncols + 1];
        cost[..nvars].copy_from_slice(objective);
        for r in 0..nrows {
            let cb = if table.basis[r] < nvars {
                objective[table.basis[r]]
            } else {
                0.0
            };
            if cb != 0.0 {
                for (c, v) in table.rows[r].iter().enumerate() {
                    cost[c] -= cb * v;
                }
            }
        }
        table.cost = cost;
        let kinds = table.kinds.clone();
        table.optimize(tol, self.max_pivots, &mut pivots, |c| {
            kinds[c] != Column::Artificial
        })?;

        let mut x: Vec<f64> = bounds.iter().map(|b| b.0).collect();
        for r in 0..nrows {
            let col = table.basis[r];
            if col < nvars {
                x[col] += table.rhs(r);
            }
        }
        for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
            *v = v.clamp(lo, hi);
        }
        let objective_value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        log::debug!("simplex finished after {pivots} pivots");
        Ok(SimplexSolution {
            x,
            objective: objective_value,
        })
    }
}

impl LpSolver for DenseSimplex {
    fn solve(&self, problem: &LpProblem) -> Result<FractionalSolution> {
        let sol = self.solve_general(
            &problem.objective_coefficients(),
            &problem.constraints(),
            &problem.bounds(),
        )?;
        let y = sol.x[..problem.num_nodes()].to_vec();
        FractionalSolution::new(y, problem.original())
    }
}
