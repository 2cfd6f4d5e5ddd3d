use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::types::{check_labels, check_len, validate_graph, Edge, SimilarityGraph};

/// Inequality direction of a [`LinearConstraint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

/// `Σ coeff · x[var]  (≤ | ≥)  rhs`
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LinearConstraint {
    fn new(terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        Self { terms, sense, rhs }
    }

    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(k, a)| a * x[k]).sum()
    }

    /// Amount by which `x` violates the constraint (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.lhs(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
        }
    }
}

/// The relaxed label-flipping program over a sparse edge set.
///
/// Variables are laid out as `y_0..y_{n-1}` (relaxed labels), then
/// `z_0..z_{n-1}` (relaxed flip indicators `|y_i − y'_i|`), then one
/// `z_e` per edge (relaxed disagreement `|y_i − y_j|`). Every variable lies
/// in `[0, 1]`. Each absolute value is linearised by the four XOR
/// inequalities, and a single budget row bounds `Σ w_e z_e` by `m`.
///
/// A node may additionally be fixed to 0 or 1, which branch and bound uses.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    n: usize,
    original: Vec<u8>,
    edges: Vec<Edge>,
    m: f64,
    fixed: Vec<Option<u8>>,
}

/// Builds the LP relaxation for `graph`, original labels and error limit `m`.
pub fn build_lp(graph: &SimilarityGraph, original: &[u8], m: f64) -> Result<LpProblem> {
    if !(m >= 0.0) {
        return Err(Error::NegativeBudget(m));
    }
    check_len(graph.num_nodes(), original.len())?;
    check_labels(original)?;
    validate_graph(graph, graph.num_nodes())?;
    Ok(LpProblem {
        n: graph.num_nodes(),
        original: original.to_vec(),
        edges: graph.edges().to_vec(),
        m,
        fixed: vec![None; graph.num_nodes()],
    })
}

impl LpProblem {
    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn original(&self) -> &[u8] {
        &self.original
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn budget(&self) -> f64 {
        self.m
    }

    pub fn fixed(&self) -> &[Option<u8>] {
        &self.fixed
    }

    /// Copy of the problem with node `i` forced to `value`.
    pub fn with_fixed(&self, i: usize, value: u8) -> Result<Self> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.n,
            });
        }
        check_labels(&[value])?;
        let mut out = self.clone();
        out.fixed[i] = Some(value);
        Ok(out)
    }

    pub fn num_variables(&self) -> usize {
        2 * self.n + self.edges.len()
    }

    /// Four rows per node flip indicator, four per edge, one budget row.
    pub fn num_constraints(&self) -> usize {
        4 * self.n + 4 * self.edges.len() + 1
    }

    pub fn y_var(&self, i: usize) -> usize {
        i
    }

    pub fn flip_var(&self, i: usize) -> usize {
        self.n + i
    }

    pub fn edge_var(&self, e: usize) -> usize {
        2 * self.n + e
    }

    pub fn objective_coefficients(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.num_variables()];
        for i in 0..self.n {
            c[self.flip_var(i)] = 1.0;
        }
        c
    }

    /// Per-variable `(lower, upper)` bounds.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(0.0, 1.0); self.num_variables()];
        for (i, fixed) in self.fixed.iter().enumerate() {
            if let Some(v) = fixed {
                let v = f64::from(*v);
                b[self.y_var(i)] = (v, v);
            }
        }
        b
    }

    pub fn constraints(&self) -> Vec<LinearConstraint> {
        use Sense::{Ge, Le};
        let mut rows = Vec::with_capacity(self.num_constraints());
        for i in 0..self.n {
            let (y, z, orig) = (self.y_var(i), self.flip_var(i), f64::from(self.original[i]));
            rows.push(LinearConstraint::new(vec![(z, 1.0), (y, -1.0)], Le, orig));
            rows.push(LinearConstraint::new(vec![(z, 1.0), (y, 1.0)], Ge, orig));
            rows.push(LinearConstraint::new(vec![(z, 1.0), (y, -1.0)], Ge, -orig));
            rows.push(LinearConstraint::new(
                vec![(z, 1.0), (y, 1.0)],
                Le,
                2.0 - orig,
            ));
        }
        for (k, e) in self.edges.iter().enumerate() {
            let (yi, yj, z) = (self.y_var(e.i), self.y_var(e.j), self.edge_var(k));
            rows.push(LinearConstraint::new(
                vec![(z, 1.0), (yi, -1.0), (yj, -1.0)],
                Le,
                0.0,
            ));
            rows.push(LinearConstraint::new(
                vec![(z, 1.0), (yi, 1.0), (yj, -1.0)],
                Ge,
                0.0,
            ));
            rows.push(LinearConstraint::new(
                vec![(z, 1.0), (yi, -1.0), (yj, 1.0)],
                Ge,
                0.0,
            ));
            rows.push(LinearConstraint::new(
                vec![(z, 1.0), (yi, 1.0), (yj, 1.0)],
                Le,
                2.0,
            ));
        }
        rows.push(LinearConstraint::new(
            self.edges
                .iter()
                .enumerate()
                .map(|(k, e)| (self.edge_var(k), e.w))
                .collect(),
            Le,
            self.m,
        ));
        rows
    }

    /// Full variable vector for relaxed labels `y`, with every `z` set to its
    /// tightest value.
    pub fn primal_from_labels(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.num_variables()];
        for i in 0..self.n {
            x[self.y_var(i)] = y[i];
            x[self.flip_var(i)] = (y[i] - f64::from(self.original[i])).abs();
        }
        for (k, e) in self.edges.iter().enumerate() {
            x[self.edge_var(k)] = (y[e.i] - y[e.j]).abs();
        }
        x
    }

    /// Largest constraint or bound violation of the full vector `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .constraints()
            .iter()
            .map(|c| c.violation(x))
            .fold(0.0, f64::max);
        let bounds = self
            .bounds()
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &v)| (lo - v).max(v - hi).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    /// Writes the problem in CPLEX LP text format, for cross-checking with
    /// external solvers.
    pub fn write_lp_format<W: Write>(&self, mut out: W) -> Result<()> {
        let name = |k: usize| -> String {
            if k < self.n {
                format!("y{k}")
            } else if k < 2 * self.n {
                format!("z{}", k - self.n)
            } else {
                format!("e{}", k - 2 * self.n)
            }
        };
        let mut text = String::new();
        writeln!(text, "\\ relaxed label flipping problem").unwrap();
        writeln!(text, "Minimize").unwrap();
        let obj: Vec<String> = (0..self.n).map(|i| name(self.flip_var(i))).collect();
        if obj.is_empty() {
            writeln!(text, " obj: 0 y0").unwrap();
        } else {
            writeln!(text, " obj: {}", obj.join(" + ")).unwrap();
        }
        writeln!(text, "Subject To").unwrap();
        for (r, c) in self.constraints().iter().enumerate() {
            let mut lhs = String::new();
            for (t, &(k, a)) in c.terms.iter().enumerate() {
                let sign = if a < 0.0 {
                    " -"
                } else if t == 0 {
                    ""
                } else {
                    " +"
                };
                let mag = a.abs();
                if (mag - 1.0).abs() < f64::EPSILON {
                    write!(lhs, "{sign} {}", name(k)).unwrap();
                } else {
                    write!(lhs, "{sign} {mag} {}", name(k)).unwrap();
                }
            }
            if c.terms.is_empty() {
                lhs.push_str(" 0 y0");
            }
            let op = match c.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
            };
            writeln!(text, " c{r}:{lhs} {op} {}", c.rhs + 0.0).unwrap();
        }
        writeln!(text, "Bounds").unwrap();
        for (k, (lo, hi)) in self.bounds().into_iter().enumerate() {
            if lo == hi {
                writeln!(text, " {} = {lo}", name(k)).unwrap();
            } else {
                writeln!(text, " {lo} <= {} <= {hi}", name(k)).unwrap();
            }
        }
        writeln!(text, "End").unwrap();
        out.write_all(text.as_bytes())?;
        Ok(())
    }
}
