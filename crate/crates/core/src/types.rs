//! Domain types shared by every stage: datasets, similarity graphs, label
//! vectors, fractional LP solutions, repair configuration and reports.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{GradientConfig, IlpMode};
use crate::error::{Error, Result};
use crate::lp::LpBackend;

pub const DEFAULT_SOLVER_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MERGE_EPSILON: f64 = 1e-7;

/// Slack used when comparing a recomputed total error against `m`, so that
/// sums which are mathematically equal to `m` are not rejected over the
/// last few ulps.
pub(crate) fn budget_slack(m: f64) -> f64 {
    1e-12 * m.abs().max(1.0)
}

pub(crate) fn check_labels(labels: &[u8]) -> Result<()> {
    match labels.iter().position(|&l| l > 1) {
        Some(index) => Err(Error::InvalidLabel {
            index,
            value: labels[index],
        }),
        None => Ok(()),
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}

/// A feature matrix with binary labels.
///
/// Columns listed in `excluded_cols` (typically sensitive attributes) are
/// kept in the data but ignored when measuring distances.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<u8>,
    excluded_cols: BTreeSet<usize>,
    ids: Option<Vec<String>>,
    feature_names: Vec<String>,
    label_name: String,
    label_position: usize,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::EmptyDataset);
        }
        check_len(features.len(), labels.len())?;
        let d = features[0].len();
        if d == 0 {
            return Err(Error::InvalidConfig(
                "dataset needs at least one feature column".into(),
            ));
        }
        for (row, values) in features.iter().enumerate() {
            check_len(d, values.len())?;
            if let Some(col) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteFeature { row, col });
            }
        }
        check_labels(&labels)?;
        Ok(Self {
            features,
            labels,
            excluded_cols: BTreeSet::new(),
            ids: None,
            feature_names: (0..d).map(|c| format!("x{}", c + 1)).collect(),
            label_name: "label".to_string(),
            label_position: d,
        })
    }

    pub fn with_excluded_cols(mut self, excluded: impl IntoIterator<Item = usize>) -> Result<Self> {
        let excluded: BTreeSet<usize> = excluded.into_iter().collect();
        if let Some(&bad) = excluded.iter().find(|&&c| c >= self.num_features()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                n: self.num_features(),
            });
        }
        self.excluded_cols = excluded;
        Ok(self)
    }

    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self> {
        check_len(self.len(), ids.len())?;
        self.ids = Some(ids);
        Ok(self)
    }

    /// Column naming used when the dataset is written back to CSV.
    /// `label_position` is the index of the label column among all columns.
    pub fn with_column_names(
        mut self,
        feature_names: Vec<String>,
        label_name: impl Into<String>,
        label_position: usize,
    ) -> Result<Self> {
        check_len(self.num_features(), feature_names.len())?;
        if label_position > self.num_features() {
            return Err(Error::IndexOutOfRange {
                index: label_position,
                n: self.num_features() + 1,
            });
        }
        self.feature_names = feature_names;
        self.label_name = label_name.into();
        self.label_position = label_position;
        Ok(self)
    }

    /// Same rows and metadata with a replaced label vector.
    pub fn with_labels(&self, labels: Vec<u8>) -> Result<Self> {
        check_len(self.len(), labels.len())?;
        check_labels(&labels)?;
        Ok(Self {
            labels,
            ..self.clone()
        })
    }

    /// Rows selected by index, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.len()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                n: self.len(),
            });
        }
        Ok(Self {
            features: rows.iter().map(|&r| self.features[r].clone()).collect(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            ids: self
                .ids
                .as_ref()
                .map(|ids| rows.iter().map(|&r| ids[r].clone()).collect()),
            ..self.clone()
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.features[0].len()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn excluded_cols(&self) -> &BTreeSet<usize> {
        &self.excluded_cols
    }

    pub fn ids(&self) -> Option<&[String]> {
        self.ids.as_deref()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn label_position(&self) -> usize {
        self.label_position
    }

    /// Feature rows restricted to the columns that take part in distances.
    pub fn distance_rows(&self) -> Vec<Vec<f64>> {
        project_rows(&self.features, &self.excluded_cols)
    }
}

pub(crate) fn project_rows(rows: &[Vec<f64>], excluded: &BTreeSet<usize>) -> Vec<Vec<f64>> {
    if excluded.is_empty() {
        return rows.to_vec();
    }
    rows.iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(c, _)| !excluded.contains(c))
                .map(|(_, &v)| v)
                .collect()
        })
        .collect()
}

/// An undirected similarity edge; `i < j` and `w > 0` for a valid graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

impl Edge {
    pub fn new(i: usize, j: usize, w: f64) -> Self {
        Self { i, j, w }
    }
}

/// Sparse similarity matrix stored as an undirected edge list. Each unordered
/// pair appears at most once, so every similar pair is counted once in the
/// total error.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl SimilarityGraph {
    /// Validated constructor. Endpoints are reordered so that `i < j` and the
    /// edge list is sorted by `(i, j)`.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut edges: Vec<Edge> = edges
            .into_iter()
            .map(|e| {
                if e.i > e.j {
                    Edge::new(e.j, e.i, e.w)
                } else {
                    e
                }
            })
            .collect();
        edges.sort_by_key(|e| (e.i, e.j));
        let graph = Self { n, edges };
        validate_graph(&graph, n)?;
        Ok(graph)
    }

    pub fn from_triples(n: usize, triples: &[(usize, usize, f64)]) -> Result<Self> {
        Self::new(
            n,
            triples
                .iter()
                .map(|&(i, j, w)| Edge::new(i, j, w))
                .collect(),
        )
    }

    /// Builds a graph without any validation. Use [`validate_graph`] to check it.
    pub fn from_raw_parts(n: usize, edges: Vec<Edge>) -> Self {
        Self { n, edges }
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().fold(0.0, |acc, e| acc + e.w)
    }

    pub fn adjacency(&self) -> Adjacency {
        Adjacency::new(self)
    }

    /// Graph with node indices relabeled by `perm` (node `i` becomes `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_len(self.n, perm.len())?;
        Self::new(
            self.n,
            self.edges
                .iter()
                .map(|e| Edge::new(perm[e.i], perm[e.j], e.w))
                .collect(),
        )
    }
}

/// Compressed adjacency lists of a [`SimilarityGraph`].
#[derive(Debug, Clone)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

impl Adjacency {
    fn new(graph: &SimilarityGraph) -> Self {
        let n = graph.n;
        let mut degree = vec![0usize; n + 1];
        for e in &graph.edges {
            degree[e.i + 1] += 1;
            degree[e.j + 1] += 1;
        }
        for k in 1..=n {
            degree[k] += degree[k - 1];
        }
        let offsets = degree;
        let mut cursor = offsets.clone();
        let mut targets = vec![0usize; offsets[n]];
        let mut weights = vec![0.0; offsets[n]];
        for e in &graph.edges {
            for (a, b) in [(e.i, e.j), (e.j, e.i)] {
                targets[cursor[a]] = b;
                weights[cursor[a]] = e.w;
                cursor[a] += 1;
            }
        }
        Self {
            offsets,
            targets,
            weights,
        }
    }

    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[node]..self.offsets[node + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn weighted_degree(&self, node: usize) -> f64 {
        self.weights[self.offsets[node]..self.offsets[node + 1]]
            .iter()
            .sum()
    }
}

/// Checks the similarity graph invariants against a node count `n`.
pub fn validate_graph(graph: &SimilarityGraph, n: usize) -> Result<()> {
    let mut seen = HashSet::with_capacity(graph.edges.len());
    for e in &graph.edges {
        for index in [e.i, e.j] {
            if index >= n {
                return Err(Error::IndexOutOfRange { index, n });
            }
        }
        if e.i == e.j {
            return Err(Error::SelfLoop(e.i));
        }
        if !(e.w > 0.0 && e.w.is_finite()) {
            return Err(Error::NonPositiveWeight {
                i: e.i,
                j: e.j,
                w: e.w,
            });
        }
        if !seen.insert((e.i.min(e.j), e.i.max(e.j))) {
            return Err(Error::DuplicateEdge { i: e.i, j: e.j });
        }
    }
    if !graph.total_weight().is_finite() {
        return Err(Error::InvalidConfig(
            "total edge weight is not finite".into(),
        ));
    }
    Ok(())
}

/// Repaired labels next to the original ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelVector {
    current: Vec<u8>,
    original: Vec<u8>,
}

impl LabelVector {
    pub fn new(original: Vec<u8>) -> Result<Self> {
        check_labels(&original)?;
        Ok(Self {
            current: original.clone(),
            original,
        })
    }

    pub fn from_parts(current: Vec<u8>, original: Vec<u8>) -> Result<Self> {
        check_len(original.len(), current.len())?;
        check_labels(&current)?;
        check_labels(&original)?;
        Ok(Self { current, original })
    }

    pub fn current(&self) -> &[u8] {
        &self.current
    }

    pub fn original(&self) -> &[u8] {
        &self.original
    }

    pub fn len(&self) -> usize {
        self.current.len()
    }

    pub fn is_empty(&self) -> bool {
        self.current.is_empty()
    }

    pub fn is_flipped(&self, i: usize) -> bool {
        self.current[i] != self.original[i]
    }

    /// Indices whose current label differs from the original, ascending.
    pub fn flip_set(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_flipped(i)).collect()
    }

    pub fn num_flips(&self) -> usize {
        (0..self.len()).filter(|&i| self.is_flipped(i)).count()
    }

    pub(crate) fn toggle(&mut self, i: usize) {
        self.current[i] ^= 1;
    }

    pub fn into_current(self) -> Vec<u8> {
        self.current
    }
}

/// Toggles the current label of every index in `flips`. Repeated indices are
/// treated as a set, so each index is toggled at most once.
pub fn apply_flips(
    labels: &LabelVector,
    flips: impl IntoIterator<Item = usize>,
) -> Result<LabelVector> {
    let flips: BTreeSet<usize> = flips.into_iter().collect();
    let n = labels.len();
    if let Some(&index) = flips.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index, n });
    }
    let mut out = labels.clone();
    for i in flips {
        out.toggle(i);
    }
    Ok(out)
}

/// Per-node LP values in `[0, 1]` along with the LP objective
/// `Σ |values_i − original_i|`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    values: Vec<f64>,
    objective: f64,
    distinct_fractional: Vec<f64>,
}

impl FractionalSolution {
    pub fn new(values: Vec<f64>, original: &[u8]) -> Result<Self> {
        Self::with_merge_epsilon(values, original, DEFAULT_MERGE_EPSILON)
    }

    /// Values within `1e-9` outside `[0, 1]` (solver round-off) are clamped;
    /// anything further out is rejected.
    pub fn with_merge_epsilon(mut values: Vec<f64>, original: &[u8], eps: f64) -> Result<Self> {
        check_len(original.len(), values.len())?;
        check_labels(original)?;
        for (index, v) in values.iter_mut().enumerate() {
            if !v.is_finite() || *v < -1e-9 || *v > 1.0 + 1e-9 {
                return Err(Error::ValueOutOfRange { index, value: *v });
            }
            *v = v.clamp(0.0, 1.0);
        }
        let objective = lp_objective(&values, original);
        let distinct_fractional = distinct_fractional_values(&values, eps);
        Ok(Self {
            values,
            objective,
            distinct_fractional,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    /// Sorted representatives of the values strictly inside `(0, 1)`,
    /// grouped within the merge epsilon.
    pub fn distinct_fractional(&self) -> &[f64] {
        &self.distinct_fractional
    }

    pub fn is_binary(&self) -> bool {
        self.distinct_fractional.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

pub(crate) fn lp_objective(values: &[f64], original: &[u8]) -> f64 {
    values
        .iter()
        .zip(original)
        .map(|(&v, &o)| (v - f64::from(o)).abs())
        .sum()
}

/// Whether `v` counts as a fractional value, i.e. is not within `eps` of 0 or 1.
pub(crate) fn is_fractional(v: f64, eps: f64) -> bool {
    v > eps && v < 1.0 - eps
}

/// Groups sorted fractional values whose consecutive gaps are at most `eps`
/// and returns the smallest member of each group.
pub(crate) fn distinct_fractional_values(values: &[f64], eps: f64) -> Vec<f64> {
    let mut fractional: Vec<f64> = values
        .iter()
        .copied()
        .filter(|&v| is_fractional(v, eps))
        .collect();
    fractional.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for v in fractional {
        if v - last > eps {
            out.push(v);
        }
        last = v;
    }
    out
}

/// Repair algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Iflipper,
    Greedy,
    Gradient,
    Kmeans,
    Ilp,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Iflipper,
        Method::Greedy,
        Method::Gradient,
        Method::Kmeans,
        Method::Ilp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Iflipper => "iflipper",
            Method::Greedy => "greedy",
            Method::Gradient => "gradient",
            Method::Kmeans => "kmeans",
            Method::Ilp => "ilp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepairConfig {
    /// Total error limit.
    pub m: f64,
    pub method: Method,
    pub seed: u64,
    pub solver_tolerance: f64,
    /// Fractional values closer than this are treated as one value.
    pub value_merge_epsilon: f64,
    pub lp_backend: LpBackend,
    pub gradient: GradientConfig,
    pub kmeans_k_range: Vec<usize>,
    pub ilp_mode: IlpMode,
    pub bb_node_limit: usize,
}

impl RepairConfig {
    pub fn new(m: f64, method: Method) -> Self {
        Self {
            m,
            method,
            seed: 0,
            solver_tolerance: DEFAULT_SOLVER_TOLERANCE,
            value_merge_epsilon: DEFAULT_MERGE_EPSILON,
            lp_backend: LpBackend::default(),
            gradient: GradientConfig::default(),
            kmeans_k_range: vec![2, 4, 8, 16, 32, 64],
            ilp_mode: IlpMode::BranchAndBound,
            bb_node_limit: 100_000,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_backend(mut self, backend: LpBackend) -> Self {
        self.lp_backend = backend;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m >= 0.0) {
            return Err(Error::NegativeBudget(self.m));
        }
        if !(self.solver_tolerance > 0.0 && self.value_merge_epsilon > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of one repair run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairReport {
    pub method: Method,
    pub m: f64,
    pub initial_total_error: f64,
    pub final_total_error: f64,
    pub num_flips: usize,
    pub lp_objective: Option<f64>,
    pub rounding_flips: Option<usize>,
    pub bound_c: Option<f64>,
    pub runtime_ms: f64,
    pub feasible: bool,
}

impl RepairReport {
    /// `feasible` is derived: `final_total_error ≤ m + solver_tolerance`.
    pub fn new(
        method: Method,
        m: f64,
        initial_total_error: f64,
        final_total_error: f64,
        num_flips: usize,
        runtime_ms: f64,
        solver_tolerance: f64,
    ) -> Self {
        Self {
            method,
            m,
            initial_total_error,
            final_total_error,
            num_flips,
            lp_objective: None,
            rounding_flips: None,
            bound_c: None,
            runtime_ms,
            feasible: final_total_error <= m + solver_tolerance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_graph_is_valid() {
        let g = SimilarityGraph::from_raw_parts(
            4,
            vec![
                Edge::new(0, 1, 1.0),
                Edge::new(0, 2, 1.0),
                Edge::new(1, 2, 1.0),
            ],
        );
        validate_graph(&g, 4).unwrap();
    }

    #[test]
    fn empty_graph_is_valid() {
        validate_graph(&SimilarityGraph::empty(1), 1).unwrap();
    }

    #[test]
    fn validation_errors() {
        let g = SimilarityGraph::from_raw_parts(2, vec![Edge::new(0, 0, 1.0)]);
        assert!(matches!(validate_graph(&g, 2), Err(Error::SelfLoop(0))));

        let g =
            SimilarityGraph::from_raw_parts(3, vec![Edge::new(0, 1, 1.0), Edge::new(1, 0, 0.5)]);
        assert!(matches!(
            validate_graph(&g, 3),
            Err(Error::DuplicateEdge { .. })
        ));

        let g = SimilarityGraph::from_raw_parts(3, vec![Edge::new(0, 1, 0.0)]);
        assert!(matches!(
            validate_graph(&g, 3),
            Err(Error::NonPositiveWeight { .. })
        ));

        let g = SimilarityGraph::from_raw_parts(3, vec![Edge::new(0, 5, 1.0)]);
        assert!(matches!(
            validate_graph(&g, 3),
            Err(Error::IndexOutOfRange { index: 5, n: 3 })
        ));
    }

    #[test]
    fn constructor_canonicalizes_endpoints() {
        let g = SimilarityGraph::from_triples(3, &[(2, 1, 1.0), (1, 0, 2.0)]).unwrap();
        assert_eq!(g.edges(), &[Edge::new(0, 1, 2.0), Edge::new(1, 2, 1.0)]);
    }

    #[test]
    fn apply_flips_examples() {
        let l = LabelVector::new(vec![1, 0, 0, 1]).unwrap();
        assert_eq!(apply_flips(&l, [0]).unwrap().current(), &[0, 0, 0, 1]);

        let l = LabelVector::new(vec![1, 0]).unwrap();
        assert_eq!(apply_flips(&l, []).unwrap().current(), &[1, 0]);

        let l = LabelVector::new(vec![0]).unwrap();
        let out = apply_flips(&l, [0, 0]).unwrap();
        assert_eq!(out.current(), &[1]);
        assert_eq!(out.original(), &[0]);

        assert!(matches!(
            apply_flips(&l, [3]),
            Err(Error::IndexOutOfRange { index: 3, n: 1 })
        ));
    }

    #[test]
    fn fractional_solution_objective_and_distinct_values() {
        let s = FractionalSolution::new(vec![0.1, 0.0, 0.0, 0.9], &[1, 0, 0, 1]).unwrap();
        assert!((s.objective() - 1.0).abs() < 1e-12);
        assert_eq!(s.distinct_fractional(), &[0.1, 0.9]);

        let s = FractionalSolution::new(vec![0.5, 0.5 + 1e-9, 1.0], &[1, 0, 1]).unwrap();
        assert_eq!(s.distinct_fractional().len(), 1);

        assert!(matches!(
            FractionalSolution::new(vec![1.5], &[1]),
            Err(Error::ValueOutOfRange { index: 0, .. })
        ));
    }

    #[test]
    fn method_parsing() {
        assert_eq!("ILP".parse::<Method>().unwrap(), Method::Ilp);
        assert!(matches!(
            "simplex".parse::<Method>(),
            Err(Error::UnknownMethod(_))
        ));
    }

    #[test]
    fn report_feasibility_is_derived() {
        let r = RepairReport::new(Method::Greedy, 1.0, 3.0, 1.0 + 1e-10, 2, 0.0, 1e-8);
        assert!(r.feasible);
        let r = RepairReport::new(Method::Greedy, 1.0, 3.0, 1.5, 2, 0.0, 1e-8);
        assert!(!r.feasible);
    }

    #[test]
    fn dataset_rejects_bad_input() {
        assert!(matches!(
            Dataset::new(vec![], vec![]),
            Err(Error::EmptyDataset)
        ));
        assert!(matches!(
            Dataset::new(vec![vec![f64::NAN]], vec![0]),
            Err(Error::NonFiniteFeature { row: 0, col: 0 })
        ));
        assert!(matches!(
            Dataset::new(vec![vec![1.0]], vec![2]),
            Err(Error::InvalidLabel { .. })
        ));
        let d = Dataset::new(vec![vec![1.0, 2.0]], vec![1]).unwrap();
        assert!(d.clone().with_excluded_cols([2]).is_err());
        let d = d.with_excluded_cols([0]).unwrap();
        assert_eq!(d.distance_rows(), vec![vec![2.0]]);
    }
}
