//! Comparison methods: greedy flipping, projected gradient descent on a
//! penalised objective, k-means label smoothing, and an exact ILP solver.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{build_lp, LpProblem, LpSolver, ParametricCutSolver};
use crate::metrics::total_error;
use crate::rounding::{adaptive_round, reverse_greedy};
use crate::transform::convert_solution;
use crate::types::{
    budget_slack, check_labels, check_len, Adjacency, Dataset, LabelVector, SimilarityGraph,
};

/// Largest instance the exhaustive solver accepts.
pub const EXHAUSTIVE_MAX_NODES: usize = 22;

/// Error change from toggling node `i` under `labels`.
fn toggle_delta(adj: &Adjacency, labels: &[u8], i: usize) -> f64 {
    adj.neighbors(i)
        .map(|(j, w)| if labels[i] == labels[j] { w } else { -w })
        .sum()
}

/// Flips the single label that reduces the total error most until the
/// error is at most `m` or no flip strictly helps. Returns the labels and
/// whether they meet the limit.
pub fn greedy_repair(
    labels: &[u8],
    graph: &SimilarityGraph,
    m: f64,
) -> Result<(LabelVector, bool)> {
    let mut error = total_error(labels, graph)?;
    let slack = budget_slack(m);
    let adj = graph.adjacency();
    let mut out = LabelVector::new(labels.to_vec())?;
    let mut delta: Vec<f64> = (0..labels.len())
        .map(|i| toggle_delta(&adj, out.current(), i))
        .collect();
    // ignore reductions that are only round-off
    let strict = -1e-12 * graph.total_weight().max(1.0);
    while error > m + slack {
        let best = (0..delta.len())
            .filter(|&i| delta[i] < strict)
            .min_by(|&a, &b| delta[a].total_cmp(&delta[b]).then(a.cmp(&b)));
        let Some(i) = best else { break };
        out.toggle(i);
        error += delta[i];
        delta[i] = -delta[i];
        for (j, _) in adj.neighbors(i) {
            delta[j] = toggle_delta(&adj, out.current(), j);
        }
    }
    let error = total_error(out.current(), graph)?;
    Ok((out, error <= m + slack))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientConfig {
    /// Penalty weights tried in turn.
    pub lambda_sweep: Vec<f64>,
    /// Upper limit on the step size; the actual step is also capped by the
    /// inverse smoothness constant so descent never oscillates.
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Relaxed values at or above this become label 1.
    pub rounding_threshold: f64,
}

impl Default for GradientConfig {
    fn default() -> Self {
        Self {
            lambda_sweep: vec![0.01, 0.1, 1.0, 10.0, 100.0],
            learning_rate: 0.1,
            max_iters: 500,
            rounding_threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientOutcome {
    pub labels: LabelVector,
    pub feasible: bool,
    /// Penalty weight that produced `labels`.
    pub lambda: f64,
}

/// Projected gradient descent on
/// `Σ (y_i − y'_i)² + λ Σ w (y_i − y_j)²` over `y ∈ [0, 1]ⁿ`.
pub fn gradient_descent(
    labels: &[u8],
    graph: &SimilarityGraph,
    lambda: f64,
    config: &GradientConfig,
) -> Result<Vec<f64>> {
    check_len(graph.num_nodes(), labels.len())?;
    check_labels(labels)?;
    if !(config.learning_rate > 0.0) || config.max_iters == 0 || !(lambda >= 0.0) {
        return Err(Error::InvalidConfig(
            "gradient descent needs learning_rate > 0, max_iters ≥ 1 and λ ≥ 0".into(),
        ));
    }
    let adj = graph.adjacency();
    let n = labels.len();
    let max_degree = (0..n).map(|i| adj.weighted_degree(i)).fold(0.0, f64::max);
    let smoothness = 2.0 + 4.0 * lambda * max_degree;
    let step = config.learning_rate.min(1.0 / smoothness);
    let target: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
    let mut y = target.clone();
    let mut grad = vec![0.0; n];
    for _ in 0..config.max_iters {
        for i in 0..n {
            let smooth: f64 = adj.neighbors(i).map(|(j, w)| w * (y[i] - y[j])).sum();
            grad[i] = 2.0 * (y[i] - target[i]) + 2.0 * lambda * smooth;
        }
        let mut moved = 0.0f64;
        for i in 0..n {
            let next = (y[i] - step * grad[i]).clamp(0.0, 1.0);
            moved = moved.max((next - y[i]).abs());
            y[i] = next;
        }
        if moved < 1e-12 {
            break;
        }
    }
    Ok(y)
}

/// Runs [`gradient_descent`] for every λ in the sweep and keeps the feasible
/// result with the fewest flips, or else the one with the lowest error.
pub fn gradient_repair(
    labels: &[u8],
    graph: &SimilarityGraph,
    m: f64,
    config: &GradientConfig,
) -> Result<GradientOutcome> {
    if config.lambda_sweep.is_empty() {
        return Err(Error::InvalidConfig("empty λ sweep".into()));
    }
    let slack = budget_slack(m);
    let mut best: Option<(GradientOutcome, f64)> = None;
    for &lambda in &config.lambda_sweep {
        let y = gradient_descent(labels, graph, lambda, config)?;
        let rounded: Vec<u8> = y
            .iter()
            .map(|&v| u8::from(v >= config.rounding_threshold))
            .collect();
        let error = total_error(&rounded, graph)?;
        let candidate = GradientOutcome {
            labels: LabelVector::from_parts(rounded, labels.to_vec())?,
            feasible: error <= m + slack,
            lambda,
        };
        let better = match &best {
            None => true,
            Some((current, current_error)) => match (candidate.feasible, current.feasible) {
                (true, false) => true,
                (false, true) => false,
                (true, true) => candidate.labels.num_flips() < current.labels.num_flips(),
                (false, false) => {
                    error < *current_error
                        || (error == *current_error
                            && candidate.labels.num_flips() < current.labels.num_flips())
                }
            },
        };
        if better {
            best = Some((candidate, error));
        }
    }
    Ok(best.expect("non-empty sweep").0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansOutcome {
    pub labels: LabelVector,
    pub feasible: bool,
    /// Cluster count that produced `labels`; `None` if every k was dropped.
    pub chosen_k: Option<usize>,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = squared_distance(point, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn kmeans_plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centers = vec![points[rng.gen_range(0..points.len())].clone()];
    let mut dist: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &centers[0]))
        .collect();
    while centers.len() < k {
        let idx = match WeightedIndex::new(&dist) {
            Ok(w) => w.sample(rng),
            Err(_) => rng.gen_range(0..points.len()),
        };
        centers.push(points[idx].clone());
        let last = centers.last().expect("just pushed");
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min(squared_distance(p, last));
        }
    }
    centers
}

/// Lloyd's algorithm; `None` when a cluster ends up empty.
fn lloyd(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    let mut centers = kmeans_plus_plus(points, k, rng);
    let dims = points[0].len();
    let mut assignment: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
    for _ in 0..300 {
        let mut sums = vec![vec![0.0; dims]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(p) {
                *s += x;
            }
        }
        if counts.contains(&0) {
            return None;
        }
        for ((center, sum), &count) in centers.iter_mut().zip(sums).zip(&counts) {
            *center = sum.into_iter().map(|s| s / count as f64).collect();
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
        if next == assignment {
            return Some(assignment);
        }
        assignment = next;
    }
    let mut counts = vec![0usize; k];
    for &c in &assignment {
        counts[c] += 1;
    }
    (!counts.contains(&0)).then_some(assignment)
}

/// Majority original label per cluster, ties to 0.
fn majority_labels(assignment: &[usize], original: &[u8], k: usize) -> Vec<u8> {
    let mut ones = vec![0usize; k];
    let mut sizes = vec![0usize; k];
    for (&c, &l) in assignment.iter().zip(original) {
        sizes[c] += 1;
        ones[c] += usize::from(l);
    }
    assignment
        .iter()
        .map(|&c| u8::from(2 * ones[c] > sizes[c]))
        .collect()
}

/// Clusters the rows with k-means for each `k` in `k_range` and gives every
/// member the majority label of its cluster. Returns the feasible `k` with
/// the fewest flips, or the lowest-error one when none is feasible.
pub fn kmeans_repair(
    dataset: &Dataset,
    graph: &SimilarityGraph,
    m: f64,
    k_range: &[usize],
    seed: u64,
) -> Result<KmeansOutcome> {
    if k_range.is_empty() {
        return Err(Error::InvalidConfig("empty k range".into()));
    }
    check_len(graph.num_nodes(), dataset.len())?;
    let original = dataset.labels();
    let points = dataset.distance_rows();
    let slack = budget_slack(m);
    let mut best: Option<(KmeansOutcome, f64)> = None;
    for &k in k_range {
        if k == 0 || k > points.len() {
            log::warn!("skipping k = {k} for {} rows", points.len());
            continue;
        }
        let mut assignment = None;
        for attempt in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).rotate_left(17) ^ attempt);
            assignment = lloyd(&points, k, &mut rng);
            if assignment.is_some() {
                break;
            }
        }
        let Some(assignment) = assignment else {
            log::warn!("k = {k} keeps producing empty clusters; dropped");
            continue;
        };
        let labels = majority_labels(&assignment, original, k);
        let error = total_error(&labels, graph)?;
        let candidate = KmeansOutcome {
            labels: LabelVector::from_parts(labels, original.to_vec())?,
            feasible: error <= m + slack,
            chosen_k: Some(k),
        };
        let better = match &best {
            None => true,
            Some((cur, cur_error)) => match (candidate.feasible, cur.feasible) {
                (true, false) => true,
                (false, true) => false,
                (true, true) => candidate.labels.num_flips() < cur.labels.num_flips(),
                (false, false) => error < *cur_error,
            },
        };
        if better {
            best = Some((candidate, error));
        }
    }
    match best {
        Some((outcome, _)) => Ok(outcome),
        None => {
            let labels = LabelVector::new(original.to_vec())?;
            let feasible = total_error(original, graph)? <= m + slack;
            Ok(KmeansOutcome {
                labels,
                feasible,
                chosen_k: None,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IlpMode {
    /// Enumerates every labeling (at most [`EXHAUSTIVE_MAX_NODES`] nodes).
    Exhaustive,
    /// Best-first branch and bound on the LP relaxation.
    #[default]
    BranchAndBound,
}

/// Minimum-flip labels with total error at most `m`.
pub fn ilp_exact_repair(
    labels: &[u8],
    graph: &SimilarityGraph,
    m: f64,
    mode: IlpMode,
    node_limit: usize,
) -> Result<LabelVector> {
    if !(m >= 0.0) {
        return Err(Error::NegativeBudget(m));
    }
    check_len(graph.num_nodes(), labels.len())?;
    check_labels(labels)?;
    let best = match mode {
        IlpMode::Exhaustive => exhaustive(labels, graph, m)?,
        IlpMode::BranchAndBound => branch_and_bound(labels, graph, m, node_limit)?,
    };
    LabelVector::from_parts(best, labels.to_vec())
}

/// Gray-code walk over all labelings with incremental error bookkeeping.
fn exhaustive(labels: &[u8], graph: &SimilarityGraph, m: f64) -> Result<Vec<u8>> {
    let n = labels.len();
    if n > EXHAUSTIVE_MAX_NODES {
        return Err(Error::InstanceTooLarge {
            n,
            max: EXHAUSTIVE_MAX_NODES,
        });
    }
    let slack = budget_slack(m);
    let adj = graph.adjacency();
    let mut cur = labels.to_vec();
    let mut error = total_error(&cur, graph)?;
    let mut flips = 0usize;
    let mut best: Option<(usize, Vec<u8>)> = None;
    let consider = |cur: &[u8], error: f64, flips: usize, best: &mut Option<(usize, Vec<u8>)>| {
        if best.as_ref().is_some_and(|(b, _)| flips >= *b) || error > m + slack + 1e-9 {
            return Ok::<(), Error>(());
        }
        // the running sum may drift; confirm with an exact recount
        if total_error(cur, graph)? <= m + slack {
            *best = Some((flips, cur.to_vec()));
        }
        Ok(())
    };
    consider(&cur, error, flips, &mut best)?;
    for step in 1u64..(1u64 << n) {
        let bit = step.trailing_zeros() as usize;
        error += toggle_delta(&adj, &cur, bit);
        cur[bit] ^= 1;
        if cur[bit] == labels[bit] {
            flips -= 1;
        } else {
            flips += 1;
        }
        consider(&cur, error, flips, &mut best)?;
    }
    best.map(|(_, l)| l).ok_or(Error::Infeasible)
}

struct Node {
    bound: f64,
    order: usize,
    problem: LpProblem,
    values: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap is a max-heap: smaller bound (then earlier order) first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.order.cmp(&self.order))
    }
}

fn branch_and_bound(
    labels: &[u8],
    graph: &SimilarityGraph,
    m: f64,
    node_limit: usize,
) -> Result<Vec<u8>> {
    let solver = ParametricCutSolver::default();
    let root = build_lp(graph, labels, m)?;
    let flips_of = |l: &[u8]| l.iter().zip(labels).filter(|(a, b)| a != b).count();

    let mut incumbent: Option<(usize, Vec<u8>)> = None;
    let mut heap = BinaryHeap::new();
    let mut order = 0usize;

    let push = |problem: LpProblem,
                heap: &mut BinaryHeap<Node>,
                incumbent: &mut Option<(usize, Vec<u8>)>,
                order: &mut usize|
     -> Result<()> {
        let solution = match solver.solve(&problem) {
            Ok(s) => s,
            Err(Error::Infeasible) => return Ok(()),
            Err(e) => return Err(e),
        };
        // a cheap feasible labeling from this node's relaxation
        let converted = convert_solution(&solution, labels, graph)?;
        let (rounded, _) = adaptive_round(&converted, labels, graph, m)?;
        let repaired = reverse_greedy(&rounded, graph, m)?;
        let flips = repaired.num_flips();
        if incumbent.as_ref().is_none_or(|(b, _)| flips < *b) {
            *incumbent = Some((flips, repaired.into_current()));
        }
        *order += 1;
        heap.push(Node {
            bound: solution.objective(),
            order: *order,
            problem,
            values: solution.into_values(),
        });
        Ok(())
    };

    push(root, &mut heap, &mut incumbent, &mut order)?;
    let mut expanded = 0usize;
    while let Some(node) = heap.pop() {
        let best = incumbent.as_ref().map_or(usize::MAX, |(b, _)| *b);
        // flip counts are integers, so a bound above best − 1 cannot improve
        if (node.bound - 1e-7).ceil() >= best as f64 {
            continue;
        }
        expanded += 1;
        if expanded > node_limit {
            return Err(Error::Timeout(node_limit));
        }
        let branch = node
            .values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 1e-9 && v < 1.0 - 1e-9)
            .min_by(|(a, &va), (b, &vb)| {
                (va - 0.5).abs().total_cmp(&(vb - 0.5).abs()).then(a.cmp(b))
            })
            .map(|(i, _)| i);
        let Some(i) = branch else {
            // integral relaxation: its labeling is optimal for this subtree
            let candidate: Vec<u8> = node.values.iter().map(|&v| u8::from(v >= 0.5)).collect();
            let flips = flips_of(&candidate);
            if flips < best && total_error(&candidate, graph)? <= m + budget_slack(m) {
                incumbent = Some((flips, candidate));
            }
            continue;
        };
        for value in [0u8, 1u8] {
            let child = node.problem.with_fixed(i, value)?;
            push(child, &mut heap, &mut incumbent, &mut order)?;
        }
    }
    incumbent.map(|(_, l)| l).ok_or(Error::Infeasible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{chain, square, triangle_with_isolated};

    #[test]
    fn greedy_examples() {
        let (g, y) = triangle_with_isolated();
        let (out, ok) = greedy_repair(&y, &g, 1.0).unwrap();
        assert!(ok);
        assert_eq!(out.flip_set(), vec![0]);
        assert_eq!(total_error(out.current(), &g).unwrap(), 0.0);

        let (g, y) = chain();
        let (out, ok) = greedy_repair(&y, &g, 0.0).unwrap();
        assert!(!ok);
        assert_eq!(out.num_flips(), 0);

        let (g, y) = square();
        let (out, ok) = greedy_repair(&y, &g, 4.0).unwrap();
        assert!(ok && out.num_flips() == 0);
    }

    #[test]
    fn gradient_on_triangle_reaches_the_unique_minimiser() {
        let (g, y) = triangle_with_isolated();
        let config = GradientConfig::default();
        let v = gradient_descent(&y, &g, 10.0, &config).unwrap();
        // stationary point: s = 11/31 for node 0, t = 10/31 for nodes 1, 2
        assert!((v[0] - 11.0 / 31.0).abs() < 1e-4);
        assert!((v[1] - 10.0 / 31.0).abs() < 1e-4 && (v[2] - 10.0 / 31.0).abs() < 1e-4);
        assert_eq!(v[3], 1.0);
        let out = gradient_repair(
            &y,
            &g,
            0.0,
            &GradientConfig {
                lambda_sweep: vec![10.0],
                ..config
            },
        )
        .unwrap();
        assert!(out.feasible);
        assert_eq!(out.labels.current(), &[0, 0, 0, 1]);
    }

    #[test]
    fn gradient_with_zero_penalty_keeps_labels() {
        let (g, y) = square();
        let v = gradient_descent(&y, &g, 0.0, &GradientConfig::default()).unwrap();
        assert_eq!(v, vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn gradient_sweep_fails_on_chain() {
        let (g, y) = chain();
        let out = gradient_repair(&y, &g, 0.0, &GradientConfig::default()).unwrap();
        assert!(!out.feasible);
    }

    fn line(points: &[f64], labels: &[u8]) -> Dataset {
        Dataset::new(points.iter().map(|&x| vec![x]).collect(), labels.to_vec()).unwrap()
    }

    #[test]
    fn kmeans_examples() {
        let d = line(&[0.0, 0.1, 0.9, 1.0], &[1, 1, 0, 0]);
        let g = SimilarityGraph::from_triples(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let out = kmeans_repair(&d, &g, 0.0, &[2], 7).unwrap();
        assert_eq!(out.chosen_k, Some(2));
        assert_eq!(out.labels.num_flips(), 0);

        let d = line(&[0.0, 1.0, 2.0, 3.0], &[1, 0, 1, 0]);
        let out = kmeans_repair(&d, &SimilarityGraph::empty(4), 0.0, &[1], 7).unwrap();
        assert_eq!(out.labels.current(), &[0, 0, 0, 0]);
        assert_eq!(out.labels.num_flips(), 2);

        let out = kmeans_repair(&d, &SimilarityGraph::empty(4), 0.0, &[4], 7).unwrap();
        assert_eq!(out.labels.num_flips(), 0);
    }

    #[test]
    fn ilp_examples() {
        for mode in [IlpMode::Exhaustive, IlpMode::BranchAndBound] {
            let (g, y) = triangle_with_isolated();
            let out = ilp_exact_repair(&y, &g, 0.0, mode, 1000).unwrap();
            assert_eq!(out.flip_set(), vec![0]);

            let (g, y) = square();
            let out = ilp_exact_repair(&y, &g, 2.0, mode, 1000).unwrap();
            assert_eq!(out.num_flips(), 1);
            assert!(total_error(out.current(), &g).unwrap() <= 2.0);

            let out = ilp_exact_repair(&y, &g, 4.0, mode, 1000).unwrap();
            assert_eq!(out.num_flips(), 0);
        }
    }

    #[test]
    fn exhaustive_rejects_large_instances() {
        let g = SimilarityGraph::empty(23);
        assert!(matches!(
            ilp_exact_repair(&[0; 23], &g, 0.0, IlpMode::Exhaustive, 1),
            Err(Error::InstanceTooLarge { n: 23, .. })
        ));
    }
}
