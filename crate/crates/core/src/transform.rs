//! Conversion of an optimal LP solution into an equally optimal one whose
//! values lie in `{0, α, 1}`.
//!
//! Nodes sharing a fractional value form a cluster. A cluster whose members
//! are balanced between original labels 0 and 1 (`N = 0`) can move to an
//! adjacent neighbour value without changing the objective. Two unbalanced
//! clusters can be moved together at rates that cancel in the objective.
//! In both cases the direction is chosen so the relaxed total error does not
//! increase, and each step removes at least one distinct fractional value.

use crate::error::{Error, Result};
use crate::metrics::fractional_total_error;
use crate::types::{
    check_labels, check_len, is_fractional, Adjacency, FractionalSolution, SimilarityGraph,
    DEFAULT_MERGE_EPSILON,
};

/// A group of nodes sharing one fractional value, together with how it is
/// connected to the rest of the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterInfo {
    pub value: f64,
    pub members: Vec<usize>,
    /// Members whose original label is 0.
    pub a0: usize,
    /// Members whose original label is 1.
    pub a1: usize,
    /// `a0 − a1`: the objective grows by `n · ε` when the value rises by `ε`.
    pub n: i64,
    /// `(value, weight)` for every edge leaving the cluster.
    pub neighbor_values: Vec<(f64, f64)>,
    /// Largest neighbour value below `value`, or 0.
    pub lower: f64,
    /// Smallest neighbour value above `value`, or 1.
    pub upper: f64,
    /// Weight to lower neighbours minus weight to upper neighbours: the
    /// relaxed error grows by `s · ε` when the value rises by `ε`.
    pub s: f64,
}

/// Two unbalanced clusters viewed relative to each other: each excludes the
/// partner from its neighbours, and `e` is the weight between them.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPair {
    pub alpha: ClusterInfo,
    pub beta: ClusterInfo,
    pub e: f64,
    /// `N_α / N_β`
    pub x: f64,
    /// Rate of change of the relaxed error per unit increase of `α`.
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    OneCluster,
    TwoClusters,
}

/// One conversion step, recorded by [`Converter::convert_traced`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConversionStep {
    pub kind: StepKind,
    /// Cluster values before the step.
    pub from: Vec<f64>,
    /// The corresponding values after the step.
    pub to: Vec<f64>,
    pub objective: f64,
    pub fractional_error: f64,
}

/// Conversion settings. The free functions in this module use the defaults.
#[derive(Debug, Clone, Copy)]
pub struct Converter {
    /// Fractional values closer than this are one cluster; values this close
    /// to 0 or 1 count as binary.
    pub merge_epsilon: f64,
}

impl Default for Converter {
    fn default() -> Self {
        Self {
            merge_epsilon: DEFAULT_MERGE_EPSILON,
        }
    }
}

struct Ctx<'a> {
    original: &'a [u8],
    adj: Adjacency,
    eps: f64,
}

impl Ctx<'_> {
    /// Groups fractional nodes by value; returns member lists sorted by value.
    fn groups(&self, values: &[f64]) -> Vec<Vec<usize>> {
        let mut nodes: Vec<usize> = (0..values.len())
            .filter(|&i| is_fractional(values[i], self.eps))
            .collect();
        nodes.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut last = f64::NEG_INFINITY;
        for i in nodes {
            if values[i] - last > self.eps {
                groups.push(Vec::new());
            }
            last = values[i];
            groups.last_mut().expect("group exists").push(i);
        }
        groups
    }

    /// Cluster summary for `members`; neighbours flagged in `skip` (the
    /// cluster itself and an optional partner) are ignored.
    fn view(&self, values: &[f64], members: &[usize], skip: &[bool]) -> ClusterInfo {
        let value = members.iter().map(|&i| values[i]).sum::<f64>() / members.len() as f64;
        let a1 = members.iter().filter(|&&i| self.original[i] == 1).count();
        let a0 = members.len() - a1;
        let mut neighbor_values = Vec::new();
        let (mut lower, mut upper, mut s) = (0.0f64, 1.0f64, 0.0);
        for &i in members {
            for (j, w) in self.adj.neighbors(i) {
                if skip[j] {
                    continue;
                }
                let v = values[j];
                neighbor_values.push((v, w));
                if v < value {
                    lower = lower.max(v);
                    s += w;
                } else if v > value {
                    upper = upper.min(v);
                    s -= w;
                }
            }
        }
        ClusterInfo {
            value,
            members: members.to_vec(),
            a0,
            a1,
            n: a0 as i64 - a1 as i64,
            neighbor_values,
            lower,
            upper,
            s,
        }
    }

    fn clusters(&self, values: &[f64]) -> Vec<ClusterInfo> {
        let mut skip = vec![false; values.len()];
        self.groups(values)
            .into_iter()
            .map(|members| {
                for &i in &members {
                    skip[i] = true;
                }
                let info = self.view(values, &members, &skip);
                for &i in &members {
                    skip[i] = false;
                }
                info
            })
            .collect()
    }

    fn pair(&self, values: &[f64], a: &[usize], b: &[usize]) -> ClusterPair {
        let mut skip = vec![false; values.len()];
        for &i in a.iter().chain(b) {
            skip[i] = true;
        }
        let alpha = self.view(values, a, &skip);
        let beta = self.view(values, b, &skip);
        let mut in_b = vec![false; values.len()];
        for &i in b {
            in_b[i] = true;
        }
        let e = a
            .iter()
            .flat_map(|&i| self.adj.neighbors(i))
            .filter(|&(j, _)| in_b[j])
            .map(|(_, w)| w)
            .sum();
        let (na, nb) = (alpha.n as f64, beta.n as f64);
        let x = na / nb;
        let y = ((alpha.s - e) * nb - (beta.s + e) * na) / nb;
        ClusterPair {
            alpha,
            beta,
            e,
            x,
            y,
        }
    }
}

/// Moves a balanced cluster onto its upper neighbour value when that does
/// not raise the error (`s ≤ 0`), otherwise onto its lower one.
fn one_cluster_step(values: &mut [f64], c: &ClusterInfo) -> f64 {
    let target = if c.s <= 0.0 { c.upper } else { c.lower };
    for &i in &c.members {
        values[i] = target;
    }
    target
}

#[derive(Clone, Copy)]
enum Bound {
    Alpha(f64),
    Beta(f64),
    Merge(f64),
}

/// Moves two unbalanced clusters so that the objective is unchanged and the
/// relaxed error does not increase, until one of them meets a neighbour
/// value or the two meet. Returns the new `(α, β)`.
fn two_cluster_step(values: &mut [f64], p: &ClusterPair) -> (f64, f64) {
    let (a, b) = (&p.alpha, &p.beta);
    let (alpha, beta) = (a.value, b.value);
    let (na, nb) = (a.n as f64, b.n as f64);
    let x = p.x;
    let merged = (alpha * na + beta * nb) / (na + nb);
    let merge_step = nb * (beta - alpha) / (na + nb);

    // (step for α, candidate bounds); β always moves by |X| times α's step.
    let alpha_up = p.y <= 0.0;
    let mut bounds: Vec<(f64, Bound)> = Vec::with_capacity(3);
    if alpha_up {
        bounds.push((a.upper - alpha, Bound::Alpha(a.upper)));
    } else {
        bounds.push((alpha - a.lower, Bound::Alpha(a.lower)));
    }
    let beta_up = if x < 0.0 { alpha_up } else { !alpha_up };
    let ratio = (nb / na).abs();
    if beta_up {
        bounds.push((ratio * (b.upper - beta), Bound::Beta(b.upper)));
    } else {
        bounds.push((ratio * (beta - b.lower), Bound::Beta(b.lower)));
    }
    // the two values approach each other only in these cases
    let approaching = match (x < 0.0, alpha_up) {
        (true, true) => 1.0 + x > 0.0,
        (true, false) => 1.0 + x < 0.0,
        (false, true) => true,
        (false, false) => false,
    };
    if approaching {
        bounds.push((merge_step.abs(), Bound::Merge(merged)));
    }
    let (step, bound) = bounds
        .into_iter()
        .min_by(|l, r| l.0.total_cmp(&r.0))
        .expect("at least one bound");

    let beta_step = x.abs() * step;
    let (new_alpha, new_beta) = match bound {
        Bound::Alpha(t) => (
            t,
            if beta_up {
                beta + beta_step
            } else {
                beta - beta_step
            },
        ),
        Bound::Beta(t) => (if alpha_up { alpha + step } else { alpha - step }, t),
        Bound::Merge(v) => (v, v),
    };
    let new_alpha = new_alpha.clamp(0.0, 1.0);
    let new_beta = new_beta.clamp(0.0, 1.0);
    for &i in &a.members {
        values[i] = new_alpha;
    }
    for &i in &b.members {
        values[i] = new_beta;
    }
    (new_alpha, new_beta)
}

impl Converter {
    fn ctx<'a>(&self, original: &'a [u8], graph: &SimilarityGraph) -> Ctx<'a> {
        Ctx {
            original,
            adj: graph.adjacency(),
            eps: self.merge_epsilon,
        }
    }

    fn check(
        &self,
        solution: &FractionalSolution,
        original: &[u8],
        graph: &SimilarityGraph,
    ) -> Result<()> {
        check_len(graph.num_nodes(), solution.values().len())?;
        check_len(graph.num_nodes(), original.len())?;
        check_labels(original)
    }

    fn wrap(&self, values: Vec<f64>, original: &[u8]) -> Result<FractionalSolution> {
        FractionalSolution::with_merge_epsilon(values, original, self.merge_epsilon)
    }

    pub fn summarize_clusters(
        &self,
        solution: &FractionalSolution,
        original: &[u8],
        graph: &SimilarityGraph,
    ) -> Result<Vec<ClusterInfo>> {
        self.check(solution, original, graph)?;
        Ok(self.ctx(original, graph).clusters(solution.values()))
    }

    pub fn summarize_pair(
        &self,
        solution: &FractionalSolution,
        original: &[u8],
        a: &ClusterInfo,
        b: &ClusterInfo,
        graph: &SimilarityGraph,
    ) -> Result<ClusterPair> {
        self.check(solution, original, graph)?;
        Ok(self
            .ctx(original, graph)
            .pair(solution.values(), &a.members, &b.members))
    }

    pub fn transform_one_cluster(
        &self,
        solution: &FractionalSolution,
        original: &[u8],
        cluster: &ClusterInfo,
        graph: &SimilarityGraph,
    ) -> Result<FractionalSolution> {
        self.check(solution, original, graph)?;
        if cluster.n != 0 {
            return Err(Error::PreconditionViolated(format!(
                "one-cluster step needs a balanced cluster, got N = {}",
                cluster.n
            )));
        }
        let ctx = self.ctx(original, graph);
        let mut values = solution.values().to_vec();
        let mut skip = vec![false; values.len()];
        for &i in &cluster.members {
            skip[i] = true;
        }
        let fresh = ctx.view(&values, &cluster.members, &skip);
        one_cluster_step(&mut values, &fresh);
        self.wrap(values, original)
    }

    pub fn transform_two_clusters(
        &self,
        solution: &FractionalSolution,
        original: &[u8],
        a: &ClusterInfo,
        b: &ClusterInfo,
        graph: &SimilarityGraph,
    ) -> Result<FractionalSolution> {
        self.check(solution, original, graph)?;
        if a.n == 0 || b.n == 0 {
            return Err(Error::PreconditionViolated(
                "two-cluster step needs two unbalanced clusters".into(),
            ));
        }
        if !(a.value < b.value) {
            return Err(Error::PreconditionViolated(
                "first cluster must have the smaller value".into(),
            ));
        }
        let ctx = self.ctx(original, graph);
        let mut values = solution.values().to_vec();
        let pair = ctx.pair(&values, &a.members, &b.members);
        two_cluster_step(&mut values, &pair);
        self.wrap(values, original)
    }

    /// Repeatedly applies the one- and two-cluster steps until at most one
    /// fractional value remains.
    pub fn convert(
        &self,
        solution: &FractionalSolution,
        original: &[u8],
        graph: &SimilarityGraph,
    ) -> Result<FractionalSolution> {
        self.run(solution, original, graph, None)
    }

    /// Like [`Converter::convert`] but also returns every step taken.
    pub fn convert_traced(
        &self,
        solution: &FractionalSolution,
        original: &[u8],
        graph: &SimilarityGraph,
    ) -> Result<(FractionalSolution, Vec<ConversionStep>)> {
        let mut steps = Vec::new();
        let out = self.run(solution, original, graph, Some(&mut steps))?;
        Ok((out, steps))
    }

    fn run(
        &self,
        solution: &FractionalSolution,
        original: &[u8],
        graph: &SimilarityGraph,
        mut trace: Option<&mut Vec<ConversionStep>>,
    ) -> Result<FractionalSolution> {
        self.check(solution, original, graph)?;
        let ctx = self.ctx(original, graph);
        let mut values = solution.values().to_vec();
        // snap near-binary values, and give each cluster one exact value
        for v in values.iter_mut() {
            if !is_fractional(*v, self.merge_epsilon) {
                *v = v.round();
            }
        }
        for group in ctx.groups(&values) {
            let mean = group.iter().map(|&i| values[i]).sum::<f64>() / group.len() as f64;
            for i in group {
                values[i] = mean;
            }
        }

        let cap = 10 * graph.num_nodes().max(1);
        for _ in 0..cap {
            let clusters = ctx.clusters(&values);
            let (kind, from, to) = if let Some(c) = clusters.iter().find(|c| c.n == 0) {
                let to = one_cluster_step(&mut values, c);
                (StepKind::OneCluster, vec![c.value], vec![to])
            } else if clusters.len() >= 2 {
                let pair = ctx.pair(&values, &clusters[0].members, &clusters[1].members);
                let (na, nb) = two_cluster_step(&mut values, &pair);
                (
                    StepKind::TwoClusters,
                    vec![pair.alpha.value, pair.beta.value],
                    vec![na, nb],
                )
            } else {
                return self.wrap(values, original);
            };
            if let Some(steps) = trace.as_deref_mut() {
                let sol = self.wrap(values.clone(), original)?;
                steps.push(ConversionStep {
                    kind,
                    from,
                    to,
                    objective: sol.objective(),
                    fractional_error: fractional_total_error(sol.values(), graph)?,
                });
            }
        }
        Err(Error::NonConvergence(cap))
    }
}

pub fn summarize_clusters(
    solution: &FractionalSolution,
    original: &[u8],
    graph: &SimilarityGraph,
) -> Result<Vec<ClusterInfo>> {
    Converter::default().summarize_clusters(solution, original, graph)
}

pub fn transform_one_cluster(
    solution: &FractionalSolution,
    original: &[u8],
    cluster: &ClusterInfo,
    graph: &SimilarityGraph,
) -> Result<FractionalSolution> {
    Converter::default().transform_one_cluster(solution, original, cluster, graph)
}

pub fn transform_two_clusters(
    solution: &FractionalSolution,
    original: &[u8],
    a: &ClusterInfo,
    b: &ClusterInfo,
    graph: &SimilarityGraph,
) -> Result<FractionalSolution> {
    Converter::default().transform_two_clusters(solution, original, a, b, graph)
}

pub fn convert_solution(
    solution: &FractionalSolution,
    original: &[u8],
    graph: &SimilarityGraph,
) -> Result<FractionalSolution> {
    Converter::default().convert(solution, original, graph)
}
