//! Rounding a `{0, α, 1}` solution to labels, and the unflipping pass that
//! follows it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{fractional_total_error, total_error};
use crate::types::{
    budget_slack, check_len, is_fractional, FractionalSolution, LabelVector, SimilarityGraph,
    DEFAULT_MERGE_EPSILON,
};

/// What [`adaptive_round`] saw and decided.
///
/// Edge weights are summed by the kind of values at their endpoints
/// (`m01`: 0 with 1, `m0a`: 0 with α, `m1a`: 1 with α), so the relaxed error
/// is `m01 + α·m0a + (1 − α)·m1a`. Node counts are by original label and
/// value: `n0a` original 0 now at α, `n01` original 0 now at 1, and so on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingSummary {
    pub alpha: Option<f64>,
    pub m01: f64,
    pub m0a: f64,
    pub m1a: f64,
    pub rounded_to: Option<u8>,
    pub n0a: usize,
    pub n1a: usize,
    pub n01: usize,
    pub n10: usize,
    pub bound_c: f64,
}

#[derive(Clone, Copy, PartialEq)]
enum Level {
    Zero,
    One,
    Alpha,
}

/// Rounds every α-valued node to 1 when `m0a ≤ m1a`, otherwise to 0. Either
/// choice lowers the relaxed error linearly, so the result stays within `m`.
pub fn adaptive_round(
    solution: &FractionalSolution,
    original: &[u8],
    graph: &SimilarityGraph,
    m: f64,
) -> Result<(LabelVector, RoundingSummary)> {
    check_len(graph.num_nodes(), solution.values().len())?;
    check_len(graph.num_nodes(), original.len())?;
    let distinct = solution.distinct_fractional();
    if distinct.len() > 1 {
        return Err(Error::PreconditionViolated(format!(
            "expected at most one fractional value, found {}",
            distinct.len()
        )));
    }
    let relaxed = fractional_total_error(solution.values(), graph)?;
    if relaxed > m + 1e-7 * m.max(1.0) {
        return Err(Error::PreconditionViolated(format!(
            "relaxed error {relaxed} exceeds the limit {m}"
        )));
    }

    let levels: Vec<Level> = solution
        .values()
        .iter()
        .map(|&v| {
            if is_fractional(v, DEFAULT_MERGE_EPSILON) {
                Level::Alpha
            } else if v >= 0.5 {
                Level::One
            } else {
                Level::Zero
            }
        })
        .collect();
    let alpha = distinct.first().map(|_| {
        let members: Vec<f64> = solution
            .values()
            .iter()
            .zip(&levels)
            .filter(|(_, &l)| l == Level::Alpha)
            .map(|(&v, _)| v)
            .collect();
        members.iter().sum::<f64>() / members.len() as f64
    });

    let (mut m01, mut m0a, mut m1a) = (0.0, 0.0, 0.0);
    for e in graph.edges() {
        match (levels[e.i], levels[e.j]) {
            (Level::Zero, Level::One) | (Level::One, Level::Zero) => m01 += e.w,
            (Level::Zero, Level::Alpha) | (Level::Alpha, Level::Zero) => m0a += e.w,
            (Level::One, Level::Alpha) | (Level::Alpha, Level::One) => m1a += e.w,
            _ => {}
        }
    }
    let rounded_to = alpha.map(|_| if m0a <= m1a { 1u8 } else { 0u8 });

    let mut summary = RoundingSummary {
        alpha,
        m01,
        m0a,
        m1a,
        rounded_to,
        n0a: 0,
        n1a: 0,
        n01: 0,
        n10: 0,
        bound_c: 0.0,
    };
    let mut labels = Vec::with_capacity(original.len());
    for (&level, &orig) in levels.iter().zip(original) {
        let label = match level {
            Level::Zero => 0,
            Level::One => 1,
            Level::Alpha => rounded_to.expect("alpha present"),
        };
        match (level, orig) {
            (Level::Alpha, 0) => summary.n0a += 1,
            (Level::Alpha, _) => summary.n1a += 1,
            (Level::One, 0) => summary.n01 += 1,
            (Level::Zero, 1) => summary.n10 += 1,
            _ => {}
        }
        labels.push(label);
    }
    summary.bound_c = optimality_gap_bound(&summary);
    Ok((LabelVector::from_parts(labels, original.to_vec())?, summary))
}

/// How many more flips than the exact optimum the rounded labels can use.
pub fn optimality_gap_bound(summary: &RoundingSummary) -> f64 {
    let (n0a, n1a) = (summary.n0a as f64, summary.n1a as f64);
    match (summary.alpha, summary.rounded_to) {
        (Some(alpha), Some(1)) => (1.0 - alpha) * (n0a - n1a),
        (Some(alpha), Some(_)) => alpha * (n1a - n0a),
        _ => 0.0,
    }
}

/// Restores original labels one at a time, always choosing the flipped node
/// whose restoration raises the total error least (lowest index on ties),
/// and stops before the error would exceed `m`.
pub fn reverse_greedy(
    labels: &LabelVector,
    graph: &SimilarityGraph,
    m: f64,
) -> Result<LabelVector> {
    let start = total_error(labels.current(), graph)?;
    let slack = budget_slack(m);
    if start > m + slack {
        return Err(Error::PreconditionViolated(format!(
            "input error {start} exceeds the limit {m}"
        )));
    }
    let adj = graph.adjacency();
    let mut out = labels.clone();
    let mut error = start;
    let n = out.len();
    let delta_of = |out: &LabelVector, i: usize| -> f64 {
        let cur = out.current();
        adj.neighbors(i)
            .map(|(j, w)| if cur[i] == cur[j] { w } else { -w })
            .sum()
    };
    let mut flipped = vec![false; n];
    let mut delta = vec![0.0; n];
    for i in out.flip_set() {
        flipped[i] = true;
        delta[i] = delta_of(&out, i);
    }
    let mut remaining: Vec<usize> = out.flip_set();
    while !remaining.is_empty() {
        let (pos, &best) = remaining
            .iter()
            .enumerate()
            .min_by(|(_, &a), (_, &b)| delta[a].total_cmp(&delta[b]).then(a.cmp(&b)))
            .expect("non-empty");
        if error + delta[best] > m + slack {
            break;
        }
        error += delta[best];
        out.toggle(best);
        flipped[best] = false;
        remaining.swap_remove(pos);
        for (j, _) in adj.neighbors(best) {
            if flipped[j] {
                delta[j] = delta_of(&out, j);
            }
        }
    }
    Ok(out)
}
