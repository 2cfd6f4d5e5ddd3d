//! Choosing `m` to hit a target model consistency.

use serde::{Deserialize, Serialize};

use super::model::{train_and_score, ModelConfig};
use crate::error::{Error, Result};
use crate::metrics::total_error;
use crate::pipeline::{repair, RepairInput};
use crate::types::{Dataset, RepairConfig, SimilarityGraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub m: f64,
    pub achieved: f64,
    pub steps: usize,
}

/// Bisects `m` over `[0, upper]`, assuming `evaluate(m)` (a consistency)
/// tends to fall as `m` grows. Stops once within `tolerance` of `target`,
/// otherwise returns the closest point seen after `max_steps` evaluations.
pub fn binary_search_m<F>(
    upper: f64,
    target: f64,
    tolerance: f64,
    max_steps: usize,
    mut evaluate: F,
) -> Result<SearchOutcome>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "target {target} must be in (0, 1]"
        )));
    }
    if !(upper >= 0.0) || max_steps == 0 {
        return Err(Error::InvalidConfig(
            "need upper ≥ 0 and max_steps ≥ 1".into(),
        ));
    }
    let (mut lo, mut hi) = (0.0, upper);
    let mut best: Option<SearchOutcome> = None;
    for step in 1..=max_steps {
        let m = 0.5 * (lo + hi);
        let achieved = evaluate(m)?;
        let candidate = SearchOutcome {
            m,
            achieved,
            steps: step,
        };
        if best.is_none_or(|b| (achieved - target).abs() < (b.achieved - target).abs()) {
            best = Some(candidate);
        }
        if (achieved - target).abs() <= tolerance {
            return Ok(candidate);
        }
        if achieved < target {
            hi = m;
        } else {
            lo = m;
        }
    }
    let mut out = best.expect("at least one step");
    out.steps = max_steps;
    Ok(out)
}

/// Data and settings for a model-driven search.
pub struct ConsistencySearch<'a> {
    pub train: &'a Dataset,
    pub train_graph: &'a SimilarityGraph,
    pub test: &'a Dataset,
    pub test_graph: &'a SimilarityGraph,
    pub repair: &'a RepairConfig,
    pub model: &'a ModelConfig,
}

impl ConsistencySearch<'_> {
    /// Consistency of a model trained on the training labels repaired at `m`.
    pub fn consistency_at(&self, m: f64) -> Result<f64> {
        let mut config = self.repair.clone();
        config.m = m;
        let (labels, _) = repair(RepairInput::dataset(self.train), self.train_graph, &config)?;
        let repaired = self.train.with_labels(labels.into_current())?;
        Ok(train_and_score(&repaired, self.test, self.test_graph, self.model)?.consistency)
    }

    pub fn run(&self, target: f64, tolerance: f64, max_steps: usize) -> Result<SearchOutcome> {
        let upper = total_error(self.train.labels(), self.train_graph)?;
        binary_search_m(upper, target, tolerance, max_steps, |m| {
            self.consistency_at(m)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_a_monotone_target() {
        // consistency falls linearly from 1 at m = 0 to 0.5 at m = 100
        let f = |m: f64| Ok(1.0 - m / 200.0);
        let out = binary_search_m(100.0, 0.8, 0.01, 20, f).unwrap();
        assert!((out.achieved - 0.8).abs() <= 0.01);
        assert!((out.m - 40.0).abs() <= 2.0);
    }

    #[test]
    fn full_consistency_drives_m_to_zero() {
        let f = |m: f64| Ok(if m < 1e-3 { 1.0 } else { 0.9 });
        let out = binary_search_m(10.0, 1.0, 0.0, 20, f).unwrap();
        assert!(out.m < 1e-3);
    }

    #[test]
    fn unreachable_target_returns_closest() {
        let f = |_m: f64| Ok(0.7);
        let out = binary_search_m(10.0, 0.9, 0.01, 5, f).unwrap();
        assert_eq!((out.achieved, out.steps), (0.7, 5));
        assert!(binary_search_m(10.0, 0.0, 0.01, 5, f).is_err());
    }
}
