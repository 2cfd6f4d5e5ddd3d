//! End-to-end repair: LP relaxation, conversion to `{0, α, 1}`, adaptive
//! rounding and reverse greedy, plus a dispatcher over all methods.

use std::time::Instant;

use crate::baselines::{gradient_repair, greedy_repair, ilp_exact_repair, kmeans_repair};
use crate::error::{Error, Result};
use crate::lp::{build_lp, solve_lp};
use crate::metrics::total_error;
use crate::rounding::{adaptive_round, reverse_greedy, RoundingSummary};
use crate::transform::Converter;
use crate::types::{
    Dataset, FractionalSolution, LabelVector, Method, RepairConfig, RepairReport, SimilarityGraph,
};

/// Intermediate results of one [`iflipper_repair_traced`] run.
#[derive(Debug, Clone)]
pub struct IflipperTrace {
    pub lp_solution: FractionalSolution,
    pub converted: FractionalSolution,
    pub rounded: LabelVector,
    pub rounding: RoundingSummary,
}

/// Repairs `labels` so that their total error on `graph` is at most
/// `config.m`, flipping as few labels as the pipeline can manage.
pub fn iflipper_repair(
    labels: &[u8],
    graph: &SimilarityGraph,
    config: &RepairConfig,
) -> Result<(LabelVector, RepairReport)> {
    iflipper_repair_traced(labels, graph, config).map(|(l, r, _)| (l, r))
}

pub fn iflipper_repair_traced(
    labels: &[u8],
    graph: &SimilarityGraph,
    config: &RepairConfig,
) -> Result<(LabelVector, RepairReport, IflipperTrace)> {
    config.validate()?;
    let start = Instant::now();
    let m = config.m;
    let initial = total_error(labels, graph)?;

    let problem = build_lp(graph, labels, m)?;
    let lp_solution = solve_lp(&problem, config.lp_backend)?;
    let converter = Converter {
        merge_epsilon: config.value_merge_epsilon,
    };
    let converted = converter.convert(&lp_solution, labels, graph)?;
    let (rounded, rounding) = adaptive_round(&converted, labels, graph, m)?;
    let repaired = reverse_greedy(&rounded, graph, m)?;

    let final_error = total_error(repaired.current(), graph)?;
    let mut report = RepairReport::new(
        Method::Iflipper,
        m,
        initial,
        final_error,
        repaired.num_flips(),
        start.elapsed().as_secs_f64() * 1e3,
        config.solver_tolerance,
    );
    report.lp_objective = Some(lp_solution.objective());
    report.rounding_flips = Some(rounded.num_flips());
    report.bound_c = Some(rounding.bound_c);
    log::debug!(
        "repair: LP {:.4}, rounding {} flips, final {} flips, error {final_error:.4} / {m}",
        lp_solution.objective(),
        rounded.num_flips(),
        repaired.num_flips()
    );
    let trace = IflipperTrace {
        lp_solution,
        converted,
        rounded,
        rounding,
    };
    Ok((repaired, report, trace))
}

/// Labels to repair, plus the feature rows that k-means needs.
#[derive(Debug, Clone, Copy)]
pub struct RepairInput<'a> {
    pub original: &'a [u8],
    pub dataset: Option<&'a Dataset>,
}

impl<'a> RepairInput<'a> {
    pub fn labels(original: &'a [u8]) -> Self {
        Self {
            original,
            dataset: None,
        }
    }

    pub fn dataset(dataset: &'a Dataset) -> Self {
        Self {
            original: dataset.labels(),
            dataset: Some(dataset),
        }
    }
}

/// Runs `config.method` and returns its labels with a uniform report.
pub fn repair(
    input: RepairInput<'_>,
    graph: &SimilarityGraph,
    config: &RepairConfig,
) -> Result<(LabelVector, RepairReport)> {
    config.validate()?;
    let labels = input.original;
    if config.method == Method::Iflipper {
        return iflipper_repair(labels, graph, config);
    }
    let start = Instant::now();
    let m = config.m;
    let initial = total_error(labels, graph)?;
    let repaired = match config.method {
        Method::Greedy => greedy_repair(labels, graph, m)?.0,
        Method::Gradient => gradient_repair(labels, graph, m, &config.gradient)?.labels,
        Method::Kmeans => {
            let dataset = input.dataset.ok_or_else(|| {
                Error::InvalidConfig("k-means needs feature rows, not just labels".into())
            })?;
            kmeans_repair(dataset, graph, m, &config.kmeans_k_range, config.seed)?.labels
        }
        Method::Ilp => ilp_exact_repair(labels, graph, m, config.ilp_mode, config.bb_node_limit)?,
        Method::Iflipper => unreachable!("handled above"),
    };
    let final_error = total_error(repaired.current(), graph)?;
    let report = RepairReport::new(
        config.method,
        m,
        initial,
        final_error,
        repaired.num_flips(),
        start.elapsed().as_secs_f64() * 1e3,
        config.solver_tolerance,
    );
    Ok((repaired, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{chain, square, triangle_with_isolated};

    #[test]
    fn triangle_needs_one_flip() {
        let (g, y) = triangle_with_isolated();
        let (out, report) =
            iflipper_repair(&y, &g, &RepairConfig::new(0.0, Method::Iflipper)).unwrap();
        assert_eq!(out.flip_set(), vec![0]);
        assert_eq!(report.final_total_error, 0.0);
        assert!(report.feasible);
    }

    #[test]
    fn square_walkthrough() {
        let (g, y) = square();
        let (out, report, trace) =
            iflipper_repair_traced(&y, &g, &RepairConfig::new(2.0, Method::Iflipper)).unwrap();
        assert!((report.lp_objective.unwrap() - 1.0).abs() < 1e-9);
        assert!(trace.converted.distinct_fractional().len() <= 1);
        assert_eq!(report.num_flips, 1);
        assert_eq!(report.final_total_error, 2.0);
        assert_eq!(out.num_flips(), 1);
        assert!(report.rounding_flips.unwrap() >= report.num_flips);
    }

    #[test]
    fn generous_limit_keeps_labels() {
        let (g, y) = square();
        let (out, report) =
            iflipper_repair(&y, &g, &RepairConfig::new(1e9, Method::Iflipper)).unwrap();
        assert_eq!(out.current(), &y[..]);
        assert_eq!(report.num_flips, 0);
    }

    #[test]
    fn dispatcher_examples() {
        let (g, y) = chain();
        let (_, report) = repair(
            RepairInput::labels(&y),
            &g,
            &RepairConfig::new(0.0, Method::Greedy),
        )
        .unwrap();
        assert!(!report.feasible);
        let (_, report) = repair(
            RepairInput::labels(&y),
            &g,
            &RepairConfig::new(0.0, Method::Iflipper),
        )
        .unwrap();
        assert!(report.feasible);
        assert_eq!(report.num_flips, 2);

        let (g, y) = square();
        let (_, report) = repair(
            RepairInput::labels(&y),
            &g,
            &RepairConfig::new(2.0, Method::Ilp),
        )
        .unwrap();
        assert_eq!(report.num_flips, 1);

        let err = repair(
            RepairInput::labels(&y),
            &g,
            &RepairConfig::new(2.0, Method::Kmeans),
        );
        assert!(matches!(err, Err(Error::InvalidConfig(_))));
    }
}
