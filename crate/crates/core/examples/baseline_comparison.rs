//! Every method on the same graph and limit.

use iflipper::harness::{generate_synthetic, GaussianClass, SyntheticParams};
use iflipper::metrics::total_error;
use iflipper::pipeline::{repair, RepairInput};
use iflipper::similarity::{build_graph, SimilarityConfig};
use iflipper::{Method, RepairConfig};

fn main() -> iflipper::Result<()> {
    // heavily overlapping classes, so there is plenty to repair
    let params = SyntheticParams {
        positive: GaussianClass {
            mean: [0.5, 0.5],
            cov: [[1.0, 0.0], [0.0, 1.0]],
        },
        negative: GaussianClass {
            mean: [-0.5, -0.5],
            cov: [[1.0, 0.0], [0.0, 1.0]],
        },
    };
    let data = generate_synthetic(80, 5, &params)?;
    let graph = build_graph(&data, &SimilarityConfig::knn(5, 0.5))?;
    let initial = total_error(data.labels(), &graph)?;
    let m = 0.3 * initial;
    println!(
        "{} nodes, {} edges, initial error {initial:.3}, m = {m:.3}",
        data.len(),
        graph.num_edges()
    );
    println!(
        "{:<10} {:>6} {:>12} {:>9} {:>10}",
        "method", "flips", "final error", "feasible", "ms"
    );
    for method in Method::ALL {
        let config = RepairConfig::new(m, method).with_seed(5);
        let (_, report) = repair(RepairInput::dataset(&data), &graph, &config)?;
        println!(
            "{:<10} {:>6} {:>12.3} {:>9} {:>10.2}",
            method.to_string(),
            report.num_flips,
            report.final_total_error,
            report.feasible,
            report.runtime_ms
        );
    }
    Ok(())
}
