//! Repair time as the dataset grows. Pass sizes as arguments to override
//! the defaults.

use std::time::Instant;

use iflipper::harness::{generate_synthetic, SyntheticParams};
use iflipper::metrics::total_error;
use iflipper::pipeline::iflipper_repair;
use iflipper::similarity::{build_graph, SimilarityConfig};
use iflipper::{Method, RepairConfig};

fn main() -> iflipper::Result<()> {
    let sizes: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let sizes = if sizes.is_empty() {
        vec![1000, 2000, 4000, 8000]
    } else {
        sizes
    };
    println!(
        "{:>7} {:>8} {:>10} {:>11} {:>7}",
        "n", "edges", "graph ms", "repair ms", "flips"
    );
    for n in sizes {
        let data = generate_synthetic(n, 9, &SyntheticParams::default())?;
        let start = Instant::now();
        let graph = build_graph(&data, &SimilarityConfig::knn(10, 0.05))?;
        let graph_ms = start.elapsed().as_secs_f64() * 1e3;
        let m = 0.2 * total_error(data.labels(), &graph)?;
        let (_, report) = iflipper_repair(
            data.labels(),
            &graph,
            &RepairConfig::new(m, Method::Iflipper),
        )?;
        println!(
            "{n:>7} {:>8} {graph_ms:>10.1} {:>11.1} {:>7}",
            graph.num_edges(),
            report.runtime_ms,
            report.num_flips
        );
    }
    Ok(())
}
