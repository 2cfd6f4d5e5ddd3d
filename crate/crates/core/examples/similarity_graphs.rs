//! kNN and threshold graphs over synthetic data, exact and with LSH blocking.

use std::collections::BTreeSet;
use std::time::Instant;

use iflipper::harness::{generate_synthetic, SyntheticParams};
use iflipper::similarity::{
    build_graph, exact_candidate_pairs, Blocking, LshParams, SimilarityConfig,
};

fn main() -> iflipper::Result<()> {
    let data = generate_synthetic(1500, 1, &SyntheticParams::default())?;
    let configs = [
        ("kNN k=10", SimilarityConfig::knn(10, 0.05)),
        ("threshold T=0.25", SimilarityConfig::threshold(0.25, 0.05)),
        (
            "threshold T=0.25, LSH",
            SimilarityConfig::threshold(0.25, 0.05)
                .with_blocking(Blocking::Lsh(LshParams::default())),
        ),
    ];
    let mut edge_sets = Vec::new();
    for (name, config) in &configs {
        let start = Instant::now();
        let graph = build_graph(&data, config)?;
        println!(
            "{name}: {} edges, total weight {:.1}, built in {:.1?}",
            graph.num_edges(),
            graph.total_weight(),
            start.elapsed()
        );
        edge_sets.push(
            graph
                .edges()
                .iter()
                .map(|e| (e.i, e.j))
                .collect::<BTreeSet<_>>(),
        );
    }
    let found = edge_sets[2].intersection(&edge_sets[1]).count();
    println!(
        "LSH recovered {found} of {} threshold edges",
        edge_sets[1].len()
    );

    let pairs = exact_candidate_pairs(data.features(), data.excluded_cols())?;
    let close = pairs.iter().filter(|p| p.d <= 0.25).count();
    println!(
        "{} candidate pairs in total, {close} within the threshold",
        pairs.len()
    );
    Ok(())
}
