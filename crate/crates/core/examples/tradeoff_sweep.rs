//! Accuracy and fairness of a model trained on labels repaired at several
//! limits.

use iflipper::harness::{run_experiment, ExperimentSpec, MSelection};
use iflipper::similarity::SimilarityConfig;
use iflipper::Method;

fn main() -> iflipper::Result<()> {
    let mut spec = ExperimentSpec::synthetic(2000, SimilarityConfig::knn(10, 0.5));
    spec.methods = vec![Method::Iflipper, Method::Greedy, Method::Gradient];
    spec.m = MSelection::Fractions(vec![1.0, 0.8, 0.6, 0.4, 0.3, 0.2, 0.1]);
    spec.seed = 11;
    let report = std::env::temp_dir().join("tradeoff_sweep.json");
    spec.report_path = Some(report.clone());

    let records = run_experiment(&spec)?;
    println!(
        "{:<9} {:>9} {:>7} {:>9} {:>9} {:>12}",
        "method", "m", "flips", "feasible", "accuracy", "consistency"
    );
    for r in &records {
        println!(
            "{:<9} {:>9.3} {:>7} {:>9} {:>9.3} {:>12.3}",
            r.report.method.to_string(),
            r.report.m,
            r.report.num_flips,
            r.report.feasible,
            r.accuracy,
            r.consistency
        );
    }
    println!("reports written to {}", report.display());
    Ok(())
}
