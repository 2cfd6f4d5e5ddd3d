//! The small hand-sized instances, repaired step by step.

use iflipper::fixtures::{chain, square, triangle_with_isolated};
use iflipper::metrics::total_error;
use iflipper::pipeline::iflipper_repair_traced;
use iflipper::{Method, RepairConfig};

fn main() -> iflipper::Result<()> {
    let cases = [
        ("triangle plus isolated node", triangle_with_isolated(), 0.0),
        ("four-node path", chain(), 0.0),
        ("four-cycle", square(), 2.0),
    ];
    for (name, (graph, labels), m) in cases {
        let config = RepairConfig::new(m, Method::Iflipper);
        let (repaired, report, trace) = iflipper_repair_traced(&labels, &graph, &config)?;
        println!(
            "{name}: labels {labels:?}, error {} , m = {m}",
            total_error(&labels, &graph)?
        );
        println!(
            "  LP optimum      {:?} (objective {})",
            trace.lp_solution.values(),
            trace.lp_solution.objective()
        );
        println!("  converted       {:?}", trace.converted.values());
        println!(
            "  rounded         {:?} (α = {:?} -> {:?}, gap bound {})",
            trace.rounded.current(),
            trace.rounding.alpha,
            trace.rounding.rounded_to,
            trace.rounding.bound_c
        );
        println!(
            "  after unflipping {:?}: {} flips, error {}",
            repaired.current(),
            report.num_flips,
            report.final_total_error
        );
    }
    Ok(())
}
