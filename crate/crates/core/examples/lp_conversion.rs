//! Solves the relaxed problem with both backends, then walks a fractional
//! solution down to a single fractional value.

use iflipper::fixtures::square;
use iflipper::lp::{build_lp, solve_lp, LpBackend};
use iflipper::metrics::fractional_total_error;
use iflipper::transform::Converter;
use iflipper::FractionalSolution;

fn main() -> iflipper::Result<()> {
    let (graph, labels) = square();
    let problem = build_lp(&graph, &labels, 2.0)?;
    println!(
        "{} variables, {} constraints",
        problem.num_variables(),
        problem.num_constraints()
    );
    for backend in [LpBackend::ParametricCut, LpBackend::Simplex] {
        let sol = solve_lp(&problem, backend)?;
        println!(
            "{backend:?}: {:?}, objective {}",
            sol.values(),
            sol.objective()
        );
    }

    let mut lp_text = Vec::new();
    problem.write_lp_format(&mut lp_text)?;
    println!("\n{}", String::from_utf8_lossy(&lp_text));

    // an optimum with two distinct fractional values
    let start = FractionalSolution::new(vec![0.1, 0.0, 0.0, 0.9], &labels)?;
    let (converted, steps) = Converter::default().convert_traced(&start, &labels, &graph)?;
    for step in &steps {
        println!(
            "{:?}: {:?} -> {:?}, objective {}, error {}",
            step.kind, step.from, step.to, step.objective, step.fractional_error
        );
    }
    println!(
        "converted {:?}: objective {}, error {}",
        converted.values(),
        converted.objective(),
        fractional_total_error(converted.values(), &graph)?
    );
    Ok(())
}
