//! Round trip through CSV files: load, repair, write the repaired labels.

use iflipper::harness::{
    generate_synthetic, load_csv, save_csv, write_repaired_csv, SyntheticParams,
};
use iflipper::metrics::total_error;
use iflipper::pipeline::{repair, RepairInput};
use iflipper::similarity::{build_graph, SimilarityConfig};
use iflipper::{Method, RepairConfig};

fn main() -> iflipper::Result<()> {
    let dir = std::env::temp_dir().join("iflipper_csv_repair");
    std::fs::create_dir_all(&dir)?;
    let input = dir.join("input.csv");
    save_csv(
        &generate_synthetic(400, 2, &SyntheticParams::default())?,
        &input,
    )?;

    let data = load_csv(&input, "label", &[])?;
    let graph = build_graph(&data, &SimilarityConfig::knn(8, 0.05))?;
    let m = 0.8 * total_error(data.labels(), &graph)?;
    let config = RepairConfig::new(m, Method::Iflipper);
    let (labels, report) = repair(RepairInput::dataset(&data), &graph, &config)?;
    let output = dir.join("repaired.csv");
    write_repaired_csv(&data, &labels, &output)?;

    println!("{}", serde_json::to_string_pretty(&report)?);
    let flipped = labels.flip_set();
    println!(
        "{} flipped rows, first few: {:?}",
        flipped.len(),
        &flipped[..flipped.len().min(10)]
    );
    println!("wrote {}", output.display());
    Ok(())
}
