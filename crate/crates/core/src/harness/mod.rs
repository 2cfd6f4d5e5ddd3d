//! Data ingestion, synthetic data, model evaluation, sweeps and reports.

pub mod data;
pub mod model;
pub mod report;
pub mod search;
pub mod sweep;
pub mod synthetic;

pub use data::{load_csv, save_csv, split_dataset, write_repaired_csv, Split};
pub use model::{train_and_score, LogisticModel, ModelConfig, ModelScore};
pub use report::{emit_report, read_report};
pub use search::{binary_search_m, ConsistencySearch, SearchOutcome};
pub use sweep::{
    geometric_m_grid, run_experiment, run_m_sweep, ExperimentRecord, ExperimentSpec, InputSource,
    MSelection, SweepPoint,
};
pub use synthetic::{generate_synthetic, GaussianClass, SyntheticParams};
