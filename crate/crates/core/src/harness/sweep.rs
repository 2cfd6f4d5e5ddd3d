//! Repairs over a range of `m` values and end-to-end experiments.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{load_csv, split_dataset};
use super::model::{train_and_score, ModelConfig};
use super::report::emit_report;
use super::search::ConsistencySearch;
use super::synthetic::{generate_synthetic, SyntheticParams};
use crate::error::{Error, Result};
use crate::metrics::{data_consistency, total_error};
use crate::pipeline::{repair, RepairInput};
use crate::similarity::{build_graph, SimilarityConfig};
use crate::types::{Dataset, LabelVector, Method, RepairConfig, RepairReport, SimilarityGraph};

/// `count` values falling geometrically from `upper` to `upper / 1000`,
/// followed by 0.
pub fn geometric_m_grid(upper: f64, count: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = match count {
        0 => Vec::new(),
        1 => vec![upper],
        _ => (0..count)
            .map(|k| upper * 1e-3f64.powf(k as f64 / (count - 1) as f64))
            .collect(),
    };
    grid.push(0.0);
    grid
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub labels: LabelVector,
    pub report: RepairReport,
    /// Consistency of the repaired labels over the repair graph, when it has
    /// edges.
    pub data_consistency: Option<f64>,
}

/// Runs `config.method` once per `m` in parallel; results keep the order
/// of `m_values`.
pub fn run_m_sweep(
    input: RepairInput<'_>,
    graph: &SimilarityGraph,
    m_values: &[f64],
    config: &RepairConfig,
) -> Result<Vec<SweepPoint>> {
    m_values
        .par_iter()
        .map(|&m| {
            let mut cfg = config.clone();
            cfg.m = m;
            let (labels, report) = repair(input, graph, &cfg)?;
            let data_consistency = if graph.num_edges() > 0 {
                Some(data_consistency(labels.current(), graph)?)
            } else {
                None
            };
            Ok(SweepPoint {
                labels,
                report,
                data_consistency,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSource {
    Csv {
        path: PathBuf,
        label_col: String,
        exclude_cols: Vec<String>,
    },
    Synthetic {
        n: usize,
        params: SyntheticParams,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MSelection {
    Values(Vec<f64>),
    /// Fractions of the training data's initial error.
    Fractions(Vec<f64>),
    /// [`geometric_m_grid`] below the training data's initial error.
    Grid {
        count: usize,
    },
    /// Per-method bisection on model consistency.
    TargetConsistency {
        target: f64,
        tolerance: f64,
        max_steps: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub input: InputSource,
    pub similarity: SimilarityConfig,
    pub m: MSelection,
    pub methods: Vec<Method>,
    /// Train, test and validation fractions.
    pub splits: [f64; 3],
    pub seed: u64,
    pub model: ModelConfig,
    pub report_path: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn synthetic(n: usize, similarity: SimilarityConfig) -> Self {
        Self {
            input: InputSource::Synthetic {
                n,
                params: SyntheticParams::default(),
            },
            similarity,
            m: MSelection::Grid { count: 8 },
            methods: vec![Method::Iflipper],
            splits: [0.6, 0.3, 0.1],
            seed: 0,
            model: ModelConfig::default(),
            report_path: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.splits.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || self.splits.iter().any(|&f| f < 0.0) {
            return Err(Error::InvalidConfig("split fractions must sum to 1".into()));
        }
        if let MSelection::Values(ms) | MSelection::Fractions(ms) = &self.m {
            if let Some(&bad) = ms.iter().find(|&&m| !(m >= 0.0)) {
                return Err(Error::NegativeBudget(bad));
            }
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods given".into()));
        }
        self.similarity.validate()
    }

    pub fn load(&self) -> Result<Dataset> {
        match &self.input {
            InputSource::Csv {
                path,
                label_col,
                exclude_cols,
            } => load_csv(path, label_col, exclude_cols),
            InputSource::Synthetic { n, params } => generate_synthetic(*n, self.seed, params),
        }
    }
}

/// One repair of the training split and the model trained on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub report: RepairReport,
    pub accuracy: f64,
    pub consistency: f64,
    pub data_consistency: Option<f64>,
}

/// Loads and splits the data, repairs the training split with every method
/// and `m`, and scores a model trained on each repaired split.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentRecord>> {
    spec.validate()?;
    let data = spec.load()?;
    let split = split_dataset(&data, spec.splits, spec.seed)?;
    let train_graph = build_graph(&split.train, &spec.similarity)?;
    let test_graph = build_graph(&split.test, &spec.similarity)?;
    let initial = total_error(split.train.labels(), &train_graph)?;

    let mut records = Vec::new();
    for &method in &spec.methods {
        let config = RepairConfig::new(0.0, method).with_seed(spec.seed);
        let m_values = match &spec.m {
            MSelection::Values(ms) => ms.clone(),
            MSelection::Fractions(fs) => fs.iter().map(|f| f * initial).collect(),
            MSelection::Grid { count } => geometric_m_grid(initial, *count),
            MSelection::TargetConsistency {
                target,
                tolerance,
                max_steps,
            } => {
                let search = ConsistencySearch {
                    train: &split.train,
                    train_graph: &train_graph,
                    test: &split.test,
                    test_graph: &test_graph,
                    repair: &config,
                    model: &spec.model,
                };
                vec![search.run(*target, *tolerance, *max_steps)?.m]
            }
        };
        let points = run_m_sweep(
            RepairInput::dataset(&split.train),
            &train_graph,
            &m_values,
            &config,
        )?;
        for point in points {
            let repaired = split.train.with_labels(point.labels.into_current())?;
            let score = train_and_score(&repaired, &split.test, &test_graph, &spec.model)?;
            records.push(ExperimentRecord {
                report: point.report,
                accuracy: score.accuracy,
                consistency: score.consistency,
                data_consistency: point.data_consistency,
            });
        }
    }
    if let Some(path) = &spec.report_path {
        let reports: Vec<RepairReport> = records.iter().map(|r| r.report.clone()).collect();
        emit_report(&reports, path)?;
    }
    Ok(records)
}
