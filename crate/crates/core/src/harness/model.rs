//! A small logistic-regression evaluator for repaired training labels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::consistency_score;
use crate::types::{Dataset, SimilarityGraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            epochs: 300,
            l2: 1e-4,
        }
    }
}

/// Linear classifier over standardised features.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    weights: Vec<f64>,
    bias: f64,
    mean: Vec<f64>,
    scale: Vec<f64>,
    /// Set when the training labels had a single class.
    constant: Option<u8>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl LogisticModel {
    /// Full-batch gradient descent on the mean log-loss; deterministic.
    pub fn train(data: &Dataset, config: &ModelConfig) -> Result<Self> {
        if !(config.learning_rate > 0.0) || config.epochs == 0 {
            return Err(Error::InvalidConfig(
                "model needs learning_rate > 0 and epochs ≥ 1".into(),
            ));
        }
        let n = data.len() as f64;
        let d = data.num_features();
        let rows = data.features();
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / n;
            }
        }
        let mut scale = vec![0.0; d];
        for r in rows {
            for ((s, v), m) in scale.iter_mut().zip(r).zip(&mean) {
                *s += (v - m).powi(2) / n;
            }
        }
        for s in scale.iter_mut() {
            *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
        }
        let ones = data.labels().iter().filter(|&&l| l == 1).count();
        let constant = if ones == 0 {
            Some(0)
        } else if ones == data.len() {
            Some(1)
        } else {
            None
        };
        let mut model = Self {
            weights: vec![0.0; d],
            bias: 0.0,
            mean,
            scale,
            constant,
        };
        if constant.is_some() {
            log::warn!("training labels have a single class; using a constant classifier");
            return Ok(model);
        }
        let x: Vec<Vec<f64>> = rows.iter().map(|r| model.standardize(r)).collect();
        for _ in 0..config.epochs {
            let mut gw = vec![0.0; d];
            let mut gb = 0.0;
            for (xi, &yi) in x.iter().zip(data.labels()) {
                let err = sigmoid(model.margin(xi)) - f64::from(yi);
                for (g, v) in gw.iter_mut().zip(xi) {
                    *g += err * v / n;
                }
                gb += err / n;
            }
            for (w, g) in model.weights.iter_mut().zip(&gw) {
                *w -= config.learning_rate * (g + config.l2 * *w);
            }
            model.bias -= config.learning_rate * gb;
        }
        Ok(model)
    }

    fn standardize(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    fn margin(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    pub fn predict(&self, row: &[f64]) -> u8 {
        if let Some(c) = self.constant {
            return c;
        }
        u8::from(self.margin(&self.standardize(row)) >= 0.0)
    }

    pub fn predict_all(&self, data: &Dataset) -> Vec<u8> {
        data.features().iter().map(|r| self.predict(r)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub accuracy: f64,
    pub consistency: f64,
}

/// Trains on `train` and reports test accuracy and the consistency score
/// of the test predictions over `test_graph`.
pub fn train_and_score(
    train: &Dataset,
    test: &Dataset,
    test_graph: &SimilarityGraph,
    config: &ModelConfig,
) -> Result<ModelScore> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let model = LogisticModel::train(train, config)?;
    let predictions = model.predict_all(test);
    let correct = predictions
        .iter()
        .zip(test.labels())
        .filter(|(p, l)| p == l)
        .count();
    Ok(ModelScore {
        accuracy: correct as f64 / test.len() as f64,
        consistency: consistency_score(&predictions, test_graph)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::synthetic::{generate_synthetic, SyntheticParams};
    use crate::similarity::{build_graph, SimilarityConfig};

    #[test]
    fn separable_data_is_learned() {
        let p = SyntheticParams::default();
        let train = generate_synthetic(400, 1, &p).unwrap();
        let test = generate_synthetic(200, 2, &p).unwrap();
        let g = build_graph(&test, &SimilarityConfig::knn(5, 0.05)).unwrap();
        let s = train_and_score(&train, &test, &g, &ModelConfig::default()).unwrap();
        assert!(s.accuracy >= 0.95, "accuracy {}", s.accuracy);
        assert!(s.consistency > 0.9);
        assert_eq!(
            s,
            train_and_score(&train, &test, &g, &ModelConfig::default()).unwrap()
        );
    }

    #[test]
    fn single_class_gives_constant_predictions() {
        let p = SyntheticParams::default();
        let train = generate_synthetic(100, 1, &p).unwrap();
        let train = train.with_labels(vec![1; 100]).unwrap();
        let test = generate_synthetic(50, 2, &p).unwrap();
        let g = build_graph(&test, &SimilarityConfig::knn(3, 0.05)).unwrap();
        let s = train_and_score(&train, &test, &g, &ModelConfig::default()).unwrap();
        assert_eq!(s.consistency, 1.0);
        assert!((s.accuracy - 0.5).abs() < 1e-12);
    }
}
