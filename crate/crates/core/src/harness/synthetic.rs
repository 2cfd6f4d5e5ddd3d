//! Two-class Gaussian data in the plane.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianClass {
    pub mean: [f64; 2],
    /// Symmetric positive definite covariance.
    pub cov: [[f64; 2]; 2],
}

impl GaussianClass {
    fn cholesky(&self) -> Result<[[f64; 2]; 2]> {
        let [[a, b], [_, c]] = self.cov;
        let l11 = a.sqrt();
        let l21 = b / l11;
        let l22 = (c - l21 * l21).sqrt();
        if !(l11 > 0.0 && l22 > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "covariance {:?} is not positive definite",
                self.cov
            )));
        }
        Ok([[l11, 0.0], [l21, l22]])
    }

    fn draw(&self, l: &[[f64; 2]; 2], rng: &mut ChaCha8Rng) -> Vec<f64> {
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        vec![
            self.mean[0] + l[0][0] * z0,
            self.mean[1] + l[1][0] * z0 + l[1][1] * z1,
        ]
    }
}

/// Class parameters: `positive` rows get label 1, `negative` rows label 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticParams {
    pub positive: GaussianClass,
    pub negative: GaussianClass,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            positive: GaussianClass {
                mean: [2.0, 2.0],
                cov: [[1.5, 0.3], [0.3, 1.0]],
            },
            negative: GaussianClass {
                mean: [-2.0, -2.0],
                cov: [[1.0, -0.2], [-0.2, 1.5]],
            },
        }
    }
}

/// `n / 2` positive and `n − n / 2` negative rows, shuffled; deterministic
/// for a given seed.
pub fn generate_synthetic(n: usize, seed: u64, params: &SyntheticParams) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 rows, got {n}"
        )));
    }
    let lp = params.positive.cholesky()?;
    let ln = params.negative.cholesky()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positives = n / 2;
    let mut rows: Vec<(Vec<f64>, u8)> = Vec::with_capacity(n);
    for i in 0..n {
        if i < positives {
            rows.push((params.positive.draw(&lp, &mut rng), 1));
        } else {
            rows.push((params.negative.draw(&ln, &mut rng), 0));
        }
    }
    rows.shuffle(&mut rng);
    let (features, labels) = rows.into_iter().unzip();
    Dataset::new(features, labels)
}
