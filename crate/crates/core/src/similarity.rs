//! Similarity graphs from feature rows.
//!
//! Distances are squared Euclidean over the non-excluded columns and edge
//! weights are `exp(−θ·d)`. Candidate pairs come either from an exact scan
//! or from random-hyperplane LSH buckets whose table count is grown until a
//! sampled recall target is met.

use std::collections::{BTreeSet, HashMap};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{project_rows, Dataset, Edge, SimilarityGraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    /// Edge when either endpoint is among the other's `k` nearest rows.
    Knn { k: usize },
    /// Edge when the squared distance is at most `t`.
    Threshold { t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LshParams {
    /// Initial number of tables; doubled until the recall target is met.
    pub tables: usize,
    pub hashes_per_table: usize,
    pub target_recall: f64,
    pub max_tables: usize,
    pub seed: u64,
}

impl Default for LshParams {
    fn default() -> Self {
        Self {
            tables: 4,
            hashes_per_table: 10,
            target_recall: 0.98,
            max_tables: 512,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Blocking {
    Exact,
    Lsh(LshParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityConfig {
    pub kind: GraphKind,
    /// Weight decay `θ ≥ 0` in `exp(−θ·d)`.
    pub theta: f64,
    pub blocking: Blocking,
}

impl SimilarityConfig {
    pub fn knn(k: usize, theta: f64) -> Self {
        Self {
            kind: GraphKind::Knn { k },
            theta,
            blocking: Blocking::Exact,
        }
    }

    pub fn threshold(t: f64, theta: f64) -> Self {
        Self {
            kind: GraphKind::Threshold { t },
            theta,
            blocking: Blocking::Exact,
        }
    }

    pub fn with_blocking(mut self, blocking: Blocking) -> Self {
        self.blocking = blocking;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "θ must be ≥ 0, got {}",
                self.theta
            )));
        }
        match self.kind {
            GraphKind::Knn { k: 0 } => Err(Error::InvalidConfig("k must be positive".into())),
            GraphKind::Threshold { t } if !(t > 0.0) => {
                Err(Error::InvalidConfig(format!("T must be positive, got {t}")))
            }
            _ => Ok(()),
        }?;
        if let Blocking::Lsh(p) = &self.blocking {
            if p.tables == 0 || p.hashes_per_table == 0 || p.hashes_per_table > 64 {
                return Err(Error::InvalidConfig(
                    "LSH needs ≥ 1 table and 1..=64 hashes per table".into(),
                ));
            }
            if !(p.target_recall > 0.0 && p.target_recall <= 1.0) {
                return Err(Error::InvalidConfig(
                    "target recall must be in (0, 1]".into(),
                ));
            }
        }
        Ok(())
    }
}

/// An unordered pair `i < j` with its squared distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidatePair {
    pub i: usize,
    pub j: usize,
    pub d: f64,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn prepared_rows(features: &[Vec<f64>], excluded: &BTreeSet<usize>) -> Result<Vec<Vec<f64>>> {
    if features.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let d = features[0].len();
    for (row, values) in features.iter().enumerate() {
        if values.len() != d {
            return Err(Error::LengthMismatch {
                expected: d,
                got: values.len(),
            });
        }
        if let Some(col) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { row, col });
        }
    }
    Ok(project_rows(features, excluded))
}

/// Every unordered pair with its squared distance, sorted by `(i, j)`.
pub fn exact_candidate_pairs(
    features: &[Vec<f64>],
    excluded: &BTreeSet<usize>,
) -> Result<Vec<CandidatePair>> {
    let rows = prepared_rows(features, excluded)?;
    let n = rows.len();
    Ok((0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let rows = &rows;
            (i + 1..n).map(move |j| CandidatePair {
                i,
                j,
                d: squared_distance(&rows[i], &rows[j]),
            })
        })
        .collect())
}

/// Standardised rows and one hash key per table and row.
struct LshIndex {
    keys: Vec<Vec<u64>>,
}

impl LshIndex {
    fn build(rows: &[Vec<f64>], tables: usize, hashes: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut index = Self { keys: Vec::new() };
        index.extend(rows, tables, hashes, rng);
        index
    }

    fn extend(&mut self, rows: &[Vec<f64>], tables: usize, hashes: usize, rng: &mut ChaCha8Rng) {
        let d = rows[0].len();
        for _ in 0..tables {
            let mut planes = Vec::with_capacity(hashes);
            for _ in 0..hashes {
                let dir: Vec<f64> = (0..d)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let (lo, hi) = rows
                    .iter()
                    .map(|r| r.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>())
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                        (lo.min(p), hi.max(p))
                    });
                let offset = if hi > lo { rng.gen_range(lo..hi) } else { lo };
                planes.push((dir, offset));
            }
            let keys = rows
                .par_iter()
                .map(|r| {
                    planes
                        .iter()
                        .enumerate()
                        .fold(0u64, |key, (b, (dir, offset))| {
                            let p: f64 = r.iter().zip(dir).map(|(a, c)| a * c).sum();
                            key | (u64::from(p > *offset) << b)
                        })
                })
                .collect();
            self.keys.push(keys);
        }
    }

    fn collide(&self, i: usize, j: usize) -> bool {
        self.keys.iter().any(|k| k[i] == k[j])
    }
}

fn standardize(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n;
        }
    }
    let mut sd = vec![0.0; d];
    for r in rows {
        for ((s, v), m) in sd.iter_mut().zip(r).zip(&mean) {
            *s += (v - m) * (v - m) / n;
        }
    }
    let sd: Vec<f64> = sd
        .into_iter()
        .map(|v| if v > 0.0 { v.sqrt() } else { 1.0 })
        .collect();
    rows.iter()
        .map(|r| {
            r.iter()
                .zip(&mean)
                .zip(&sd)
                .map(|((v, m), s)| (v - m) / s)
                .collect()
        })
        .collect()
}

/// The rows that `i` would be joined to under `kind`, over the whole data.
fn true_partners(rows: &[Vec<f64>], i: usize, kind: GraphKind) -> Vec<usize> {
    let mut others: Vec<(f64, usize)> = (0..rows.len())
        .filter(|&j| j != i)
        .map(|j| (squared_distance(&rows[i], &rows[j]), j))
        .collect();
    match kind {
        GraphKind::Threshold { t } => others
            .into_iter()
            .filter(|&(d, _)| d <= t)
            .map(|(_, j)| j)
            .collect(),
        GraphKind::Knn { k } => {
            others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            others.into_iter().take(k).map(|(_, j)| j).collect()
        }
    }
}

/// Candidate pairs from random-hyperplane buckets. The number of tables is
/// doubled until, on a sample of `min(n, 500)` rows, the fraction of true
/// partner pairs sharing a bucket in some table reaches the target.
pub fn lsh_candidate_pairs(
    features: &[Vec<f64>],
    excluded: &BTreeSet<usize>,
    config: &SimilarityConfig,
) -> Result<Vec<CandidatePair>> {
    config.validate()?;
    let Blocking::Lsh(params) = &config.blocking else {
        return Err(Error::InvalidConfig("LSH parameters missing".into()));
    };
    let rows = prepared_rows(features, excluded)?;
    let n = rows.len();
    if n < 2 {
        return Ok(Vec::new());
    }
    let scaled = standardize(&rows);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let sample_size = n.min(500);
    let sampled = sample(&mut rng, n, sample_size).into_vec();
    let truth: Vec<(usize, usize)> = sampled
        .par_iter()
        .flat_map_iter(|&i| {
            true_partners(&rows, i, config.kind)
                .into_iter()
                .map(move |j| (i, j))
        })
        .collect();

    let mut tables = params.tables.min(params.max_tables.max(1));
    let mut index = LshIndex::build(&scaled, tables, params.hashes_per_table, &mut rng);
    loop {
        let hits = truth.iter().filter(|&&(i, j)| index.collide(i, j)).count();
        let recall = if truth.is_empty() {
            1.0
        } else {
            hits as f64 / truth.len() as f64
        };
        log::debug!("LSH recall {recall:.4} with {tables} tables");
        if recall >= params.target_recall {
            break;
        }
        if tables >= params.max_tables {
            return Err(Error::RecallUnreachable {
                recall,
                target: params.target_recall,
                tables,
            });
        }
        let extra = tables.min(params.max_tables - tables);
        index.extend(&scaled, extra, params.hashes_per_table, &mut rng);
        tables += extra;
    }

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for keys in &index.keys {
        let mut buckets: HashMap<u64, Vec<usize>> = HashMap::new();
        for (i, &k) in keys.iter().enumerate() {
            buckets.entry(k).or_default().push(i);
        }
        for members in buckets.values() {
            for (a, &i) in members.iter().enumerate() {
                for &j in &members[a + 1..] {
                    pairs.push((i, j));
                }
            }
        }
        // keep memory bounded across many tables
        pairs.par_sort_unstable();
        pairs.dedup();
    }
    Ok(pairs
        .into_par_iter()
        .map(|(i, j)| CandidatePair {
            i,
            j,
            d: squared_distance(&rows[i], &rows[j]),
        })
        .collect())
}

fn weighted_edges(
    n: usize,
    theta: f64,
    pairs: impl IntoIterator<Item = CandidatePair>,
) -> Result<SimilarityGraph> {
    let mut dropped = 0usize;
    let edges: Vec<Edge> = pairs
        .into_iter()
        .filter_map(|p| {
            let w = (-theta * p.d).exp();
            if w > 0.0 {
                Some(Edge::new(p.i, p.j, w))
            } else {
                dropped += 1;
                None
            }
        })
        .collect();
    if dropped > 0 {
        log::warn!("{dropped} pairs dropped because their weight underflows to 0");
    }
    SimilarityGraph::new(n, edges)
}

fn clamp_k(k: usize, n: usize) -> usize {
    if k >= n {
        log::warn!("k = {k} clamped to {} for {n} rows", n.saturating_sub(1));
        n.saturating_sub(1)
    } else {
        k
    }
}

/// Union-rule kNN graph over the given candidate pairs; rank ties go to the
/// smaller index.
pub fn build_knn_graph(
    n: usize,
    config: &SimilarityConfig,
    candidates: &[CandidatePair],
) -> Result<SimilarityGraph> {
    config.validate()?;
    let GraphKind::Knn { k } = config.kind else {
        return Err(Error::InvalidConfig("expected a kNN configuration".into()));
    };
    let k = clamp_k(k, n);
    let mut incident: Vec<Vec<(f64, usize)>> = vec![Vec::new(); n];
    for p in candidates {
        if p.i >= n || p.j >= n {
            return Err(Error::IndexOutOfRange {
                index: p.i.max(p.j),
                n,
            });
        }
        incident[p.i].push((p.d, p.j));
        incident[p.j].push((p.d, p.i));
    }
    let mut chosen: Vec<CandidatePair> = incident
        .into_par_iter()
        .enumerate()
        .flat_map_iter(|(i, mut list)| {
            list.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            list.truncate(k);
            list.into_iter().map(move |(d, j)| CandidatePair {
                i: i.min(j),
                j: i.max(j),
                d,
            })
        })
        .collect();
    chosen.par_sort_unstable_by(|a, b| (a.i, a.j).cmp(&(b.i, b.j)));
    chosen.dedup_by(|a, b| a.i == b.i && a.j == b.j);
    weighted_edges(n, config.theta, chosen)
}

/// Edge for every candidate pair with squared distance at most `T`.
pub fn build_threshold_graph(
    n: usize,
    config: &SimilarityConfig,
    candidates: &[CandidatePair],
) -> Result<SimilarityGraph> {
    config.validate()?;
    let GraphKind::Threshold { t } = config.kind else {
        return Err(Error::InvalidConfig(
            "expected a threshold configuration".into(),
        ));
    };
    weighted_edges(
        n,
        config.theta,
        candidates.iter().copied().filter(|p| p.d <= t),
    )
}

/// Builds the graph for `dataset`. Exact blocking scans rows in parallel
/// without materialising all `n²` pairs.
pub fn build_graph(dataset: &Dataset, config: &SimilarityConfig) -> Result<SimilarityGraph> {
    config.validate()?;
    let n = dataset.len();
    match &config.blocking {
        Blocking::Lsh(_) => {
            let candidates =
                lsh_candidate_pairs(dataset.features(), dataset.excluded_cols(), config)?;
            match config.kind {
                GraphKind::Knn { .. } => build_knn_graph(n, config, &candidates),
                GraphKind::Threshold { .. } => build_threshold_graph(n, config, &candidates),
            }
        }
        Blocking::Exact => {
            let rows = dataset.distance_rows();
            let kind = match config.kind {
                GraphKind::Knn { k } => GraphKind::Knn { k: clamp_k(k, n) },
                other => other,
            };
            let mut pairs: Vec<CandidatePair> = (0..n)
                .into_par_iter()
                .flat_map_iter(|i| {
                    let rows = &rows;
                    let partners: Vec<CandidatePair> = match kind {
                        GraphKind::Knn { k } => {
                            let mut others: Vec<(f64, usize)> = (0..n)
                                .filter(|&j| j != i)
                                .map(|j| (squared_distance(&rows[i], &rows[j]), j))
                                .collect();
                            let by_rank = |a: &(f64, usize), b: &(f64, usize)| {
                                a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
                            };
                            if k < others.len() {
                                others.select_nth_unstable_by(k, by_rank);
                                others.truncate(k);
                            }
                            others
                                .into_iter()
                                .map(|(d, j)| CandidatePair {
                                    i: i.min(j),
                                    j: i.max(j),
                                    d,
                                })
                                .collect()
                        }
                        GraphKind::Threshold { t } => (i + 1..n)
                            .filter_map(|j| {
                                let d = squared_distance(&rows[i], &rows[j]);
                                (d <= t).then_some(CandidatePair { i, j, d })
                            })
                            .collect(),
                    };
                    partners
                })
                .collect();
            pairs.par_sort_unstable_by(|a, b| (a.i, a.j).cmp(&(b.i, b.j)));
            pairs.dedup_by(|a, b| a.i == b.i && a.j == b.j);
            weighted_edges(n, config.theta, pairs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&x| vec![x]).collect()
    }

    fn none() -> BTreeSet<usize> {
        BTreeSet::new()
    }

    #[test]
    fn exact_pairs_examples() {
        let p = exact_candidate_pairs(&pts(&[0.0, 1.0, 5.0]), &none()).unwrap();
        let got: Vec<(usize, usize, f64)> = p.iter().map(|c| (c.i, c.j, c.d)).collect();
        assert_eq!(got, vec![(0, 1, 1.0), (0, 2, 25.0), (1, 2, 16.0)]);
        assert!(exact_candidate_pairs(&pts(&[3.0]), &none())
            .unwrap()
            .is_empty());
        let p = exact_candidate_pairs(&[vec![0.0, 0.0], vec![3.0, 4.0]], &none()).unwrap();
        assert_eq!(p[0].d, 25.0);
        assert!(matches!(
            exact_candidate_pairs(&[vec![0.0], vec![f64::NAN]], &none()),
            Err(Error::NonFiniteFeature { row: 1, col: 0 })
        ));
    }

    #[test]
    fn excluded_columns_do_not_count() {
        let rows = vec![vec![0.0, 100.0], vec![1.0, -100.0]];
        let p = exact_candidate_pairs(&rows, &BTreeSet::from([1])).unwrap();
        assert_eq!(p[0].d, 1.0);
    }

    #[test]
    fn knn_examples() {
        let rows = pts(&[0.0, 1.0, 3.0]);
        let cands = exact_candidate_pairs(&rows, &none()).unwrap();
        let g = build_knn_graph(3, &SimilarityConfig::knn(1, 0.0), &cands).unwrap();
        let edges: Vec<(usize, usize, f64)> = g.edges().iter().map(|e| (e.i, e.j, e.w)).collect();
        assert_eq!(edges, vec![(0, 1, 1.0), (1, 2, 1.0)]);

        let g = build_knn_graph(1, &SimilarityConfig::knn(3, 0.05), &[]).unwrap();
        assert_eq!(g.num_edges(), 0);

        let cands = exact_candidate_pairs(&pts(&[0.0, 1.0]), &none()).unwrap();
        let g = build_knn_graph(2, &SimilarityConfig::knn(1, 0.05), &cands).unwrap();
        assert!((g.edges()[0].w - 0.951229).abs() < 1e-6);
    }

    #[test]
    fn threshold_examples() {
        let cands = exact_candidate_pairs(&pts(&[0.0, 1.0, 5.0]), &none()).unwrap();
        let g = build_threshold_graph(3, &SimilarityConfig::threshold(3.0, 0.05), &cands).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!((g.edges()[0].i, g.edges()[0].j), (0, 1));
        assert!((g.edges()[0].w - (-0.05f64).exp()).abs() < 1e-15);

        let g = build_threshold_graph(3, &SimilarityConfig::threshold(0.5, 0.05), &cands).unwrap();
        assert_eq!(g.num_edges(), 0);

        let g = build_threshold_graph(3, &SimilarityConfig::threshold(30.0, 0.0), &cands).unwrap();
        assert!(g.edges().iter().all(|e| e.w == 1.0));
    }

    #[test]
    fn streaming_builder_matches_candidate_builders() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
            .collect();
        let d = Dataset::new(rows.clone(), vec![0; 60]).unwrap();
        let cands = exact_candidate_pairs(&rows, &none()).unwrap();
        for config in [
            SimilarityConfig::knn(5, 0.5),
            SimilarityConfig::threshold(0.4, 0.5),
        ] {
            let expected = match config.kind {
                GraphKind::Knn { .. } => build_knn_graph(60, &config, &cands).unwrap(),
                GraphKind::Threshold { .. } => build_threshold_graph(60, &config, &cands).unwrap(),
            };
            assert_eq!(build_graph(&d, &config).unwrap(), expected);
        }
    }

    #[test]
    fn identical_points_always_collide() {
        let config =
            SimilarityConfig::threshold(1.0, 0.1).with_blocking(Blocking::Lsh(LshParams {
                tables: 1,
                hashes_per_table: 16,
                ..LshParams::default()
            }));
        let p = lsh_candidate_pairs(&[vec![1.0, 2.0], vec![1.0, 2.0]], &none(), &config).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!((p[0].i, p[0].j, p[0].d), (0, 1, 0.0));
    }

    #[test]
    fn lsh_reaches_recall_and_is_a_subset() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|_| {
                vec![
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                ]
            })
            .collect();
        let config = SimilarityConfig::threshold(0.3, 0.1)
            .with_blocking(Blocking::Lsh(LshParams::default()));
        let lsh = lsh_candidate_pairs(&rows, &none(), &config).unwrap();
        let exact = exact_candidate_pairs(&rows, &none()).unwrap();
        let all: BTreeSet<(usize, usize)> = exact.iter().map(|p| (p.i, p.j)).collect();
        assert!(lsh.iter().all(|p| all.contains(&(p.i, p.j))));
        let found: BTreeSet<(usize, usize)> = lsh.iter().map(|p| (p.i, p.j)).collect();
        let truth: Vec<_> = exact.iter().filter(|p| p.d <= 0.3).collect();
        let hit = truth.iter().filter(|p| found.contains(&(p.i, p.j))).count();
        assert!(hit as f64 / truth.len() as f64 >= 0.98);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(SimilarityConfig::knn(0, 1.0).validate().is_err());
        assert!(SimilarityConfig::threshold(-1.0, 1.0).validate().is_err());
        assert!(SimilarityConfig::knn(3, -0.1).validate().is_err());
    }
}
