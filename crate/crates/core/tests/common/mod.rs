#![allow(dead_code)]

use iflipper::SimilarityGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random repair instance: graph as `(i, j, w)` triples, labels and `m`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub labels: Vec<u8>,
    pub m: f64,
}

impl Instance {
    pub fn graph(&self) -> SimilarityGraph {
        SimilarityGraph::from_triples(self.n, &self.edges).expect("generated graph is valid")
    }

    pub fn initial_error(&self) -> f64 {
        error_of(&self.edges, &self.labels)
    }
}

/// `n` in `[n_lo, n_hi]`, each pair an edge with a per-instance density,
/// weights in `(0, 1]`, uniform labels and `m` uniform in `[0, initial error]`.
pub fn random_instance(seed: u64, n_lo: usize, n_hi: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(n_lo..=n_hi);
    let density: f64 = rng.gen_range(0.15..0.7);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                edges.push((i, j, 1.0 - rng.gen::<f64>()));
            }
        }
    }
    let labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1)).collect();
    let initial = error_of(&edges, &labels);
    let m = rng.gen::<f64>() * initial;
    Instance {
        n,
        edges,
        labels,
        m,
    }
}

pub fn fuzz_suite(count: usize, seed: u64) -> Vec<Instance> {
    (0..count as u64)
        .map(|k| random_instance(seed.wrapping_mul(1_000_003).wrapping_add(k), 4, 14))
        .collect()
}

pub fn error_of(edges: &[(usize, usize, f64)], labels: &[u8]) -> f64 {
    let mut total = 0.0;
    for &(i, j, w) in edges {
        if labels[i] != labels[j] {
            total += w;
        }
    }
    total
}

/// Fewest flips bringing the error to at most `m + slack`, by enumerating
/// every subset of nodes.
pub fn brute_force_min_flips(inst: &Instance, slack: f64) -> Option<(usize, Vec<u8>)> {
    assert!(inst.n <= 20, "brute force is exponential");
    let mut best: Option<(usize, Vec<u8>)> = None;
    let mut labels = inst.labels.clone();
    for mask in 0u32..(1 << inst.n) {
        let flips = mask.count_ones() as usize;
        if best.as_ref().is_some_and(|(b, _)| flips >= *b) {
            continue;
        }
        for (i, l) in labels.iter_mut().enumerate() {
            *l = inst.labels[i] ^ ((mask >> i) & 1) as u8;
        }
        if error_of(&inst.edges, &labels) <= inst.m + slack {
            best = Some((flips, labels.clone()));
        }
    }
    best
}

pub fn relative_tol(m: f64) -> f64 {
    1e-9 * m.abs().max(1.0)
}
