mod common;

use common::{brute_force_min_flips, error_of, fuzz_suite, random_instance, relative_tol};
use iflipper::baselines::{gradient_descent, ilp_exact_repair, GradientConfig, IlpMode};
use iflipper::fixtures::triangle_with_isolated;
use iflipper::harness::{generate_synthetic, SyntheticParams};
use iflipper::lp::{build_lp, solve_lp, DenseSimplex, LpBackend, LpSolver, ParametricCutSolver};
use iflipper::similarity::{build_graph, SimilarityConfig};
use iflipper::types::Dataset;

#[test]
fn exact_ilp_matches_enumeration() {
    for (k, inst) in fuzz_suite(150, 11).iter().enumerate() {
        let g = inst.graph();
        let (opt, _) = brute_force_min_flips(inst, relative_tol(inst.m)).unwrap();
        for mode in [IlpMode::Exhaustive, IlpMode::BranchAndBound] {
            let out = ilp_exact_repair(&inst.labels, &g, inst.m, mode, 1_000_000).unwrap();
            assert_eq!(out.num_flips(), opt, "instance {k}, {mode:?}");
            assert!(error_of(&inst.edges, out.current()) <= inst.m + relative_tol(inst.m));
        }
    }
}

#[test]
fn cut_and_simplex_agree_on_the_relaxation() {
    for seed in 0..120 {
        let inst = random_instance(3000 + seed, 4, 10);
        let g = inst.graph();
        let problem = build_lp(&g, &inst.labels, inst.m).unwrap();
        let cut = ParametricCutSolver::default().solve(&problem).unwrap();
        let simplex = DenseSimplex::default().solve(&problem).unwrap();
        assert!(
            (cut.objective() - simplex.objective()).abs() <= 1e-6,
            "seed {seed}: cut {} simplex {}",
            cut.objective(),
            simplex.objective()
        );
        // both are feasible points of the relaxation
        for sol in [&cut, &simplex] {
            let x = problem.primal_from_labels(sol.values());
            assert!(problem.max_violation(&x) <= 1e-6, "seed {seed}");
        }
        // and never beat the integer optimum
        let (opt, _) = brute_force_min_flips(&inst, relative_tol(inst.m)).unwrap();
        assert!(cut.objective() <= opt as f64 + 1e-6);
    }
}

#[test]
fn fixed_nodes_agree_across_backends() {
    for seed in 0..40 {
        let inst = random_instance(5000 + seed, 4, 9);
        let g = inst.graph();
        let problem = build_lp(&g, &inst.labels, inst.m)
            .unwrap()
            .with_fixed(0, 1 - inst.labels[0])
            .unwrap();
        let a = solve_lp(&problem, LpBackend::ParametricCut);
        let b = solve_lp(&problem, LpBackend::Simplex);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                assert!((a.objective() - b.objective()).abs() <= 1e-6, "seed {seed}");
                assert_eq!(a.values()[0], f64::from(1 - inst.labels[0]));
            }
            (Err(_), Err(_)) => {}
            (a, b) => panic!("seed {seed}: backends disagree on feasibility: {a:?} vs {b:?}"),
        }
    }
}

/// Coarse-to-fine grid search over `[0, 1]³` for the smoothed objective on
/// the triangle; the isolated node stays at its label.
fn grid_minimizer(lambda: f64) -> [f64; 3] {
    let target = [1.0, 0.0, 0.0];
    let f = |y: &[f64; 3]| {
        let fit: f64 = y.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum();
        let smooth = (y[0] - y[1]).powi(2) + (y[0] - y[2]).powi(2) + (y[1] - y[2]).powi(2);
        fit + lambda * smooth
    };
    let (mut center, mut radius) = ([0.5; 3], 0.5);
    for _ in 0..30 {
        let mut best = (f64::INFINITY, center);
        for a in 0..=10 {
            for b in 0..=10 {
                for c in 0..=10 {
                    let y = [
                        (center[0] + radius * (a as f64 / 5.0 - 1.0)).clamp(0.0, 1.0),
                        (center[1] + radius * (b as f64 / 5.0 - 1.0)).clamp(0.0, 1.0),
                        (center[2] + radius * (c as f64 / 5.0 - 1.0)).clamp(0.0, 1.0),
                    ];
                    let v = f(&y);
                    if v < best.0 {
                        best = (v, y);
                    }
                }
            }
        }
        center = best.1;
        radius *= 0.5;
    }
    center
}

#[test]
fn gradient_descent_reaches_the_grid_minimizer() {
    let (g, y) = triangle_with_isolated();
    let config = GradientConfig {
        max_iters: 20_000,
        ..GradientConfig::default()
    };
    for lambda in [0.1, 1.0, 10.0] {
        let got = gradient_descent(&y, &g, lambda, &config).unwrap();
        let want = grid_minimizer(lambda);
        for i in 0..3 {
            assert!(
                (got[i] - want[i]).abs() < 1e-6,
                "λ={lambda}: {got:?} vs {want:?}"
            );
        }
        assert_eq!(got[3], 1.0);
    }
    let got = gradient_descent(&y, &g, 10.0, &config).unwrap();
    assert!((got[0] - 11.0 / 31.0).abs() < 1e-9 && (got[1] - 10.0 / 31.0).abs() < 1e-9);
}

/// All-pairs kNN graph with the union rule and index tie-breaking.
fn naive_knn(rows: &[Vec<f64>], k: usize, theta: f64) -> Vec<(usize, usize, f64)> {
    let n = rows.len();
    let d = |i: usize, j: usize| -> f64 {
        rows[i]
            .iter()
            .zip(&rows[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    };
    let mut set = std::collections::BTreeMap::new();
    for i in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| d(i, a).partial_cmp(&d(i, b)).unwrap().then(a.cmp(&b)));
        for &j in others.iter().take(k) {
            set.insert((i.min(j), i.max(j)), (-theta * d(i, j)).exp());
        }
    }
    set.into_iter().map(|((i, j), w)| (i, j, w)).collect()
}

#[test]
fn knn_graph_matches_naive_construction() {
    let data = generate_synthetic(150, 3, &SyntheticParams::default()).unwrap();
    let g = build_graph(&data, &SimilarityConfig::knn(4, 0.3)).unwrap();
    let want = naive_knn(data.features(), 4, 0.3);
    let got: Vec<(usize, usize, f64)> = g.edges().iter().map(|e| (e.i, e.j, e.w)).collect();
    assert_eq!(got.len(), want.len());
    for (a, b) in got.iter().zip(&want) {
        assert_eq!((a.0, a.1), (b.0, b.1));
        assert!((a.2 - b.2).abs() < 1e-12);
    }
}

#[test]
fn knn_ties_go_to_the_smaller_index() {
    // node 0 is equidistant from 1, 2 and 3
    let rows = vec![vec![0.0], vec![1.0], vec![-1.0], vec![1.0]];
    let data = Dataset::new(rows.clone(), vec![0, 0, 1, 1]).unwrap();
    let g = build_graph(&data, &SimilarityConfig::knn(1, 1.0)).unwrap();
    let got: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.i, e.j)).collect();
    let want: Vec<(usize, usize)> = naive_knn(&rows, 1, 1.0)
        .iter()
        .map(|e| (e.0, e.1))
        .collect();
    assert_eq!(got, want);
    assert!(got.contains(&(0, 1)) && !got.contains(&(0, 3)));
}
