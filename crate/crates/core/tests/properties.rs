use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use confsel_core::dataset::{standardize, stratified_split};
use confsel_core::linalg::{eigen_symmetric, pairwise_sq_distances_rows, sq_distance};
use confsel_core::scoring::{
    conformal_p_values, laplacian_graph, laplacian_scores, rank, Bandwidth, LaplacianParams,
    RankOptions,
};
use confsel_core::stats::{correlation_matrix, pearson};
use confsel_core::{Dataset64, Matrix64, Method};

fn two_pass(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Rows, plus labels covering classes `0..c` at least twice each.
fn dataset_strategy(max_rows: usize, max_features: usize) -> impl Strategy<Value = Dataset64> {
    (2usize..=3, 1usize..=max_features, 0usize..=max_rows)
        .prop_flat_map(|(c, d, extra)| {
            let n = 2 * c + extra;
            (
                Just(c),
                prop::collection::vec(prop::collection::vec(-100.0f64..100.0, d), n),
                prop::collection::vec(0..c, extra),
            )
        })
        .prop_map(|(c, rows, extra)| {
            let mut labels: Vec<usize> = (0..2 * c).map(|i| i % c).collect();
            labels.extend(extra);
            Dataset64::from_rows(&rows, labels).unwrap()
        })
}

fn symmetric_strategy(max_dim: usize) -> impl Strategy<Value = Matrix64> {
    (1usize..=max_dim)
        .prop_flat_map(|n| prop::collection::vec(-10.0f64..10.0, n * n).prop_map(move |v| (n, v)))
        .prop_map(|(n, v)| {
            let mut m = Matrix64::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = 0.5 * (v[i * n + j] + v[j * n + i]);
                }
            }
            m
        })
}

fn is_permutation(order: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    order.len() == n
        && order
            .iter()
            .all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_partitions_and_stratifies(data in dataset_strategy(30, 3), seed in any::<u64>()) {
        let s = stratified_split(&data, 0.5, seed).unwrap();
        let mut all: Vec<usize> = s.train_indices.iter().chain(&s.test_indices).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..data.n_samples()).collect::<Vec<_>>());
        prop_assert!(s.train_indices.windows(2).all(|w| w[0] < w[1]));
        for c in 0..data.n_classes() {
            let m = data.labels().iter().filter(|&&l| l == c).count();
            let tr = s.train.labels().iter().filter(|&&l| l == c).count();
            prop_assert!(tr >= 1 && tr < m);
            prop_assert!((tr as f64 - 0.5 * m as f64).abs() <= 0.5 + 1e-9);
        }
        let again = stratified_split(&data, 0.5, seed).unwrap();
        prop_assert_eq!(again, s);
    }

    #[test]
    fn standardization_round_trips(data in dataset_strategy(20, 4)) {
        let (z, s) = standardize(&data).unwrap();
        for (j, col) in z.columns().iter().enumerate() {
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            prop_assert!(mean.abs() < 1e-9);
            if !s.degenerate[j] {
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                prop_assert!((var - 1.0).abs() < 1e-9);
            }
        }
        let back = s.invert(&z).unwrap();
        for (a, b) in back.columns().iter().flatten().zip(data.columns().iter().flatten()) {
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn correlation_is_symmetric_and_bounded(data in dataset_strategy(20, 5)) {
        let c = correlation_matrix(&data, true).matrix;
        for i in 0..c.dim() {
            for j in 0..c.dim() {
                prop_assert_eq!(c.get(i, j), c.get(j, i));
                if let Some(r) = c.get(i, j) {
                    prop_assert!((-1.0..=1.0).contains(&r));
                }
            }
        }
    }

    #[test]
    fn pearson_matches_two_pass_and_is_affine_invariant(
        xy in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..50),
        scale_exp in -3i32..=3,
        a in 0.1f64..10.0,
        b in -50.0f64..50.0,
    ) {
        let s = 10f64.powi(scale_exp);
        let x: Vec<f64> = xy.iter().map(|p| p.0 * s).collect();
        let y: Vec<f64> = xy.iter().map(|p| p.1 * s).collect();
        let r = pearson(&x, &y).unwrap();
        prop_assert!((r - two_pass(&x, &y)).abs() < 1e-9);
        let x2: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let r2 = pearson(&x2, &y).unwrap();
        prop_assert!((r - r2).abs() < 1e-9);
        let neg: Vec<f64> = x.iter().map(|v| -a * v + b).collect();
        prop_assert!((r + pearson(&neg, &y).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn eigen_invariants(a in symmetric_strategy(12)) {
        let n = a.rows();
        let e = eigen_symmetric(&a).unwrap();
        let scale = a.norm_frobenius().max(1.0);
        for k in 0..n {
            let v = e.eigenvector(k);
            let av = a.mul_vec(&v);
            let res = av.iter().zip(&v).map(|(x, y)| (x - e.eigenvalues[k] * y).powi(2)).sum::<f64>().sqrt();
            prop_assert!(res <= 1e-8 * scale);
        }
        let vtv = e.eigenvectors.transpose().matmul(&e.eigenvectors);
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((vtv[(i, j)] - want).abs() < 1e-8);
            }
        }
        prop_assert!((e.eigenvalues.iter().sum::<f64>() - a.trace()).abs() < 1e-8 * scale);
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        let g = a.matmul(&a.transpose());
        let eg = eigen_symmetric(&g).unwrap();
        let gscale = g.norm_frobenius().max(1.0);
        prop_assert!(eg.eigenvalues.iter().all(|&l| l >= -1e-8 * gscale));
    }

    #[test]
    fn distances_obey_triangle_inequality(rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 3..12)) {
        let d = pairwise_sq_distances_rows(&rows);
        let n = rows.len();
        for i in 0..n {
            prop_assert_eq!(d[(i, i)], 0.0);
            for j in 0..n {
                prop_assert_eq!(d[(i, j)], d[(j, i)]);
                for k in 0..n {
                    prop_assert!(d[(i, k)].sqrt() <= d[(i, j)].sqrt() + d[(j, k)].sqrt() + 1e-9);
                }
            }
        }
    }

    #[test]
    fn p_values_match_brute_force(alpha in prop::collection::vec(prop::sample::select(vec![0.0, 0.25, 0.5, 1.0, 2.0, 3.5]), 1..64)) {
        let p = conformal_p_values(&alpha);
        let n = alpha.len() as f64;
        for (k, &a) in alpha.iter().enumerate() {
            let greater = alpha.iter().filter(|&&b| b > a).count() as f64;
            prop_assert_eq!(p[k], greater / n);
            for (j, &b) in alpha.iter().enumerate() {
                if a > b {
                    prop_assert!(p[k] < p[j]);
                }
            }
        }
    }

    #[test]
    fn confidence_machine_is_affine_invariant(data in dataset_strategy(20, 5), a in 0.5f64..4.0, b in -10.0f64..10.0) {
        let opts = RankOptions::default();
        let base = rank(Method::ConfidenceMachine, &data, &opts).unwrap();
        let cols: Vec<Vec<f64>> = data.columns().iter().map(|c| c.iter().map(|v| a * v + b).collect()).collect();
        let moved = Dataset64::new(cols, data.feature_names().to_vec(), data.labels().to_vec(), data.class_names().to_vec()).unwrap();
        let after = rank(Method::ConfidenceMachine, &moved, &opts).unwrap();
        for (x, y) in base.records.iter().zip(&after.records) {
            prop_assert_eq!(x.degenerate, y.degenerate);
            let (u, v) = (x.nonconformity.unwrap(), y.nonconformity.unwrap());
            prop_assert!((u - v).abs() <= 1e-9 * u.abs().max(1.0));
        }
    }

    #[test]
    fn every_ranking_is_a_permutation(data in dataset_strategy(20, 6)) {
        let opts = RankOptions {
            laplacian: LaplacianParams { k_neighbors: 2, bandwidth: Bandwidth::Auto },
        };
        for m in Method::ALL {
            let r = rank(m, &data, &opts).unwrap();
            prop_assert!(is_permutation(&r.order, data.n_features()), "{m}");
            let first_dead = r.order.iter().position(|&j| r.records[j].degenerate).unwrap_or(r.order.len());
            prop_assert!(r.order[first_dead..].iter().all(|&j| r.records[j].degenerate));
        }
    }

    #[test]
    fn laplacian_graph_structure(data in dataset_strategy(16, 3), k in 1usize..4) {
        let params = LaplacianParams { k_neighbors: k, bandwidth: Bandwidth::Auto };
        let g = laplacian_graph(&data, &params).unwrap();
        let n = data.n_samples();
        for i in 0..n {
            prop_assert_eq!(g.weights[(i, i)], 0.0);
            for j in 0..n {
                prop_assert_eq!(g.weights[(i, j)], g.weights[(j, i)]);
                prop_assert!((0.0..=1.0).contains(&g.weights[(i, j)]));
            }
        }
        let l = g.laplacian();
        let e = eigen_symmetric(&l).unwrap();
        let scale = l.norm_frobenius().max(1.0);
        prop_assert!(e.eigenvalues.iter().all(|&v| v >= -1e-9 * scale));
        let (scores, dead) = laplacian_scores(&data, &params).unwrap();
        for (s, d) in scores.iter().zip(dead) {
            prop_assert!(d || *s >= 0.0);
        }
    }

    #[test]
    fn laplacian_scores_ignore_row_order(data in dataset_strategy(14, 3), rot in 1usize..5) {
        let n = data.n_samples();
        let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        let shuffled = data.subset_rows(&perm);
        // neighbour ties are broken by index, so only compare unambiguous graphs
        let params = LaplacianParams { k_neighbors: 2, bandwidth: Bandwidth::Fixed(50.0) };
        let rows = data.rows();
        let d = pairwise_sq_distances_rows(&rows);
        let unique = (0..n).all(|i| {
            let mut v: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| d[(i, j)]).collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v.len() < 3 || v[1] < v[2] - 1e-9
        });
        prop_assume!(unique);
        let (a, _) = laplacian_scores(&data, &params).unwrap();
        let (b, _) = laplacian_scores(&shuffled, &params).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }
}

#[test]
fn distance_matrix_matches_double_loop() {
    let rows = vec![
        vec![0.0, 0.0],
        vec![3.0, 4.0],
        vec![-1.0, 2.5],
        vec![7.0, -2.0],
        vec![0.5, 0.5],
        vec![3.0, 4.0],
    ];
    let d = pairwise_sq_distances_rows(&rows);
    for i in 0..6 {
        for j in 0..6 {
            let dx = rows[i][0] - rows[j][0];
            let dy = rows[i][1] - rows[j][1];
            let acc = dx * dx + dy * dy;
            assert_eq!(d[(i, j)], acc);
            assert_eq!(sq_distance(&rows[i], &rows[j]), acc);
        }
    }
    assert_eq!(d[(0, 1)], 25.0);
    assert_eq!(d[(1, 5)], 0.0);
}

#[test]
fn known_eigenpairs() {
    let a = Matrix64::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
    let e = eigen_symmetric(&a).unwrap();
    assert_abs_diff_eq!(e.eigenvalues[0], 3.0, epsilon = 1e-12);
    assert_abs_diff_eq!(e.eigenvalues[1], 1.0, epsilon = 1e-12);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert_abs_diff_eq!(e.eigenvectors[(0, 0)], h, epsilon = 1e-12);
    assert_abs_diff_eq!(e.eigenvectors[(1, 0)], h, epsilon = 1e-12);
}
