//! Graph metrics against brute-force oracles, plus the algebraic properties
//! of the correlation and signed-split stages.

mod common;

use common::{brute_clustering, brute_efficiency, brute_strength, random_weights};
use mmgraph::graph::{
    clustering_coefficient, connectivity_strength, global_efficiency, pearson_correlation_matrix,
    split_signed, ClusteringDenominator, CorrelationMatrix,
};
use mmgraph::timeseries::{Modality, TimeSeriesMatrix};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn matrix_strategy() -> impl Strategy<Value = DMatrix<f64>> {
    (2usize..=8, any::<u64>(), 0.0f64..0.7)
        .prop_map(|(n, seed, sparsity)| random_weights(n, seed, sparsity, 2.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn strength_matches_direct_sum(w in matrix_strategy()) {
        let cs = connectivity_strength(&w);
        let (node, net) = brute_strength(&w);
        for (a, b) in cs.node.iter().zip(&node) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!((cs.net - net).abs() < 1e-12);
    }

    #[test]
    fn clustering_matches_triple_loop(w in matrix_strategy()) {
        for denom in [ClusteringDenominator::Strength, ClusteringDenominator::Degree] {
            let cc = clustering_coefficient(&w, denom);
            let oracle = brute_clustering(&w, denom);
            for (a, b) in cc.node.iter().zip(&oracle) {
                prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn efficiency_matches_path_enumeration(w in matrix_strategy()) {
        let ge = global_efficiency(&w);
        let oracle = brute_efficiency(&w);
        for (a, b) in ge.node.iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn scaling_weights_scales_strength_and_efficiency(w in matrix_strategy(), c in 1.01f64..5.0) {
        let scaled = &w * c;
        let (cs, cs2) = (connectivity_strength(&w), connectivity_strength(&scaled));
        let (ge, ge2) = (global_efficiency(&w), global_efficiency(&scaled));
        for i in 0..w.nrows() {
            prop_assert!((cs2.node[i] - c * cs.node[i]).abs() < 1e-10);
            prop_assert!((ge2.node[i] - c * ge.node[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn signed_split_reconstructs_r(n in 2usize..10, t in 5usize..40, seed in any::<u64>()) {
        let ts = common::random_ts(t, n, seed);
        let r = pearson_correlation_matrix(&ts).unwrap();
        let g = split_signed(&r);
        for i in 0..n {
            prop_assert_eq!(g.w_plus()[(i, i)], 0.0);
            prop_assert_eq!(g.w_minus()[(i, i)], 0.0);
            for j in 0..n {
                prop_assert!(g.w_plus()[(i, j)] >= 0.0 && g.w_minus()[(i, j)] >= 0.0);
                prop_assert_eq!(g.w_plus()[(i, j)] * g.w_minus()[(i, j)], 0.0);
                prop_assert_eq!(g.w_plus()[(i, j)], g.w_plus()[(j, i)]);
                if i != j {
                    prop_assert_eq!(g.w_plus()[(i, j)] - g.w_minus()[(i, j)], r.values()[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn pearson_is_affine_invariant(t in 5usize..30, seed in any::<u64>(), a in 0.1f64..10.0, b in -5.0f64..5.0) {
        let ts = common::random_ts(t, 3, seed);
        let r = pearson_correlation_matrix(&ts).unwrap();
        let mut v = ts.values().clone();
        v.column_mut(0).iter_mut().for_each(|x| *x = a * *x + b);
        v.column_mut(1).iter_mut().for_each(|x| *x = -a * *x + b);
        let ts2 = TimeSeriesMatrix::new(v, ts.labels().to_vec(), ts.modalities().to_vec(), ts.dt()).unwrap();
        let r2 = pearson_correlation_matrix(&ts2).unwrap();
        prop_assert!((r2.values()[(0, 2)] - r.values()[(0, 2)]).abs() < 1e-10);
        prop_assert!((r2.values()[(1, 2)] + r.values()[(1, 2)]).abs() < 1e-10);
        prop_assert!((r2.values()[(0, 1)] + r.values()[(0, 1)]).abs() < 1e-10);
    }
}

#[test]
fn pearson_matches_textbook_formula() {
    let ts = common::random_ts(17, 4, 99);
    let r = pearson_correlation_matrix(&ts).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let want = common::textbook_pearson(&ts.column(i), &ts.column(j));
            assert!((r.values()[(i, j)] - want).abs() < 1e-12);
        }
    }
}

#[test]
fn zero_correlation_splits_to_nothing() {
    let ts = TimeSeriesMatrix::with_modality(
        DMatrix::from_row_slice(4, 2, &[1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0, -1.0]),
        vec!["a".into(), "b".into()],
        Modality::Fmri,
        2.0,
    )
    .unwrap();
    let r = pearson_correlation_matrix(&ts).unwrap();
    assert_eq!(r.values()[(0, 1)], 0.0);
    let g = split_signed(&CorrelationMatrix::new(r.values().clone(), r.labels().to_vec()).unwrap());
    assert_eq!((g.w_plus()[(0, 1)], g.w_minus()[(0, 1)]), (0.0, 0.0));
}
