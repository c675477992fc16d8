//! Preprocessing stages: residual orthogonality, despiking and filter response.

mod common;

use common::{measured_gain, random_ts, single_column};
use mmgraph::rng::SeededRng;
use mmgraph::timeseries::{bandpass_filter, detrend_polynomial, regress_nuisance, remove_outliers};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn bp(x: &[f64]) -> Vec<f64> {
    bandpass_filter(&single_column(x, 2.0), 0.01, 0.1)
        .unwrap()
        .column(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn detrended_columns_are_orthogonal_to_the_basis(t in 8usize..80, order in 1usize..=3, seed in any::<u64>()) {
        let ts = random_ts(t, 3, seed);
        let out = detrend_polynomial(&ts, order).unwrap();
        for j in 0..3 {
            let col = out.column(j);
            let scale = ts.column(j).iter().map(|v| v.abs()).fold(1.0, f64::max);
            for p in 0..=order {
                // raw sample index powers span the same space as the rescaled basis
                let dot: f64 = col.iter().enumerate().map(|(i, v)| v * (i as f64 / t as f64).powi(p as i32)).sum();
                prop_assert!(dot.abs() < 1e-9 * scale * t as f64, "p={p} dot={dot}");
            }
        }
    }

    #[test]
    fn detrend_removes_an_exact_cubic(t in 6usize..60, c in prop::array::uniform4(-3.0f64..3.0)) {
        let x: Vec<f64> = (0..t).map(|i| { let s = i as f64; c[0] + c[1] * s + c[2] * s * s / 10.0 + c[3] * s.powi(3) / 100.0 }).collect();
        let out = detrend_polynomial(&single_column(&x, 1.0), 3).unwrap();
        let peak = x.iter().map(|v| v.abs()).fold(1.0, f64::max);
        prop_assert!(out.column(0).iter().all(|v| v.abs() < 1e-9 * peak));
    }

    #[test]
    fn nuisance_residuals_are_orthogonal_to_the_design(t in 20usize..80, k in 1usize..6, seed in any::<u64>()) {
        let ts = random_ts(t, 2, seed);
        let mut rng = SeededRng::new(seed ^ 0xabc);
        let regs = DMatrix::from_fn(t, k, |_, _| rng.normal());
        let fit = regress_nuisance(&ts, &regs, true).unwrap();
        prop_assert_eq!(fit.design_columns, 1 + 2 * k);
        for j in 0..2 {
            let r = fit.cleaned.column(j);
            prop_assert!(r.iter().sum::<f64>().abs() < 1e-9);
            for c in 0..k {
                let dot: f64 = r.iter().zip(regs.column(c).iter()).map(|(a, b)| a * b).sum();
                prop_assert!(dot.abs() < 1e-9);
                let diff: f64 = (1..t).map(|i| r[i] * (regs[(i, c)] - regs[(i - 1, c)])).sum();
                prop_assert!(diff.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn despiking_is_idempotent(t in 5usize..120, seed in any::<u64>(), spikes in prop::collection::vec((0usize..120, -50.0f64..50.0), 0..6)) {
        let ts = random_ts(t, 2, seed);
        let mut v = ts.values().clone();
        for (i, a) in spikes {
            v[(i % t, 0)] += a;
        }
        let ts = mmgraph::timeseries::TimeSeriesMatrix::new(v, ts.labels().to_vec(), ts.modalities().to_vec(), 2.0).unwrap();
        let once = remove_outliers(&ts, 4.0).unwrap();
        let twice = remove_outliers(&once, 4.0).unwrap();
        prop_assert_eq!(once.values(), twice.values());
        prop_assert_eq!(once.labels(), ts.labels());
    }

    #[test]
    fn bandpass_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let x = random_ts(128, 2, seed);
        let (u, v) = (x.column(0), x.column(1));
        let mix: Vec<f64> = u.iter().zip(&v).map(|(p, q)| a * p + b * q).collect();
        let (fu, fv, fm) = (bp(&u), bp(&v), bp(&mix));
        for i in 0..128 {
            prop_assert!((fm[i] - (a * fu[i] + b * fv[i])).abs() < 1e-9);
        }
    }
}

#[test]
fn bandpass_gain_matches_contract() {
    // frequencies in cycles per sample at dt = 2 s
    assert!(measured_gain(bp, 0.05 * 2.0, 512) >= 0.9);
    assert!(measured_gain(bp, 0.2 * 2.0, 512) <= 0.1);
    let dc = bp(&vec![3.0; 512]);
    assert!(dc.iter().all(|v| v.abs() <= 1e-6));
}

#[test]
fn bandpass_preserves_metadata_and_shape() {
    let ts = random_ts(100, 4, 3);
    let out = bandpass_filter(&ts, 0.01, 0.1).unwrap();
    assert_eq!(out.labels(), ts.labels());
    assert_eq!(out.modalities(), ts.modalities());
    assert_eq!(out.values().shape(), ts.values().shape());
    assert_eq!(out.dt(), ts.dt());
}

#[test]
fn bandpass_rejects_edges_above_nyquist() {
    let ts = random_ts(100, 1, 3);
    assert!(bandpass_filter(&ts, 0.01, 0.3).is_err());
    assert!(bandpass_filter(&ts, 0.1, 0.05).is_err());
}

#[test]
fn isolated_spike_is_replaced_by_neighbours() {
    let mut x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
    x[20] = 100.0;
    let out = remove_outliers(&single_column(&x, 2.0), 4.0)
        .unwrap()
        .column(0);
    assert!((out[20] - 0.5 * (x[19] + x[21])).abs() < 1e-12);
    for i in (0..50).filter(|&i| i != 20) {
        assert_eq!(out[i], x[i]);
    }
}
