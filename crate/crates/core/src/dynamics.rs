//! Sliding-window graphs and temporal summaries of their metrics.

use std::ops::Range;

use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::graph::{
    pearson_correlation_matrix, split_signed, ClusteringDenominator, Metric, Sign,
    SignedWeightedGraph,
};
use crate::timeseries::TimeSeriesMatrix;
use crate::{Error, Result};

/// Rectangular window length and hop, both in samples (TRs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub length_tr: usize,
    pub step_tr: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec {
            length_tr: 20,
            step_tr: 1,
        }
    }
}

impl WindowSpec {
    pub fn new(length_tr: usize, step_tr: usize) -> Result<Self> {
        if length_tr < 3 {
            return Err(Error::InvalidInput(format!(
                "window length must be at least 3 samples, got {length_tr}"
            )));
        }
        if step_tr < 1 {
            return Err(Error::InvalidInput("window step must be at least 1".into()));
        }
        Ok(WindowSpec { length_tr, step_tr })
    }

    /// Number of windows that fit in `t` samples.
    pub fn count(&self, t: usize) -> usize {
        if t < self.length_tr {
            0
        } else {
            (t - self.length_tr) / self.step_tr + 1
        }
    }
}

/// Half-open ranges `[k·step, k·step + L)` for every window that fits.
pub fn make_windows(t: usize, spec: WindowSpec) -> Result<Vec<Range<usize>>> {
    if t < spec.length_tr {
        return Err(Error::TooShort(format!(
            "{t} samples cannot hold a {}-sample window",
            spec.length_tr
        )));
    }
    Ok((0..spec.count(t))
        .map(|k| {
            let start = k * spec.step_tr;
            start..start + spec.length_tr
        })
        .collect())
}

/// One signed graph per window, in window order.
#[derive(Debug, Clone)]
pub struct DynamicGraphSeries {
    windows: Vec<Range<usize>>,
    graphs: Vec<SignedWeightedGraph>,
    dt: f64,
}

impl DynamicGraphSeries {
    pub fn windows(&self) -> &[Range<usize>] {
        &self.windows
    }

    pub fn graphs(&self) -> &[SignedWeightedGraph] {
        &self.graphs
    }

    /// Time between consecutive windows (step × sampling interval).
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        self.graphs[0].labels()
    }

    pub fn n_nodes(&self) -> usize {
        self.graphs[0].n_nodes()
    }
}

/// Pearson graph of every window. A column that is constant inside a window
/// is an error naming the window.
pub fn dynamic_graph_series(ts: &TimeSeriesMatrix, spec: WindowSpec) -> Result<DynamicGraphSeries> {
    let windows = make_windows(ts.n_samples(), spec)?;
    let graphs = windows
        .par_iter()
        .enumerate()
        .map(|(k, range)| {
            let slice = ts.slice_rows(range.clone())?;
            let r = pearson_correlation_matrix(&slice).map_err(|e| match e {
                Error::ConstantColumn { label, .. } => Error::ConstantColumn {
                    label,
                    window: Some(k),
                },
                other => other,
            })?;
            Ok(split_signed(&r))
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        // sequential collect so the reported error is the earliest window
        .collect::<Result<Vec<_>>>()?;
    Ok(DynamicGraphSeries {
        windows,
        graphs,
        dt: spec.step_tr as f64 * ts.dt(),
    })
}

/// Node-level values (windows × N) and the graph-level value per window.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub node: DMatrix<f64>,
    pub global: Vec<f64>,
}

/// Evaluate one metric on one half of every window graph.
pub fn metric_series(
    dynamic: &DynamicGraphSeries,
    metric: Metric,
    sign: Sign,
    denominator: ClusteringDenominator,
) -> MetricSeries {
    let per_window: Vec<_> = dynamic
        .graphs()
        .par_iter()
        .map(|g| metric.compute(g.weights(sign), denominator))
        .collect();
    let m = per_window.len();
    let n = dynamic.n_nodes();
    MetricSeries {
        node: DMatrix::from_fn(m, n, |w, i| per_window[w].node[i]),
        global: per_window.iter().map(|v| v.net).collect(),
    }
}

/// Sample variance (divisor n - 1).
pub fn temporal_variance(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 2 {
        return Err(Error::TooShort(format!(
            "variance needs at least 2 values, got {n}"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    Ok(series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64)
}

/// Default low-frequency band for fluctuation amplitude, in Hz.
pub const LOW_FREQ_BAND: (f64, f64) = (0.0, 0.025);

/// Amplitude of the low-frequency fluctuations of a demeaned series: the
/// root-sum-square of the single-sided amplitude spectrum `2|X_k|/n` over
/// the bins with `f_lo < f_k ≤ f_hi` (DC excluded). A bin-aligned sinusoid
/// of amplitude `a` inside the band yields `a`.
pub fn low_freq_amplitude(series: &[f64], dt: f64, f_lo: f64, f_hi: f64) -> Result<f64> {
    let n = series.len();
    if n < 8 {
        return Err(Error::TooShort(format!(
            "fluctuation amplitude needs at least 8 values, got {n}"
        )));
    }
    let nyquist = 0.5 / dt;
    if !(dt > 0.0 && f_hi < nyquist && f_lo >= 0.0 && f_lo < f_hi) {
        return Err(Error::Nyquist {
            lo: f_lo,
            hi: f_hi,
            nyquist,
        });
    }
    let resolution = 1.0 / (n as f64 * dt);
    let tol = 1e-9 * resolution;
    let bins: Vec<usize> = (1..=n / 2)
        .filter(|&k| {
            let f = k as f64 * resolution;
            f > f_lo + tol && f <= f_hi + tol
        })
        .collect();
    if bins.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no frequency bin in ({f_lo}, {f_hi}] Hz at resolution {resolution} Hz"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = series.iter().map(|v| Complex::new(v - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let power: f64 = bins
        .iter()
        .map(|&k| (2.0 * buf[k].norm() / n as f64).powi(2))
        .sum();
    Ok(power.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::Modality;
    use std::f64::consts::PI;

    #[test]
    fn default_window_count_on_256_samples() {
        let w = make_windows(256, WindowSpec::default()).unwrap();
        assert_eq!(w.len(), 237);
        assert_eq!(w[236], 236..256);
    }

    #[test]
    fn window_edge_cases() {
        let spec = WindowSpec::new(4, 2).unwrap();
        let w = make_windows(10, spec).unwrap();
        let starts: Vec<usize> = w.iter().map(|r| r.start).collect();
        assert_eq!(starts, vec![0, 2, 4, 6]);
        assert_eq!(
            make_windows(20, WindowSpec::default()).unwrap(),
            vec![0..20]
        );
        assert!(make_windows(19, WindowSpec::default()).is_err());
        assert!(WindowSpec::new(2, 1).is_err());
        assert!(WindowSpec::new(5, 0).is_err());
    }

    #[test]
    fn constant_column_inside_window_names_window() {
        let mut values = DMatrix::from_fn(12, 2, |i, j| ((i * 7 + j * 3) % 5) as f64);
        for i in 4..9 {
            values[(i, 1)] = 1.0;
        }
        let ts = TimeSeriesMatrix::with_modality(
            values,
            vec!["a".into(), "b".into()],
            Modality::Fmri,
            2.0,
        )
        .unwrap();
        let err = dynamic_graph_series(&ts, WindowSpec::new(4, 1).unwrap()).unwrap_err();
        match err {
            Error::ConstantColumn { label, window } => {
                assert_eq!(label, "b");
                assert_eq!(window, Some(4));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn variance_values() {
        assert_eq!(temporal_variance(&[3.0; 5]).unwrap(), 0.0);
        assert_eq!(temporal_variance(&[0.0, 1.0]).unwrap(), 0.5);
        assert!(temporal_variance(&[1.0]).is_err());
        let x = [0.3, 1.2, -0.7, 2.2];
        let shifted: Vec<f64> = x.iter().map(|v| v + 10.0).collect();
        assert!(
            (temporal_variance(&x).unwrap() - temporal_variance(&shifted).unwrap()).abs() < 1e-12
        );
    }

    #[test]
    fn low_freq_amplitude_sines() {
        let sine = |f: f64| -> Vec<f64> {
            (0..400)
                .map(|i| (2.0 * PI * f * 2.0 * i as f64).sin())
                .collect()
        };
        assert!(low_freq_amplitude(&[2.0; 64], 2.0, 0.0, 0.025).unwrap() < 1e-12);
        let inband = low_freq_amplitude(&sine(0.02), 2.0, 0.0, 0.025).unwrap();
        assert!((inband - 1.0).abs() < 0.02, "{inband}");
        let outband = low_freq_amplitude(&sine(0.1), 2.0, 0.0, 0.025).unwrap();
        assert!(outband <= 0.02, "{outband}");
    }

    #[test]
    fn low_freq_amplitude_errors() {
        let x = vec![0.0; 10];
        // resolution 0.05 Hz, nothing at or below 0.025 Hz
        assert!(matches!(
            low_freq_amplitude(&x, 2.0, 0.0, 0.025),
            Err(Error::InvalidInput(_))
        ));
        assert!(low_freq_amplitude(&x[..5], 2.0, 0.0, 0.025).is_err());
        assert!(matches!(
            low_freq_amplitude(&x, 2.0, 0.0, 0.3),
            Err(Error::Nyquist { .. })
        ));
    }
}
