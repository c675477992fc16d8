//! Shared fixtures and brute-force oracles for the integration tests.
#![allow(dead_code)]

use mmgraph::graph::ClusteringDenominator;
use mmgraph::rng::SeededRng;
use mmgraph::timeseries::{Modality, TimeSeriesMatrix};
use nalgebra::DMatrix;

/// Symmetric non-negative weights with zero diagonal; roughly `sparsity` of
/// the off-diagonal pairs are left empty.
pub fn random_weights(n: usize, seed: u64, sparsity: f64, scale: f64) -> DMatrix<f64> {
    let mut rng = SeededRng::new(seed);
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.uniform() >= sparsity {
                let v = scale * (0.01 + rng.uniform());
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    w
}

pub fn random_ts(t: usize, n: usize, seed: u64) -> TimeSeriesMatrix {
    let mut rng = SeededRng::new(seed);
    let values = DMatrix::from_fn(t, n, |_, _| rng.normal());
    let labels = (0..n).map(|i| format!("n{i}")).collect();
    TimeSeriesMatrix::with_modality(values, labels, Modality::Fmri, 2.0).unwrap()
}

pub fn textbook_pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    let sab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let saa: f64 = a.iter().map(|x| x * x).sum();
    let sbb: f64 = b.iter().map(|x| x * x).sum();
    (n * sab - sa * sb) / ((n * saa - sa * sa).sqrt() * (n * sbb - sb * sb).sqrt())
}

pub fn brute_strength(w: &DMatrix<f64>) -> (Vec<f64>, f64) {
    let n = w.nrows();
    let mut node = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            node[i] += w[(i, j)];
        }
    }
    let net = node.iter().sum::<f64>() / n as f64;
    (node, net)
}

/// Ordered-pair triple loop over neighbours j != k of i.
pub fn brute_clustering(w: &DMatrix<f64>, denom: ClusteringDenominator) -> Vec<f64> {
    let n = w.nrows();
    (0..n)
        .map(|i| {
            let s: f64 = (0..n).map(|j| w[(i, j)]).sum();
            let k = (0..n).filter(|&j| j != i && w[(i, j)] > 0.0).count() as f64;
            if k < 2.0 {
                return 0.0;
            }
            let d = match denom {
                ClusteringDenominator::Strength => s * (s - 1.0),
                ClusteringDenominator::Degree => k * (k - 1.0),
            };
            if d <= 1e-12 {
                return 0.0;
            }
            let mut total = 0.0;
            for j in 0..n {
                for h in 0..n {
                    if j != i && h != i && j != h {
                        total += (w[(i, j)] * w[(i, h)] * w[(j, h)]).cbrt();
                    }
                }
            }
            total / d
        })
        .collect()
}

/// Shortest distances by enumerating every simple path from `source`.
pub fn brute_distances(w: &DMatrix<f64>, source: usize) -> Vec<f64> {
    fn walk(w: &DMatrix<f64>, at: usize, len: f64, seen: &mut Vec<bool>, best: &mut Vec<f64>) {
        for next in 0..w.nrows() {
            if !seen[next] && w[(at, next)] > 0.0 {
                let l = len + 1.0 / w[(at, next)];
                if l < best[next] {
                    best[next] = l;
                }
                seen[next] = true;
                walk(w, next, l, seen, best);
                seen[next] = false;
            }
        }
    }
    let n = w.nrows();
    let mut best = vec![f64::INFINITY; n];
    best[source] = 0.0;
    let mut seen = vec![false; n];
    seen[source] = true;
    walk(w, source, 0.0, &mut seen, &mut best);
    best
}

pub fn brute_efficiency(w: &DMatrix<f64>) -> Vec<f64> {
    let n = w.nrows();
    (0..n)
        .map(|i| {
            let d = brute_distances(w, i);
            let s: f64 = (0..n)
                .filter(|&j| j != i && d[j].is_finite())
                .map(|j| 1.0 / d[j])
                .sum();
            s / (n - 1) as f64
        })
        .collect()
}

/// Naive O(n²) DFT magnitude at bin k.
pub fn dft_magnitude(x: &[f64], k: usize) -> f64 {
    let n = x.len() as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for (t, v) in x.iter().enumerate() {
        let phase = -2.0 * std::f64::consts::PI * k as f64 * t as f64 / n;
        re += v * phase.cos();
        im += v * phase.sin();
    }
    (re * re + im * im).sqrt()
}

/// Gain of a linear map at frequency `f` (cycles per sample), measured by
/// projecting the response to a long cosine onto the input in the middle
/// third of the record.
pub fn measured_gain(filter: impl Fn(&[f64]) -> Vec<f64>, f: f64, n: usize) -> f64 {
    let x: Vec<f64> = (0..n)
        .map(|t| (2.0 * std::f64::consts::PI * f * t as f64).cos())
        .collect();
    let y = filter(&x);
    let (a, b) = (n / 3, 2 * n / 3);
    let (mut c, mut s) = (0.0, 0.0);
    for (t, v) in y.iter().enumerate().take(b).skip(a) {
        let ph = 2.0 * std::f64::consts::PI * f * t as f64;
        c += v * ph.cos();
        s += v * ph.sin();
    }
    let half = (b - a) as f64 / 2.0;
    (c * c + s * s).sqrt() / half
}

pub fn single_column(x: &[f64], dt: f64) -> TimeSeriesMatrix {
    TimeSeriesMatrix::with_modality(
        DMatrix::from_column_slice(x.len(), 1, x),
        vec!["x".into()],
        Modality::Fmri,
        dt,
    )
    .unwrap()
}

/// Write a two-state planted dataset as separate EEG and fMRI matrices plus
/// a label sidecar, and return a config pointing at them.
pub fn write_fixture(
    dir: &std::path::Path,
    dwell: usize,
    seed: u64,
) -> mmgraph::config::PipelineConfig {
    use mmgraph::synth::{generate_dataset, planted_templates, GenerateOptions};
    let (n_eeg, n_fmri) = (4, 6);
    let templates = planted_templates(n_eeg + n_fmri, 2, 0.7).unwrap();
    let opts = GenerateOptions {
        dwell: vec![(0, dwell), (1, dwell)],
        n_eeg,
        n_fmri,
        noise_sigma: 0.1,
        dt: 2.0,
        seed,
    };
    let ds = generate_dataset(&templates, &opts).unwrap();
    let part = |range: std::ops::Range<usize>| {
        TimeSeriesMatrix::new(
            ds.ts
                .values()
                .columns(range.start, range.len())
                .into_owned(),
            ds.ts.labels()[range.clone()].to_vec(),
            ds.ts.modalities()[range].to_vec(),
            2.0,
        )
        .unwrap()
    };
    let eeg = dir.join("eeg.csv");
    let fmri = dir.join("fmri.csv");
    let labels = dir.join("labels.txt");
    mmgraph::io::write_matrix_file(&eeg, &part(0..n_eeg)).unwrap();
    mmgraph::io::write_matrix_file(&fmri, &part(n_eeg..n_eeg + n_fmri)).unwrap();
    mmgraph::io::write_labels(&labels, &ds.true_labels).unwrap();
    mmgraph::config::PipelineConfig {
        eeg_matrix: Some(eeg),
        fmri_matrix: Some(fmri),
        labels: Some(labels),
        output: dir.join("out"),
        hrf: false,
        seed: Some(seed),
        ..Default::default()
    }
}

/// Every file under `root`, relative path → bytes, sorted by path.
pub fn snapshot(root: &std::path::Path) -> Vec<(std::path::PathBuf, Vec<u8>)> {
    fn walk(
        root: &std::path::Path,
        dir: &std::path::Path,
        out: &mut Vec<(std::path::PathBuf, Vec<u8>)>,
    ) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.push((
                    path.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&path).unwrap(),
                ));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}
