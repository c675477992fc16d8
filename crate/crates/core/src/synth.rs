//! Synthetic multimodal datasets with planted connectivity states.
//!
//! Each dwell segment draws rows `x = S z + σ e` where `S` is the symmetric
//! square root of the active template covariance and `z`, `e` are standard
//! normal vectors from [`SeededRng`](crate::rng::SeededRng). For every row the
//! N draws of `z` come first, then the N draws of `e`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::rng::SeededRng;
use crate::timeseries::{Modality, TimeSeriesMatrix};
use crate::{Error, Result};

/// A named covariance (here always a correlation) matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTemplate {
    covariance: DMatrix<f64>,
    name: String,
}

impl StateTemplate {
    pub fn new(covariance: DMatrix<f64>, name: impl Into<String>) -> Result<Self> {
        let n = covariance.nrows();
        if n == 0 || covariance.ncols() != n {
            return Err(Error::InvalidInput(
                "template covariance must be square and non-empty".into(),
            ));
        }
        for i in 0..n {
            if !(covariance[(i, i)] > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "diagonal entry {i} is not positive"
                )));
            }
            for j in 0..i {
                if (covariance[(i, j)] - covariance[(j, i)]).abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "template is asymmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let min_eig = min_eigenvalue(&covariance);
        if !(min_eig > 1e-10) {
            return Err(Error::NotPositiveDefinite(min_eig));
        }
        Ok(StateTemplate {
            covariance,
            name: name.into(),
        })
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_nodes(&self) -> usize {
        self.covariance.nrows()
    }

    /// Symmetric factor `S` with `S S = covariance`.
    fn sqrt_factor(&self) -> DMatrix<f64> {
        let eig = SymmetricEigen::new(self.covariance.clone());
        let root = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
        &eig.eigenvectors * DMatrix::from_diagonal(&root) * eig.eigenvectors.transpose()
    }
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

/// Correlation matrix with `within` inside each block, `between` across
/// blocks and a unit diagonal. `blocks` must partition `0..n`.
pub fn block_template(
    n: usize,
    blocks: &[Vec<usize>],
    within: f64,
    between: f64,
) -> Result<StateTemplate> {
    if !(-1.0 < between && between < within && within <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "need -1 < between < within <= 1, got between={between}, within={within}"
        )));
    }
    let mut block_of = vec![usize::MAX; n];
    for (b, members) in blocks.iter().enumerate() {
        for &i in members {
            if i >= n || block_of[i] != usize::MAX {
                return Err(Error::InvalidInput(format!(
                    "blocks do not partition 0..{n} (index {i})"
                )));
            }
            block_of[i] = b;
        }
    }
    if let Some(i) = block_of.iter().position(|&b| b == usize::MAX) {
        return Err(Error::InvalidInput(format!("node {i} is in no block")));
    }
    let cov = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else if block_of[i] == block_of[j] {
            within
        } else {
            between
        }
    });
    StateTemplate::new(cov, format!("blocks{}", blocks.len()))
}

/// `n_states` templates over `n` nodes: template `s` correlates the `s`-th
/// contiguous slice of nodes at `within` and leaves every other pair
/// uncorrelated, so each state has its own high-strength node group.
pub fn planted_templates(n: usize, n_states: usize, within: f64) -> Result<Vec<StateTemplate>> {
    if n_states == 0 || n < 2 * n_states {
        return Err(Error::InvalidInput(format!(
            "{n} nodes cannot hold {n_states} planted groups of at least 2"
        )));
    }
    (0..n_states)
        .map(|s| {
            let lo = s * n / n_states;
            let hi = (s + 1) * n / n_states;
            let mut blocks = vec![(lo..hi).collect::<Vec<_>>()];
            blocks.extend((0..n).filter(|i| !(lo..hi).contains(i)).map(|i| vec![i]));
            let mut t = block_template(n, &blocks, within, 0.0)?;
            t.name = format!("state{s}");
            Ok(t)
        })
        .collect()
}

/// Generated series with ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub ts: TimeSeriesMatrix,
    /// Template index of every sample.
    pub true_labels: Vec<usize>,
    pub templates: Vec<StateTemplate>,
    pub seed: u64,
}

/// Parameters of [`generate_dataset`] other than the templates.
#[derive(Debug, Clone)]
pub struct GenerateOptions {
    /// `(template index, number of samples)` in temporal order.
    pub dwell: Vec<(usize, usize)>,
    pub n_eeg: usize,
    pub n_fmri: usize,
    pub noise_sigma: f64,
    pub dt: f64,
    pub seed: u64,
}

/// Column labels used for generated data: `eeg01…` then `ic01…`.
pub fn synthetic_labels(n_eeg: usize, n_fmri: usize) -> (Vec<String>, Vec<Modality>) {
    let labels = (1..=n_eeg)
        .map(|i| format!("eeg{i:02}"))
        .chain((1..=n_fmri).map(|i| format!("ic{i:02}")))
        .collect();
    let modalities = std::iter::repeat_n(Modality::Eeg, n_eeg)
        .chain(std::iter::repeat_n(Modality::Fmri, n_fmri))
        .collect();
    (labels, modalities)
}

pub fn generate_dataset(
    templates: &[StateTemplate],
    opts: &GenerateOptions,
) -> Result<SyntheticDataset> {
    let n = opts.n_eeg + opts.n_fmri;
    if templates.is_empty() {
        return Err(Error::InvalidInput("no templates".into()));
    }
    if let Some(t) = templates.iter().find(|t| t.n_nodes() != n) {
        return Err(Error::InvalidInput(format!(
            "template `{}` has dimension {}, expected n_eeg + n_fmri = {n}",
            t.name(),
            t.n_nodes()
        )));
    }
    if !(opts.noise_sigma >= 0.0 && opts.noise_sigma.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "noise sigma must be >= 0, got {}",
            opts.noise_sigma
        )));
    }
    for &(idx, len) in &opts.dwell {
        if idx >= templates.len() {
            return Err(Error::InvalidInput(format!(
                "dwell references template {idx}"
            )));
        }
        if len == 0 {
            return Err(Error::InvalidInput(
                "dwell lengths must be at least 1".into(),
            ));
        }
    }
    let total: usize = opts.dwell.iter().map(|d| d.1).sum();
    let factors: Vec<DMatrix<f64>> = templates.iter().map(StateTemplate::sqrt_factor).collect();
    let mut rng = SeededRng::new(opts.seed);
    let mut values = DMatrix::zeros(total, n);
    let mut true_labels = Vec::with_capacity(total);
    let mut row = 0;
    let mut z = nalgebra::DVector::zeros(n);
    for &(idx, len) in &opts.dwell {
        let factor = &factors[idx];
        for _ in 0..len {
            z.iter_mut().for_each(|v| *v = rng.normal());
            let x = factor * &z;
            for j in 0..n {
                values[(row, j)] = x[j] + opts.noise_sigma * rng.normal();
            }
            true_labels.push(idx);
            row += 1;
        }
    }
    let (labels, modalities) = synthetic_labels(opts.n_eeg, opts.n_fmri);
    let ts = TimeSeriesMatrix::new(values, labels, modalities, opts.dt)?;
    Ok(SyntheticDataset {
        ts,
        true_labels,
        templates: templates.to_vec(),
        seed: opts.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_structure() {
        let t = block_template(4, &[vec![0, 1], vec![2, 3]], 0.8, 0.0).unwrap();
        let c = t.covariance();
        assert_eq!(c[(0, 1)], 0.8);
        assert_eq!(c[(2, 3)], 0.8);
        assert_eq!(c[(1, 2)], 0.0);
        assert!((0..4).all(|i| c[(i, i)] == 1.0));
        let one = block_template(4, &[vec![0, 1, 2, 3]], 0.3, 0.0).unwrap();
        assert!((0..4).all(|i| one.covariance()[(i, i)] == 1.0));
    }

    #[test]
    fn block_template_rejections() {
        assert!(block_template(3, &[vec![0, 1]], 0.5, 0.0).is_err());
        assert!(block_template(3, &[vec![0, 1], vec![1, 2]], 0.5, 0.0).is_err());
        assert!(block_template(3, &[vec![0, 1, 2]], 0.2, 0.5).is_err());
        // strongly negative coupling between many blocks is not PD
        let singles: Vec<Vec<usize>> = (0..6).map(|i| vec![i]).collect();
        let err = block_template(6, &singles, 0.9, -0.5).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite(v) if v < 0.0));
    }

    #[test]
    fn dwell_labels_and_shape() {
        let temps = planted_templates(6, 2, 0.6).unwrap();
        let ds = generate_dataset(
            &temps,
            &GenerateOptions {
                dwell: vec![(0, 100), (1, 156)],
                n_eeg: 2,
                n_fmri: 4,
                noise_sigma: 0.1,
                dt: 2.0,
                seed: 9,
            },
        )
        .unwrap();
        assert_eq!(ds.ts.n_samples(), 256);
        assert_eq!(ds.true_labels.iter().filter(|&&l| l == 0).count(), 100);
        assert!(ds.true_labels[..100].iter().all(|&l| l == 0));
        assert!(ds.true_labels[100..].iter().all(|&l| l == 1));
        assert_eq!(ds.ts.modalities()[1], Modality::Eeg);
        assert_eq!(ds.ts.modalities()[2], Modality::Fmri);
        assert_eq!(ds.ts.labels()[2], "ic01");
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let temps = planted_templates(6, 2, 0.6).unwrap();
        let opts = GenerateOptions {
            dwell: vec![(0, 10)],
            n_eeg: 2,
            n_fmri: 3,
            noise_sigma: 0.0,
            dt: 2.0,
            seed: 1,
        };
        assert!(generate_dataset(&temps, &opts).is_err());
    }

    #[test]
    fn sqrt_factor_squares_back() {
        let t = block_template(5, &[vec![0, 1, 2], vec![3, 4]], 0.6, -0.1).unwrap();
        let s = t.sqrt_factor();
        let back = &s * &s;
        assert!((back - t.covariance()).abs().max() < 1e-12);
    }
}
