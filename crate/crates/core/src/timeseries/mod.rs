//! Time-course matrices and the post-processing chain applied to component
//! and channel time series before any graph is built.

mod fir;

use std::collections::HashSet;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::linalg::{median, ols_residuals};
use crate::{Error, Result};

pub(crate) use fir::zero_phase_bandpass;

/// Origin of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Modality {
    Eeg,
    Fmri,
    /// Columns that index sliding windows rather than brain nodes
    /// (window-similarity matrices).
    Window,
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modality::Eeg => "EEG",
            Modality::Fmri => "FMRI",
            Modality::Window => "WINDOW",
        })
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "EEG" => Ok(Modality::Eeg),
            "FMRI" => Ok(Modality::Fmri),
            "WINDOW" => Ok(Modality::Window),
            other => Err(Error::InvalidInput(format!(
                "unknown modality tag `{other}`"
            ))),
        }
    }
}

/// A T×N matrix of samples (rows) by nodes (columns) on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesMatrix {
    values: DMatrix<f64>,
    labels: Vec<String>,
    modalities: Vec<Modality>,
    dt: f64,
}

impl TimeSeriesMatrix {
    pub fn new(
        values: DMatrix<f64>,
        labels: Vec<String>,
        modalities: Vec<Modality>,
        dt: f64,
    ) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(Error::TooShort(format!(
                "need at least 2 samples, got {}",
                values.nrows()
            )));
        }
        if values.ncols() == 0 {
            return Err(Error::InvalidInput("matrix has no columns".into()));
        }
        if labels.len() != values.ncols() || modalities.len() != values.ncols() {
            return Err(Error::InvalidInput(format!(
                "{} columns but {} labels and {} modality tags",
                values.ncols(),
                labels.len(),
                modalities.len()
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sampling interval must be > 0, got {dt}"
            )));
        }
        let mut seen = HashSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate label `{label}`")));
            }
        }
        check_finite(&values, &labels)?;
        Ok(TimeSeriesMatrix {
            values,
            labels,
            modalities,
            dt,
        })
    }

    /// Matrix whose columns all share one modality tag.
    pub fn with_modality(
        values: DMatrix<f64>,
        labels: Vec<String>,
        modality: Modality,
        dt: f64,
    ) -> Result<Self> {
        let modalities = vec![modality; labels.len()];
        Self::new(values, labels, modalities, dt)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn modalities(&self) -> &[Modality] {
        &self.modalities
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_nodes(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.column(j).iter().copied().collect()
    }

    /// Same metadata, new values of identical shape.
    pub(crate) fn with_values(&self, values: DMatrix<f64>) -> Self {
        debug_assert_eq!(values.shape(), self.values.shape());
        TimeSeriesMatrix {
            values,
            labels: self.labels.clone(),
            modalities: self.modalities.clone(),
            dt: self.dt,
        }
    }

    /// Rows `range` as a new matrix.
    pub fn slice_rows(&self, range: Range<usize>) -> Result<Self> {
        if range.end > self.n_samples() || range.start >= range.end {
            return Err(Error::InvalidInput(format!(
                "row range {range:?} outside 0..{}",
                self.n_samples()
            )));
        }
        let values = self.values.rows(range.start, range.len()).into_owned();
        Self::new(
            values,
            self.labels.clone(),
            self.modalities.clone(),
            self.dt,
        )
    }

    /// Column-wise concatenation `[self | other]`.
    pub fn hconcat(&self, other: &TimeSeriesMatrix) -> Result<Self> {
        if self.n_samples() != other.n_samples() {
            return Err(Error::InvalidInput(format!(
                "cannot concatenate {} rows with {} rows",
                self.n_samples(),
                other.n_samples()
            )));
        }
        if (self.dt - other.dt).abs() > 1e-9 * self.dt {
            return Err(Error::DtMismatch(self.dt, other.dt));
        }
        let (t, a, b) = (self.n_samples(), self.n_nodes(), other.n_nodes());
        let mut values = DMatrix::zeros(t, a + b);
        values.columns_mut(0, a).copy_from(&self.values);
        values.columns_mut(a, b).copy_from(&other.values);
        let labels = self.labels.iter().chain(&other.labels).cloned().collect();
        let modalities = self
            .modalities
            .iter()
            .chain(&other.modalities)
            .copied()
            .collect();
        Self::new(values, labels, modalities, self.dt)
    }

    /// Apply `f` to every column independently.
    fn map_columns(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Self {
        let mut out = self.values.clone();
        for j in 0..self.n_nodes() {
            let col = self.column(j);
            let mapped = f(&col);
            out.column_mut(j).copy_from_slice(&mapped);
        }
        self.with_values(out)
    }
}

fn check_finite(values: &DMatrix<f64>, labels: &[String]) -> Result<()> {
    for (j, col) in values.column_iter().enumerate() {
        if let Some(row) = col.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                label: labels[j].clone(),
                row,
            });
        }
    }
    Ok(())
}

/// The five EEG frequency bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Delta,
    Theta,
    Alpha,
    Beta,
    LowGamma,
}

impl Band {
    pub const ALL: [Band; 5] = [
        Band::Delta,
        Band::Theta,
        Band::Alpha,
        Band::Beta,
        Band::LowGamma,
    ];

    /// Conventional edges in Hz.
    pub fn default_edges(self) -> (f64, f64) {
        match self {
            Band::Delta => (1.0, 4.0),
            Band::Theta => (4.0, 8.0),
            Band::Alpha => (8.0, 12.0),
            Band::Beta => (12.0, 30.0),
            Band::LowGamma => (30.0, 50.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Band::Delta => "delta",
            Band::Theta => "theta",
            Band::Alpha => "alpha",
            Band::Beta => "beta",
            Band::LowGamma => "low_gamma",
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Band {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s
            .trim()
            .to_ascii_lowercase()
            .replace([' ', '-'], "_")
            .as_str()
        {
            "delta" => Ok(Band::Delta),
            "theta" => Ok(Band::Theta),
            "alpha" => Ok(Band::Alpha),
            "beta" => Ok(Band::Beta),
            "low_gamma" | "lowgamma" | "gamma" => Ok(Band::LowGamma),
            other => Err(Error::InvalidInput(format!("unknown band `{other}`"))),
        }
    }
}

/// A named frequency band with edges in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandDefinition {
    pub name: Band,
    pub lo: f64,
    pub hi: f64,
}

impl BandDefinition {
    pub fn new(name: Band, lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "band {name} needs 0 < lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(BandDefinition { name, lo, hi })
    }

    pub fn standard(name: Band) -> Self {
        let (lo, hi) = name.default_edges();
        BandDefinition { name, lo, hi }
    }
}

/// Residuals after removing a polynomial trend of degree `order` (1 to 3)
/// from every column. The intercept is always part of the fit.
pub fn detrend_polynomial(ts: &TimeSeriesMatrix, order: usize) -> Result<TimeSeriesMatrix> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidInput(format!(
            "detrend order must be 1, 2 or 3, got {order}"
        )));
    }
    let t = ts.n_samples();
    if t <= order + 1 {
        return Err(Error::TooShort(format!(
            "degree-{order} detrending needs more than {} samples per column, got {t}",
            order + 1
        )));
    }
    // time rescaled to [-1, 1] keeps the Vandermonde design well conditioned
    let design = DMatrix::from_fn(t, order + 1, |i, p| {
        let tau = 2.0 * i as f64 / (t - 1) as f64 - 1.0;
        tau.powi(p as i32)
    });
    Ok(ts.with_values(ols_residuals(&design, ts.values())))
}

/// Result of [`regress_nuisance`].
#[derive(Debug, Clone)]
pub struct NuisanceFit {
    pub cleaned: TimeSeriesMatrix,
    /// Number of design columns actually used, intercept included.
    pub design_columns: usize,
    /// Indices into the expanded regressor set (`0..K` raw, `K..2K` first
    /// differences) of columns dropped for being identically zero.
    pub dropped: Vec<usize>,
}

/// Expanded nuisance design: intercept, the `K` regressors and, optionally,
/// their first differences (first element 0). Identically-zero columns are
/// left out and reported.
pub fn nuisance_design(
    regressors: &DMatrix<f64>,
    include_derivatives: bool,
) -> (DMatrix<f64>, Vec<usize>) {
    let t = regressors.nrows();
    let k = regressors.ncols();
    let mut candidates: Vec<Vec<f64>> = regressors
        .column_iter()
        .map(|c| c.iter().copied().collect())
        .collect();
    if include_derivatives {
        for j in 0..k {
            let col = &candidates[j];
            let diff: Vec<f64> = (0..t)
                .map(|i| if i == 0 { 0.0 } else { col[i] - col[i - 1] })
                .collect();
            candidates.push(diff);
        }
    }
    let mut columns = vec![vec![1.0; t]];
    let mut dropped = Vec::new();
    for (idx, col) in candidates.into_iter().enumerate() {
        if col.iter().all(|&v| v == 0.0) {
            dropped.push(idx);
        } else {
            columns.push(col);
        }
    }
    let design = DMatrix::from_fn(t, columns.len(), |i, j| columns[j][i]);
    (design, dropped)
}

/// Ordinary least-squares removal of nuisance regressors (e.g. six motion
/// parameters) from every column. Rank-deficient designs use the
/// minimum-norm solution.
pub fn regress_nuisance(
    ts: &TimeSeriesMatrix,
    regressors: &DMatrix<f64>,
    include_derivatives: bool,
) -> Result<NuisanceFit> {
    if regressors.nrows() != ts.n_samples() {
        return Err(Error::InvalidInput(format!(
            "regressors have {} rows, time series has {}",
            regressors.nrows(),
            ts.n_samples()
        )));
    }
    if let Some(bad) = regressors.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "non-finite regressor value at flat index {bad}"
        )));
    }
    let (design, dropped) = nuisance_design(regressors, include_derivatives);
    for idx in &dropped {
        log::warn!("nuisance regressor column {idx} is all zeros; dropped");
    }
    if ts.n_samples() <= design.ncols() {
        return Err(Error::TooShort(format!(
            "{} samples cannot support a {}-column nuisance design",
            ts.n_samples(),
            design.ncols()
        )));
    }
    let cleaned = ts.with_values(ols_residuals(&design, ts.values()));
    Ok(NuisanceFit {
        cleaned,
        design_columns: design.ncols(),
        dropped,
    })
}

/// Default robust z-score threshold for [`remove_outliers`].
pub const DEFAULT_OUTLIER_Z: f64 = 4.0;

/// Replace samples whose robust z-score `|x - median| / (1.4826 MAD)` exceeds
/// `z_threshold` by linear interpolation between the nearest inliers (edge
/// outliers take the nearest inlier value). Detection is repeated on the
/// cleaned column until nothing more is flagged, so the operation is
/// idempotent.
///
/// When MAD is zero the scale is zero and any sample off the median counts
/// as an outlier; a constant column is therefore returned untouched.
pub fn remove_outliers(ts: &TimeSeriesMatrix, z_threshold: f64) -> Result<TimeSeriesMatrix> {
    if !(z_threshold > 0.0) {
        return Err(Error::InvalidInput(format!(
            "outlier threshold must be positive, got {z_threshold}"
        )));
    }
    if ts.n_samples() < 3 {
        return Err(Error::TooShort(format!(
            "outlier removal needs at least 3 samples, got {}",
            ts.n_samples()
        )));
    }
    Ok(ts.map_columns(|col| despike(col, z_threshold)))
}

const MAD_SCALE: f64 = 1.4826;
const MAX_DESPIKE_PASSES: usize = 64;

fn despike(col: &[f64], z_threshold: f64) -> Vec<f64> {
    let mut x = col.to_vec();
    for _ in 0..MAX_DESPIKE_PASSES {
        let flagged = flag_outliers(&x, z_threshold);
        if !flagged.iter().any(|&f| f) {
            return x;
        }
        interpolate_flagged(&mut x, &flagged);
    }
    log::warn!("despiking did not settle after {MAX_DESPIKE_PASSES} passes");
    x
}

fn flag_outliers(x: &[f64], z_threshold: f64) -> Vec<bool> {
    let med = median(x);
    let deviations: Vec<f64> = x.iter().map(|v| (v - med).abs()).collect();
    let scale = MAD_SCALE * median(&deviations);
    deviations
        .iter()
        .map(|&d| {
            if scale > 0.0 {
                d / scale > z_threshold
            } else {
                d > 0.0
            }
        })
        .collect()
}

fn interpolate_flagged(x: &mut [f64], flagged: &[bool]) {
    let inliers: Vec<usize> = (0..x.len()).filter(|&i| !flagged[i]).collect();
    // at least half the samples sit within one MAD of the median
    debug_assert!(!inliers.is_empty());
    let original = x.to_vec();
    for i in (0..x.len()).filter(|&i| flagged[i]) {
        let right = inliers.partition_point(|&j| j < i);
        x[i] = match (right.checked_sub(1).map(|l| inliers[l]), inliers.get(right)) {
            (Some(a), Some(&b)) => {
                let w = (i - a) as f64 / (b - a) as f64;
                original[a] + w * (original[b] - original[a])
            }
            (Some(a), None) => original[a],
            (None, Some(&b)) => original[b],
            (None, None) => original[i],
        };
    }
}

/// Zero-phase band-pass of every column to `[lo, hi]` Hz.
pub fn bandpass_filter(ts: &TimeSeriesMatrix, lo: f64, hi: f64) -> Result<TimeSeriesMatrix> {
    let nyquist = 0.5 / ts.dt();
    if !(lo > 0.0 && lo < hi && hi < nyquist) {
        return Err(Error::Nyquist { lo, hi, nyquist });
    }
    let (lo_n, hi_n) = (lo * ts.dt(), hi * ts.dt());
    Ok(ts.map_columns(|col| zero_phase_bandpass(col, lo_n, hi_n)))
}

/// Default band-pass edges for BOLD-rate series, in Hz.
pub const DEFAULT_BANDPASS: (f64, f64) = (0.01, 0.10);
