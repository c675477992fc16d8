//! Pipeline configuration.
//!
//! The same keys are accepted from a TOML file and from command-line flags.
//! Everything except the output directory and the thread count is echoed
//! into the run summary, which is enough to repeat the analysis.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{WindowSpec, LOW_FREQ_BAND};
use crate::eeg_power::HRF_DURATION;
use crate::graph::{ClusteringDenominator, Sign};
use crate::timeseries::{Band, BandDefinition, DEFAULT_BANDPASS, DEFAULT_OUTLIER_Z};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Band-power EEG already on the TR grid.
    pub eeg_matrix: Option<PathBuf>,
    /// High-rate EEG; its time column sets the sampling rate.
    pub eeg_raw: Option<PathBuf>,
    /// Component time courses (any tagged columns are accepted).
    pub fmri_matrix: Option<PathBuf>,
    /// Nuisance regressors, one column per parameter.
    pub regressors: Option<PathBuf>,
    /// Per-sample ground-truth state labels, used only for scoring.
    pub labels: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub output: PathBuf,
    #[serde(skip_serializing)]
    pub threads: Option<usize>,

    pub tr_seconds: f64,
    pub bands: Vec<Band>,
    /// Optional `[lo, hi]` overrides keyed by band name.
    pub band_edges: BTreeMap<Band, [f64; 2]>,
    pub hrf: bool,
    pub hrf_duration: f64,

    /// Polynomial detrending degree; 0 disables.
    pub detrend_order: usize,
    pub regress_derivatives: bool,
    pub despike: bool,
    pub outlier_z: f64,
    pub bandpass: bool,
    pub bandpass_lo: f64,
    pub bandpass_hi: f64,

    pub window_length: usize,
    pub window_step: usize,
    pub clustering_denominator: ClusteringDenominator,
    pub lf_lo: f64,
    pub lf_hi: f64,

    pub state_sign: Sign,
    pub resolution: f64,
    pub seed: Option<u64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let window = WindowSpec::default();
        PipelineConfig {
            eeg_matrix: None,
            eeg_raw: None,
            fmri_matrix: None,
            regressors: None,
            labels: None,
            output: PathBuf::from("mmgraph-out"),
            threads: None,
            tr_seconds: 2.0,
            bands: Band::ALL.to_vec(),
            band_edges: BTreeMap::new(),
            hrf: true,
            hrf_duration: HRF_DURATION,
            detrend_order: 3,
            regress_derivatives: true,
            despike: true,
            outlier_z: DEFAULT_OUTLIER_Z,
            bandpass: true,
            bandpass_lo: DEFAULT_BANDPASS.0,
            bandpass_hi: DEFAULT_BANDPASS.1,
            window_length: window.length_tr,
            window_step: window.step_tr,
            clustering_denominator: ClusteringDenominator::Strength,
            lf_lo: LOW_FREQ_BAND.0,
            lf_hi: LOW_FREQ_BAND.1,
            state_sign: Sign::Positive,
            resolution: 1.0,
            seed: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn window(&self) -> Result<WindowSpec> {
        WindowSpec::new(self.window_length, self.window_step)
    }

    pub fn band_definitions(&self) -> Result<Vec<BandDefinition>> {
        self.bands
            .iter()
            .map(|&b| match self.band_edges.get(&b) {
                Some(&[lo, hi]) => BandDefinition::new(b, lo, hi),
                None => Ok(BandDefinition::standard(b)),
            })
            .collect()
    }

    /// Structural checks that do not touch the file system.
    pub fn validate(&self) -> Result<()> {
        if !(self.tr_seconds > 0.0 && self.tr_seconds.is_finite()) {
            return Err(Error::Config(format!(
                "tr_seconds must be > 0, got {}",
                self.tr_seconds
            )));
        }
        if self.eeg_matrix.is_some() && self.eeg_raw.is_some() {
            return Err(Error::Config(
                "give either eeg_matrix or eeg_raw, not both".into(),
            ));
        }
        if self.eeg_matrix.is_none() && self.eeg_raw.is_none() && self.fmri_matrix.is_none() {
            return Err(Error::Config("no input matrix configured".into()));
        }
        if self.eeg_raw.is_some() && self.bands.is_empty() {
            return Err(Error::Config("eeg_raw needs at least one band".into()));
        }
        if self.detrend_order > 3 {
            return Err(Error::Config(format!(
                "detrend_order must be 0..=3, got {}",
                self.detrend_order
            )));
        }
        if !(self.resolution > 0.0) {
            return Err(Error::Config(format!(
                "resolution must be > 0, got {}",
                self.resolution
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        self.window()?;
        self.band_definitions()?;
        Ok(())
    }

    /// Checks that every referenced input exists.
    pub fn check_paths(&self) -> Result<()> {
        for path in [
            &self.eeg_matrix,
            &self.eeg_raw,
            &self.fmri_matrix,
            &self.regressors,
            &self.labels,
        ]
        .into_iter()
        .flatten()
        {
            if !path.exists() {
                return Err(Error::Config(format!(
                    "input `{}` does not exist",
                    path.display()
                )));
            }
        }
        Ok(())
    }
}
