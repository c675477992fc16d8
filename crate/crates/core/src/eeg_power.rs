//! EEG band power on the TR grid and hemodynamic convolution.
//!
//! Raw EEG is cut into consecutive TR-length segments. Each segment is
//! band-passed with the same zero-phase windowed-sinc filter used for BOLD
//! series and reduced to its mean square. The resulting power series is then
//! convolved with a canonical double-gamma HRF so that it lines up with the
//! delayed BOLD response.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::timeseries::{zero_phase_bandpass, BandDefinition, Modality, TimeSeriesMatrix};
use crate::{Error, Result};

/// High-rate multichannel EEG, one column per channel.
#[derive(Debug, Clone)]
pub struct RawEegRecord {
    samples: DMatrix<f64>,
    fs: f64,
    channel_labels: Vec<String>,
}

impl RawEegRecord {
    pub fn new(samples: DMatrix<f64>, fs: f64, channel_labels: Vec<String>) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sampling rate must be > 0, got {fs}"
            )));
        }
        // reuse the matrix checks (finite values, unique labels)
        TimeSeriesMatrix::with_modality(
            samples.clone(),
            channel_labels.clone(),
            Modality::Eeg,
            1.0 / fs,
        )?;
        Ok(RawEegRecord {
            samples,
            fs,
            channel_labels,
        })
    }

    /// Interpret a matrix sampled at `1/dt` Hz as raw EEG.
    pub fn from_matrix(ts: &TimeSeriesMatrix) -> Result<Self> {
        Self::new(ts.values().clone(), 1.0 / ts.dt(), ts.labels().to_vec())
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn channel_labels(&self) -> &[String] {
        &self.channel_labels
    }
}

/// Output of [`band_power_series`].
#[derive(Debug, Clone)]
pub struct BandPower {
    pub series: TimeSeriesMatrix,
    /// Trailing samples that did not fill a whole TR.
    pub dropped_samples: usize,
}

/// Mean band power per channel and per `dt`-long segment.
pub fn band_power_series(raw: &RawEegRecord, band: &BandDefinition, dt: f64) -> Result<BandPower> {
    let fs = raw.fs();
    let nyquist = fs / 2.0;
    if !(band.hi < nyquist) {
        return Err(Error::Nyquist {
            lo: band.lo,
            hi: band.hi,
            nyquist,
        });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
    }
    let per_segment = fs * dt;
    let seg_len = per_segment.round() as usize;
    if seg_len == 0 || (per_segment - seg_len as f64).abs() > 1e-6 * per_segment {
        return Err(Error::InvalidInput(format!(
            "a {dt} s segment at {fs} Hz is {per_segment} samples, not a whole number"
        )));
    }
    let total = raw.samples().nrows();
    let n_segments = total / seg_len;
    let dropped_samples = total - n_segments * seg_len;
    if dropped_samples > 0 {
        log::warn!(
            "dropping {dropped_samples} trailing EEG samples that do not fill a {dt} s segment"
        );
    }
    if n_segments < 2 {
        return Err(Error::TooShort(format!(
            "{total} samples give {n_segments} whole {dt} s segment(s); need at least 2"
        )));
    }
    let (lo, hi) = (band.lo / fs, band.hi / fs);
    let columns: Vec<Vec<f64>> = (0..raw.samples().ncols())
        .into_par_iter()
        .map(|c| {
            let channel = raw.samples().column(c);
            (0..n_segments)
                .map(|s| {
                    let segment: Vec<f64> =
                        channel.rows(s * seg_len, seg_len).iter().copied().collect();
                    let filtered = zero_phase_bandpass(&segment, lo, hi);
                    filtered.iter().map(|v| v * v).sum::<f64>() / seg_len as f64
                })
                .collect()
        })
        .collect();
    let values = DMatrix::from_fn(n_segments, columns.len(), |i, j| columns[j][i]);
    let series =
        TimeSeriesMatrix::with_modality(values, raw.channel_labels().to_vec(), Modality::Eeg, dt)?;
    Ok(BandPower {
        series,
        dropped_samples,
    })
}

/// Hemodynamic response sampled on a uniform grid, peak-normalized to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct HrfKernel {
    taps: Vec<f64>,
    dt: f64,
}

impl HrfKernel {
    /// Wrap arbitrary taps; they are rescaled so the largest magnitude is 1.
    pub fn new(taps: Vec<f64>, dt: f64) -> Result<Self> {
        if taps.is_empty() || taps.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "HRF taps must be finite and non-empty".into(),
            ));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
        }
        let peak = taps.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if peak == 0.0 {
            return Err(Error::InvalidInput("HRF taps are all zero".into()));
        }
        Ok(HrfKernel {
            taps: taps.into_iter().map(|v| v / peak).collect(),
            dt,
        })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// Default kernel length in seconds.
pub const HRF_DURATION: f64 = 32.0;

const PEAK_SHAPE: f64 = 6.0;
const UNDERSHOOT_SHAPE: f64 = 16.0;
const UNDERSHOOT_RATIO: f64 = 6.0;

fn gamma_pdf_integer_shape(t: f64, shape: f64) -> f64 {
    // unit scale; Γ(a) = (a - 1)! for the integer shapes used here
    let gamma: f64 = (1..shape as u32).map(f64::from).product();
    t.powf(shape - 1.0) * (-t).exp() / gamma
}

/// Canonical double-gamma HRF value at `t` seconds (unnormalized).
pub fn double_gamma(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    gamma_pdf_integer_shape(t, PEAK_SHAPE)
        - gamma_pdf_integer_shape(t, UNDERSHOOT_SHAPE) / UNDERSHOOT_RATIO
}

/// Double-gamma HRF (peak shape 6, undershoot shape 16, unit scales,
/// undershoot ratio 1/6) sampled at `0, dt, 2dt, … ≤ duration`.
pub fn hrf_kernel(dt: f64, duration: f64) -> Result<HrfKernel> {
    if !(dt > 0.0 && dt <= duration && duration.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "HRF needs 0 < dt <= duration, got dt={dt}, duration={duration}"
        )));
    }
    let n = (duration / dt + 1e-9).floor() as usize + 1;
    let taps = (0..n).map(|k| double_gamma(k as f64 * dt)).collect();
    HrfKernel::new(taps, dt)
}

/// Causal convolution of every column with the kernel, truncated to the
/// input length: `y[t] = Σ_{k≤t} x[t-k] h[k]`.
pub fn hrf_convolve(power: &TimeSeriesMatrix, kernel: &HrfKernel) -> Result<TimeSeriesMatrix> {
    if (power.dt() - kernel.dt()).abs() > 1e-9 * power.dt() {
        return Err(Error::DtMismatch(power.dt(), kernel.dt()));
    }
    let t = power.n_samples();
    let h = kernel.taps();
    let x = power.values();
    let out = DMatrix::from_fn(t, power.n_nodes(), |i, j| {
        (0..=i.min(h.len() - 1)).map(|k| x[(i - k, j)] * h[k]).sum()
    });
    TimeSeriesMatrix::new(
        out,
        power.labels().to_vec(),
        power.modalities().to_vec(),
        power.dt(),
    )
}
