//! End-to-end orchestration: inputs → preprocessing → static graph →
//! sliding-window graphs → temporal summaries → connectivity states.

use nalgebra::DMatrix;

use crate::config::PipelineConfig;
use crate::dynamics::{
    dynamic_graph_series, low_freq_amplitude, metric_series, temporal_variance, DynamicGraphSeries,
    MetricSeries,
};
use crate::eeg_power::{band_power_series, hrf_convolve, hrf_kernel, RawEegRecord};
use crate::graph::{
    pearson_correlation_matrix, split_signed, GraphMetricSet, Metric, Sign, SignedWeightedGraph,
};
use crate::io::{read_labels, read_matrix_file};
use crate::report::write_report;
use crate::states::{
    adjusted_rand_index, detect_states, state_average_graphs, window_similarity, AveragedGraph,
    StatePartition, WindowSimilarityMatrix,
};
use crate::timeseries::{
    bandpass_filter, detrend_polynomial, regress_nuisance, remove_outliers, TimeSeriesMatrix,
};
use crate::{Error, Result};

/// Preprocessing toggles, a subset of [`PipelineConfig`].
#[derive(Debug, Clone)]
pub struct PreprocessOptions {
    pub detrend_order: usize,
    pub regress_derivatives: bool,
    pub despike: bool,
    pub outlier_z: f64,
    pub bandpass: Option<(f64, f64)>,
}

impl From<&PipelineConfig> for PreprocessOptions {
    fn from(cfg: &PipelineConfig) -> Self {
        PreprocessOptions {
            detrend_order: cfg.detrend_order,
            regress_derivatives: cfg.regress_derivatives,
            despike: cfg.despike,
            outlier_z: cfg.outlier_z,
            bandpass: cfg.bandpass.then_some((cfg.bandpass_lo, cfg.bandpass_hi)),
        }
    }
}

/// Detrend → nuisance regression → despike → band-pass, each step optional.
pub fn preprocess(
    ts: &TimeSeriesMatrix,
    regressors: Option<&DMatrix<f64>>,
    opts: &PreprocessOptions,
) -> Result<TimeSeriesMatrix> {
    let mut ts = ts.clone();
    if opts.detrend_order > 0 {
        ts = detrend_polynomial(&ts, opts.detrend_order).map_err(|e| e.at_stage("detrend"))?;
    }
    if let Some(regs) = regressors {
        ts = regress_nuisance(&ts, regs, opts.regress_derivatives)
            .map_err(|e| e.at_stage("nuisance regression"))?
            .cleaned;
    }
    if opts.despike {
        ts = remove_outliers(&ts, opts.outlier_z).map_err(|e| e.at_stage("outlier removal"))?;
    }
    if let Some((lo, hi)) = opts.bandpass {
        ts = bandpass_filter(&ts, lo, hi).map_err(|e| e.at_stage("bandpass"))?;
    }
    Ok(ts)
}

/// Variance and low-frequency amplitude of one metric series column.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalSummary {
    pub metric: Metric,
    pub sign: Sign,
    /// Per node, in label order.
    pub node_variance: Vec<f64>,
    pub node_lf_amplitude: Vec<f64>,
    /// Of the graph-level series.
    pub net_variance: f64,
    pub net_lf_amplitude: f64,
    /// Mean of the graph-level series across windows.
    pub net_mean: f64,
}

/// Everything computed for one analysis (one EEG band, or the plain input).
#[derive(Debug, Clone)]
pub struct Analysis {
    pub name: String,
    pub ts: TimeSeriesMatrix,
    pub static_graph: SignedWeightedGraph,
    pub static_metrics: Vec<(Sign, GraphMetricSet)>,
    pub dynamic: DynamicGraphSeries,
    pub series: Vec<(Metric, Sign, MetricSeries)>,
    pub temporal: Vec<TemporalSummary>,
    pub similarity: WindowSimilarityMatrix,
    pub partition: StatePartition,
    pub state_graphs: Vec<AveragedGraph>,
    /// Agreement with ground-truth window labels when labels were supplied.
    pub ari: Option<f64>,
}

/// Graph stages on an already preprocessed matrix.
pub fn analyze(
    name: &str,
    ts: &TimeSeriesMatrix,
    cfg: &PipelineConfig,
    seed: u64,
    sample_labels: Option<&[usize]>,
) -> Result<Analysis> {
    let r = pearson_correlation_matrix(ts).map_err(|e| e.at_stage("static graph"))?;
    let static_graph = split_signed(&r);
    let static_metrics = Sign::BOTH
        .iter()
        .map(|&s| {
            (
                s,
                GraphMetricSet::compute(static_graph.weights(s), cfg.clustering_denominator),
            )
        })
        .collect();

    let window = cfg.window().map_err(|e| e.at_stage("dynamic graphs"))?;
    let dynamic = dynamic_graph_series(ts, window).map_err(|e| e.at_stage("dynamic graphs"))?;
    let mut series = Vec::new();
    for metric in Metric::ALL {
        for sign in Sign::BOTH {
            series.push((
                metric,
                sign,
                metric_series(&dynamic, metric, sign, cfg.clustering_denominator),
            ));
        }
    }

    let temporal = series
        .iter()
        .map(|(metric, sign, s)| temporal_summary(*metric, *sign, s, dynamic.dt(), cfg))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("temporal summary"))?;

    let similarity =
        window_similarity(&dynamic, cfg.state_sign).map_err(|e| e.at_stage("window similarity"))?;
    let partition = detect_states(&similarity, cfg.resolution, seed)
        .map_err(|e| e.at_stage("state detection"))?;
    let state_graphs = state_average_graphs(&dynamic, &partition.assignment)
        .map_err(|e| e.at_stage("state graphs"))?;

    let ari = match sample_labels {
        Some(labels) => {
            if labels.len() != ts.n_samples() {
                return Err(Error::InvalidInput(format!(
                    "{} labels for {} samples",
                    labels.len(),
                    ts.n_samples()
                ))
                .at_stage("state scoring"));
            }
            let truth = window_majority_labels(labels, dynamic.windows());
            Some(adjusted_rand_index(&truth, &partition.assignment))
        }
        None => None,
    };

    Ok(Analysis {
        name: name.to_string(),
        ts: ts.clone(),
        static_graph,
        static_metrics,
        dynamic,
        series,
        temporal,
        similarity,
        partition,
        state_graphs,
        ari,
    })
}

/// Variance and low-frequency amplitude of every column of one metric series.
pub fn temporal_summary(
    metric: Metric,
    sign: Sign,
    s: &MetricSeries,
    dt: f64,
    cfg: &PipelineConfig,
) -> Result<TemporalSummary> {
    let mut node_variance = Vec::with_capacity(s.node.ncols());
    let mut node_lf_amplitude = Vec::with_capacity(s.node.ncols());
    for col in s.node.column_iter() {
        let v: Vec<f64> = col.iter().copied().collect();
        node_variance.push(temporal_variance(&v)?);
        node_lf_amplitude.push(low_freq_amplitude(&v, dt, cfg.lf_lo, cfg.lf_hi)?);
    }
    Ok(TemporalSummary {
        metric,
        sign,
        node_variance,
        node_lf_amplitude,
        net_variance: temporal_variance(&s.global)?,
        net_lf_amplitude: low_freq_amplitude(&s.global, dt, cfg.lf_lo, cfg.lf_hi)?,
        net_mean: s.global.iter().sum::<f64>() / s.global.len() as f64,
    })
}

/// Label of each window = most frequent sample label inside it (lowest
/// label on ties).
pub fn window_majority_labels(labels: &[usize], windows: &[std::ops::Range<usize>]) -> Vec<usize> {
    let k = labels.iter().max().map_or(0, |v| v + 1);
    windows
        .iter()
        .map(|w| {
            let mut counts = vec![0usize; k];
            for &l in &labels[w.clone()] {
                counts[l] += 1;
            }
            let best = counts.iter().copied().max().unwrap_or(0);
            counts.iter().position(|&c| c == best).unwrap_or(0)
        })
        .collect()
}

/// Load inputs and build the matrices to analyze: one per EEG band when raw
/// EEG is given, otherwise a single `combined` matrix.
pub fn assemble_inputs(cfg: &PipelineConfig) -> Result<Vec<(String, TimeSeriesMatrix)>> {
    let fmri = cfg
        .fmri_matrix
        .as_ref()
        .map(read_matrix_file)
        .transpose()
        .map_err(|e| e.at_stage("read fmri"))?;
    if let Some(f) = &fmri {
        check_tr(f, cfg.tr_seconds).map_err(|e| e.at_stage("read fmri"))?;
    }
    let kernel = if cfg.hrf {
        Some(hrf_kernel(cfg.tr_seconds, cfg.hrf_duration).map_err(|e| e.at_stage("hrf"))?)
    } else {
        None
    };
    let convolve = |eeg: TimeSeriesMatrix| -> Result<TimeSeriesMatrix> {
        match &kernel {
            Some(k) => hrf_convolve(&eeg, k).map_err(|e| e.at_stage("hrf")),
            None => Ok(eeg),
        }
    };
    let join = |eeg: Option<TimeSeriesMatrix>| -> Result<TimeSeriesMatrix> {
        match (eeg, &fmri) {
            (Some(e), Some(f)) => e.hconcat(f).map_err(|e| e.at_stage("concatenate")),
            (Some(e), None) => Ok(e),
            (None, Some(f)) => Ok(f.clone()),
            (None, None) => Err(Error::Config("no input matrix configured".into())),
        }
    };

    if let Some(path) = &cfg.eeg_raw {
        let raw_ts = read_matrix_file(path).map_err(|e| e.at_stage("read eeg"))?;
        let raw = RawEegRecord::from_matrix(&raw_ts).map_err(|e| e.at_stage("read eeg"))?;
        let bands = cfg.band_definitions()?;
        return bands
            .iter()
            .map(|band| {
                let power = band_power_series(&raw, band, cfg.tr_seconds)
                    .map_err(|e| e.at_stage("bandpower"))?;
                Ok((band.name.to_string(), join(Some(convolve(power.series)?))?))
            })
            .collect();
    }
    let eeg = match &cfg.eeg_matrix {
        Some(path) => {
            let e = read_matrix_file(path).map_err(|e| e.at_stage("read eeg"))?;
            check_tr(&e, cfg.tr_seconds).map_err(|e| e.at_stage("read eeg"))?;
            Some(convolve(e)?)
        }
        None => None,
    };
    Ok(vec![("combined".to_string(), join(eeg)?)])
}

fn check_tr(ts: &TimeSeriesMatrix, tr: f64) -> Result<()> {
    if (ts.dt() - tr).abs() > 1e-6 * tr {
        return Err(Error::DtMismatch(ts.dt(), tr));
    }
    Ok(())
}

/// Output of [`run_pipeline`].
#[derive(Debug)]
pub struct PipelineOutput {
    pub analyses: Vec<Analysis>,
}

/// Run every stage and write the report set under `cfg.output`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    cfg.check_paths()?;
    let seed = cfg
        .seed
        .ok_or_else(|| Error::Config("a seed is required for state detection".into()))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        let regressors = cfg
            .regressors
            .as_ref()
            .map(|p| read_matrix_file(p).map(|m| m.values().clone()))
            .transpose()
            .map_err(|e| e.at_stage("read regressors"))?;
        let labels = cfg
            .labels
            .as_ref()
            .map(read_labels)
            .transpose()
            .map_err(|e| e.at_stage("read labels"))?;
        let opts = PreprocessOptions::from(cfg);
        let mut analyses = Vec::new();
        for (name, ts) in assemble_inputs(cfg)? {
            let clean = preprocess(&ts, regressors.as_ref(), &opts)?;
            analyses.push(analyze(&name, &clean, cfg, seed, labels.as_deref())?);
        }
        write_report(&cfg.output, cfg, &analyses).map_err(|e| e.at_stage("report"))?;
        Ok(PipelineOutput { analyses })
    })
}
