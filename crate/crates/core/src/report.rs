//! Report files for a finished run.
//!
//! Layout under the output directory:
//!
//! ```text
//! summary.json                 schema version, config echo, all scalar results
//! <analysis>/preprocessed.csv  matrix fed to the graph stages
//! <analysis>/static_w_plus.csv, static_w_minus.csv
//! <analysis>/static_metrics.csv
//! <analysis>/dynamic_<metric>_<sign>.csv   windows × nodes
//! <analysis>/dynamic_global.csv
//! <analysis>/temporal_summary.csv
//! <analysis>/similarity.csv
//! <analysis>/states.txt
//! <analysis>/state_<k>_w_plus.csv, state_<k>_w_minus.csv
//! ```
//!
//! All matrices use the [`io`](crate::io) format and reload with
//! [`read_matrix_file`](crate::io::read_matrix_file).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::dynamics::DynamicGraphSeries;
use crate::graph::{GraphMetricSet, Metric, Sign, SignedWeightedGraph};
use crate::io::{fmt_f64, write_keyed_matrix, write_labels, write_matrix_file};
use crate::pipeline::{Analysis, TemporalSummary};
use crate::states::{AveragedGraph, StatePartition, WindowSimilarityMatrix};
use crate::timeseries::Modality;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub schema_version: u32,
    pub config: &'a PipelineConfig,
    pub analyses: Vec<AnalysisSummary>,
}

#[derive(Debug, Serialize)]
pub struct NetValues {
    pub cs_net: f64,
    pub cc_net: f64,
    pub ge_net: f64,
}

#[derive(Debug, Serialize)]
pub struct BySign<T> {
    pub positive: T,
    pub negative: T,
}

#[derive(Debug, Serialize)]
pub struct StateSummary {
    pub n_states: usize,
    pub modularity_q: f64,
    pub sign: Sign,
    /// Windows per state.
    pub occupancy: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjusted_rand_index: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct AnalysisSummary {
    pub name: String,
    pub n_samples: usize,
    pub n_nodes: usize,
    pub n_windows: usize,
    #[serde(rename = "static")]
    pub static_net: BySign<NetValues>,
    pub dynamic_mean: BySign<NetValues>,
    pub dynamic_variance: BySign<NetValues>,
    pub dynamic_lf_amplitude: BySign<NetValues>,
    pub states: StateSummary,
}

fn net_from(sets: &[(Sign, GraphMetricSet)], sign: Sign) -> NetValues {
    let set = &sets
        .iter()
        .find(|(s, _)| *s == sign)
        .expect("both signs computed")
        .1;
    NetValues {
        cs_net: set.cs_net,
        cc_net: set.cc_net,
        ge_net: set.ge_net,
    }
}

fn net_temporal(
    temporal: &[TemporalSummary],
    sign: Sign,
    pick: impl Fn(&TemporalSummary) -> f64,
) -> NetValues {
    let get = |m: Metric| {
        temporal
            .iter()
            .find(|t| t.metric == m && t.sign == sign)
            .map(&pick)
            .expect("every metric summarized")
    };
    NetValues {
        cs_net: get(Metric::Cs),
        cc_net: get(Metric::Cc),
        ge_net: get(Metric::Ge),
    }
}

fn by_sign<T>(f: impl Fn(Sign) -> T) -> BySign<T> {
    BySign {
        positive: f(Sign::Positive),
        negative: f(Sign::Negative),
    }
}

pub fn summarize_analysis(a: &Analysis, state_sign: Sign) -> AnalysisSummary {
    let mut occupancy = vec![0; a.partition.n_states];
    for &s in &a.partition.assignment {
        occupancy[s] += 1;
    }
    AnalysisSummary {
        name: a.name.clone(),
        n_samples: a.ts.n_samples(),
        n_nodes: a.ts.n_nodes(),
        n_windows: a.dynamic.len(),
        static_net: by_sign(|s| net_from(&a.static_metrics, s)),
        dynamic_mean: by_sign(|s| net_temporal(&a.temporal, s, |t| t.net_mean)),
        dynamic_variance: by_sign(|s| net_temporal(&a.temporal, s, |t| t.net_variance)),
        dynamic_lf_amplitude: by_sign(|s| net_temporal(&a.temporal, s, |t| t.net_lf_amplitude)),
        states: StateSummary {
            n_states: a.partition.n_states,
            modularity_q: a.partition.modularity_q,
            sign: state_sign,
            occupancy,
            adjusted_rand_index: a.ari,
        },
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Write the full report set for all analyses.
pub fn write_report(out: &Path, cfg: &PipelineConfig, analyses: &[Analysis]) -> Result<()> {
    ensure_dir(out)?;
    for a in analyses {
        let dir = out.join(&a.name);
        ensure_dir(&dir)?;
        write_matrix_file(dir.join("preprocessed.csv"), &a.ts)?;
        write_static(&dir, &a.static_graph, &a.static_metrics, a.ts.modalities())?;
        write_dynamic(&dir, &a.dynamic, &a.series, &a.temporal, a.ts.modalities())?;
        write_states(
            &dir,
            &a.dynamic,
            &a.similarity,
            &a.partition,
            &a.state_graphs,
            a.ts.modalities(),
        )?;
    }
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        config: cfg,
        analyses: analyses
            .iter()
            .map(|a| summarize_analysis(a, cfg.state_sign))
            .collect(),
    };
    let mut text =
        serde_json::to_string_pretty(&summary).map_err(|e| Error::InvalidInput(e.to_string()))?;
    text.push('\n');
    write_text(&out.join(SUMMARY_FILE), &text)
}

fn write_graph(
    path: &Path,
    w: &DMatrix<f64>,
    labels: &[String],
    modalities: &[Modality],
) -> Result<()> {
    let keys: Vec<f64> = (0..w.nrows()).map(|i| i as f64).collect();
    write_keyed_matrix(path, w, labels, modalities, &keys)
}

/// Static weight matrices and the per-node metric table.
pub fn write_static(
    dir: &Path,
    graph: &SignedWeightedGraph,
    metrics: &[(Sign, GraphMetricSet)],
    modalities: &[Modality],
) -> Result<()> {
    ensure_dir(dir)?;
    write_graph(
        &dir.join("static_w_plus.csv"),
        graph.w_plus(),
        graph.labels(),
        modalities,
    )?;
    write_graph(
        &dir.join("static_w_minus.csv"),
        graph.w_minus(),
        graph.labels(),
        modalities,
    )?;
    let mut text = String::from("label,modality");
    for (sign, _) in metrics {
        for m in Metric::ALL {
            write!(text, ",{m}_{}", sign.short()).unwrap();
        }
    }
    text.push('\n');
    let rows = graph.labels().len();
    let mut emit_row = |name: &str, tag: &str, value: &dyn Fn(&GraphMetricSet, Metric) -> f64| {
        text.push_str(name);
        text.push(',');
        text.push_str(tag);
        for (_, set) in metrics {
            for m in Metric::ALL {
                text.push(',');
                text.push_str(&fmt_f64(value(set, m)));
            }
        }
        text.push('\n');
    };
    for (i, (label, modality)) in graph.labels().iter().zip(modalities).enumerate().take(rows) {
        emit_row(label, &modality.to_string(), &|set, m| set.get(m).0[i]);
    }
    emit_row("NET", "", &|set, m| set.get(m).1);
    write_text(&dir.join("static_metrics.csv"), &text)
}

/// Per-window metric matrices, the graph-level series and temporal summaries.
pub fn write_dynamic(
    dir: &Path,
    dynamic: &DynamicGraphSeries,
    series: &[(Metric, Sign, crate::dynamics::MetricSeries)],
    temporal: &[TemporalSummary],
    modalities: &[Modality],
) -> Result<()> {
    ensure_dir(dir)?;
    let starts: Vec<f64> = (0..dynamic.len())
        .map(|k| k as f64 * dynamic.dt())
        .collect();
    for (metric, sign, s) in series {
        let path = dir.join(format!("dynamic_{metric}_{}.csv", sign.short()));
        write_keyed_matrix(&path, &s.node, dynamic.labels(), modalities, &starts)?;
    }

    let mut text = String::from("window,start,end");
    for (metric, sign, _) in series {
        write!(text, ",{metric}_{}", sign.short()).unwrap();
    }
    text.push('\n');
    for (k, w) in dynamic.windows().iter().enumerate() {
        write!(text, "{k},{},{}", w.start, w.end).unwrap();
        for (_, _, s) in series {
            text.push(',');
            text.push_str(&fmt_f64(s.global[k]));
        }
        text.push('\n');
    }
    write_text(&dir.join("dynamic_global.csv"), &text)?;

    let mut text = String::from("label,metric,sign,variance,lf_amplitude\n");
    for t in temporal {
        for (i, label) in dynamic.labels().iter().enumerate() {
            writeln!(
                text,
                "{label},{},{},{},{}",
                t.metric,
                t.sign,
                fmt_f64(t.node_variance[i]),
                fmt_f64(t.node_lf_amplitude[i])
            )
            .unwrap();
        }
        writeln!(
            text,
            "NET,{},{},{},{}",
            t.metric,
            t.sign,
            fmt_f64(t.net_variance),
            fmt_f64(t.net_lf_amplitude)
        )
        .unwrap();
    }
    write_text(&dir.join("temporal_summary.csv"), &text)
}

/// Similarity matrix, state assignment and per-state averaged graphs.
pub fn write_states(
    dir: &Path,
    dynamic: &DynamicGraphSeries,
    similarity: &WindowSimilarityMatrix,
    partition: &StatePartition,
    state_graphs: &[AveragedGraph],
    modalities: &[Modality],
) -> Result<()> {
    ensure_dir(dir)?;
    let m = similarity.n_windows();
    let labels: Vec<String> = (0..m).map(|k| format!("w{k:04}")).collect();
    let starts: Vec<f64> = (0..m).map(|k| k as f64 * dynamic.dt()).collect();
    write_keyed_matrix(
        dir.join("similarity.csv"),
        similarity.values(),
        &labels,
        &vec![Modality::Window; m],
        &starts,
    )?;
    write_labels(dir.join("states.txt"), &partition.assignment)?;
    for (k, g) in state_graphs.iter().enumerate() {
        write_graph(
            &dir.join(format!("state_{k}_w_plus.csv")),
            &g.w_plus,
            &g.labels,
            modalities,
        )?;
        write_graph(
            &dir.join(format!("state_{k}_w_minus.csv")),
            &g.w_minus,
            &g.labels,
            modalities,
        )?;
    }
    Ok(())
}
