//! Correlation matrices, signed weighted graphs and the three graph metrics:
//! connectivity strength (CS), clustering coefficient (CC) and global
//! efficiency (GE).
//!
//! Each correlation matrix R splits into two non-negative weight matrices,
//! `w⁺ = max(r, 0)` and `w⁻ = max(-r, 0)`, with the diagonal cleared. All
//! metrics are computed on one of the two halves at a time.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::timeseries::TimeSeriesMatrix;
use crate::{Error, Result};

/// Denominator guard for the clustering coefficient.
pub const CLUSTERING_EPS: f64 = 1e-12;

/// Symmetric N×N matrix of Pearson coefficients with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    r: DMatrix<f64>,
    labels: Vec<String>,
}

impl CorrelationMatrix {
    pub fn new(r: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        let n = r.nrows();
        if r.ncols() != n || labels.len() != n {
            return Err(Error::InvalidInput(format!(
                "correlation matrix is {}x{} with {} labels",
                r.nrows(),
                r.ncols(),
                labels.len()
            )));
        }
        for i in 0..n {
            if r[(i, i)] != 1.0 {
                return Err(Error::InvalidInput(format!(
                    "diagonal entry {i} is {}",
                    r[(i, i)]
                )));
            }
            for j in 0..i {
                let v = r[(i, j)];
                if !(v.abs() <= 1.0) {
                    return Err(Error::InvalidInput(format!(
                        "r[{i},{j}] = {v} outside [-1, 1]"
                    )));
                }
                if (v - r[(j, i)]).abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(CorrelationMatrix { r, labels })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_nodes(&self) -> usize {
        self.r.nrows()
    }
}

/// Pearson correlation between every pair of columns.
pub fn pearson_correlation_matrix(ts: &TimeSeriesMatrix) -> Result<CorrelationMatrix> {
    let t = ts.n_samples();
    if t < 3 {
        return Err(Error::TooShort(format!(
            "Pearson correlation needs at least 3 samples, got {t}"
        )));
    }
    let n = ts.n_nodes();
    let mut z = ts.values().clone();
    for (j, mut col) in z.column_iter_mut().enumerate() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
        let norm = col.norm();
        if norm == 0.0 || col.iter().all(|v| v.abs() <= f64::EPSILON * mean.abs()) {
            return Err(Error::ConstantColumn {
                label: ts.labels()[j].clone(),
                window: None,
            });
        }
        col /= norm;
    }
    let mut r = DMatrix::identity(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = z.column(i).dot(&z.column(j)).clamp(-1.0, 1.0);
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(CorrelationMatrix {
        r,
        labels: ts.labels().to_vec(),
    })
}

/// Which half of a signed graph to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Positive, Sign::Negative];

    pub fn short(self) -> &'static str {
        match self {
            Sign::Positive => "pos",
            Sign::Negative => "neg",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Positive => "positive",
            Sign::Negative => "negative",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" | "pos" | "+" => Ok(Sign::Positive),
            "negative" | "neg" | "-" => Ok(Sign::Negative),
            other => Err(Error::InvalidInput(format!("unknown sign `{other}`"))),
        }
    }
}

/// Positive and negative weight matrices of one correlation matrix.
///
/// Both halves are symmetric and non-negative with a zero diagonal, and no
/// pair carries weight in both.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedWeightedGraph {
    w_plus: DMatrix<f64>,
    w_minus: DMatrix<f64>,
    labels: Vec<String>,
}

impl SignedWeightedGraph {
    pub fn w_plus(&self) -> &DMatrix<f64> {
        &self.w_plus
    }

    pub fn w_minus(&self) -> &DMatrix<f64> {
        &self.w_minus
    }

    pub fn weights(&self, sign: Sign) -> &DMatrix<f64> {
        match sign {
            Sign::Positive => &self.w_plus,
            Sign::Negative => &self.w_minus,
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_nodes(&self) -> usize {
        self.w_plus.nrows()
    }
}

/// Split R into `(w⁺, w⁻)`; self-correlations are dropped.
pub fn split_signed(r: &CorrelationMatrix) -> SignedWeightedGraph {
    let n = r.n_nodes();
    let v = r.values();
    let w_plus = DMatrix::from_fn(n, n, |i, j| {
        if i != j && v[(i, j)] > 0.0 {
            v[(i, j)]
        } else {
            0.0
        }
    });
    let w_minus = DMatrix::from_fn(n, n, |i, j| {
        if i != j && v[(i, j)] < 0.0 {
            -v[(i, j)]
        } else {
            0.0
        }
    });
    SignedWeightedGraph {
        w_plus,
        w_minus,
        labels: r.labels().to_vec(),
    }
}

/// Node-level values of one metric plus their mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeMetric {
    pub node: Vec<f64>,
    pub net: f64,
}

impl NodeMetric {
    fn from_nodes(node: Vec<f64>) -> Self {
        let net = if node.is_empty() {
            0.0
        } else {
            node.iter().sum::<f64>() / node.len() as f64
        };
        NodeMetric { node, net }
    }
}

/// `CS_i = Σ_j w_ij`, `CS_net = mean_i CS_i`.
pub fn connectivity_strength(w: &DMatrix<f64>) -> NodeMetric {
    NodeMetric::from_nodes(node_strengths(w))
}

pub(crate) fn node_strengths(w: &DMatrix<f64>) -> Vec<f64> {
    w.row_iter().map(|row| row.sum()).collect()
}

/// Normalization used by [`clustering_coefficient`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusteringDenominator {
    /// `CS_i (CS_i - 1)`, with the weighted strength in place of the degree.
    /// Values above 1 are possible when strengths are small.
    #[default]
    Strength,
    /// `k_i (k_i - 1)` with `k_i` the number of non-zero neighbours.
    Degree,
}

impl FromStr for ClusteringDenominator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "strength" => Ok(ClusteringDenominator::Strength),
            "degree" => Ok(ClusteringDenominator::Degree),
            other => Err(Error::InvalidInput(format!(
                "unknown clustering denominator `{other}`"
            ))),
        }
    }
}

/// Weighted clustering coefficient
/// `CC_i = Σ_{j≠k} (w_ij w_ik w_jk)^(1/3) / D_i`, where the sum runs over
/// ordered neighbour pairs and `D_i` is chosen by `denominator`. Nodes with
/// fewer than two neighbours or `D_i ≤ 1e-12` get 0.
pub fn clustering_coefficient(w: &DMatrix<f64>, denominator: ClusteringDenominator) -> NodeMetric {
    let n = w.nrows();
    let strengths = node_strengths(w);
    let node = (0..n)
        .map(|i| {
            let neighbours: Vec<usize> = (0..n).filter(|&j| j != i && w[(i, j)] > 0.0).collect();
            if neighbours.len() < 2 {
                return 0.0;
            }
            let denom = match denominator {
                ClusteringDenominator::Strength => strengths[i] * (strengths[i] - 1.0),
                ClusteringDenominator::Degree => {
                    let k = neighbours.len() as f64;
                    k * (k - 1.0)
                }
            };
            if denom <= CLUSTERING_EPS {
                return 0.0;
            }
            let mut total = 0.0;
            for (a, &j) in neighbours.iter().enumerate() {
                for &k in &neighbours[a + 1..] {
                    let wjk = w[(j, k)];
                    if wjk > 0.0 {
                        total += (w[(i, j)] * w[(i, k)] * wjk).cbrt();
                    }
                }
            }
            // each unordered pair stands for (j, k) and (k, j)
            2.0 * total / denom
        })
        .collect();
    NodeMetric::from_nodes(node)
}

/// Global efficiency `GE_i = Σ_{j≠i} 1/d_ij / (N - 1)` where `d_ij` is the
/// shortest path length under edge lengths `1/w`. Unreachable pairs
/// contribute 0.
pub fn global_efficiency(w: &DMatrix<f64>) -> NodeMetric {
    let n = w.nrows();
    if n < 2 {
        return NodeMetric::from_nodes(vec![0.0; n]);
    }
    let node = (0..n)
        .into_par_iter()
        .map(|source| {
            let dist = shortest_path_lengths(w, source);
            let inv: f64 = dist
                .iter()
                .enumerate()
                .filter(|&(j, d)| j != source && d.is_finite())
                .map(|(_, d)| 1.0 / d)
                .sum();
            inv / (n - 1) as f64
        })
        .collect();
    NodeMetric::from_nodes(node)
}

/// Dense Dijkstra from `source` with edge length `1/w_ij`.
pub fn shortest_path_lengths(w: &DMatrix<f64>, source: usize) -> Vec<f64> {
    let n = w.nrows();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[source] = 0.0;
    for _ in 0..n {
        let mut next = None;
        let mut best = f64::INFINITY;
        for v in 0..n {
            if !done[v] && dist[v] < best {
                best = dist[v];
                next = Some(v);
            }
        }
        let Some(u) = next else { break };
        done[u] = true;
        for v in 0..n {
            let wuv = w[(u, v)];
            if !done[v] && v != u && wuv > 0.0 {
                let cand = dist[u] + 1.0 / wuv;
                if cand < dist[v] {
                    dist[v] = cand;
                }
            }
        }
    }
    dist
}

/// The three graph metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Cs,
    Cc,
    Ge,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Cs, Metric::Cc, Metric::Ge];

    pub fn compute(self, w: &DMatrix<f64>, denominator: ClusteringDenominator) -> NodeMetric {
        match self {
            Metric::Cs => connectivity_strength(w),
            Metric::Cc => clustering_coefficient(w, denominator),
            Metric::Ge => global_efficiency(w),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Cs => "cs",
            Metric::Cc => "cc",
            Metric::Ge => "ge",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cs" | "strength" => Ok(Metric::Cs),
            "cc" | "clustering" => Ok(Metric::Cc),
            "ge" | "efficiency" => Ok(Metric::Ge),
            other => Err(Error::InvalidInput(format!("unknown metric `{other}`"))),
        }
    }
}

/// CS, CC and GE of one weight matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMetricSet {
    pub cs_node: Vec<f64>,
    pub cs_net: f64,
    pub cc_node: Vec<f64>,
    pub cc_net: f64,
    pub ge_node: Vec<f64>,
    pub ge_net: f64,
}

impl GraphMetricSet {
    pub fn compute(w: &DMatrix<f64>, denominator: ClusteringDenominator) -> Self {
        let cs = connectivity_strength(w);
        let cc = clustering_coefficient(w, denominator);
        let ge = global_efficiency(w);
        GraphMetricSet {
            cs_node: cs.node,
            cs_net: cs.net,
            cc_node: cc.node,
            cc_net: cc.net,
            ge_node: ge.node,
            ge_net: ge.net,
        }
    }

    pub fn get(&self, metric: Metric) -> (&[f64], f64) {
        match metric {
            Metric::Cs => (&self.cs_node, self.cs_net),
            Metric::Cc => (&self.cc_node, self.cc_net),
            Metric::Ge => (&self.ge_node, self.ge_net),
        }
    }
}
