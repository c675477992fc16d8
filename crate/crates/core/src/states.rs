//! Connectivity states: groups of windows whose node-strength patterns
//! resemble each other.
//!
//! Every window is summarized by its vector of node strengths. The Pearson
//! correlation between those vectors gives an M×M window-similarity matrix,
//! whose positive part is treated as a weighted graph over windows. A seeded
//! Louvain-style modularity maximization splits that graph into modules, each
//! module is a state, and the member window graphs are averaged into one
//! graph per state.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::dynamics::DynamicGraphSeries;
use crate::graph::{node_strengths, Sign};
use crate::linalg::pearson;
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Smallest modularity gain accepted for a node move.
pub const MIN_GAIN: f64 = 1e-10;

/// Symmetric window-by-window correlation of node-strength vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSimilarityMatrix {
    s: DMatrix<f64>,
}

impl WindowSimilarityMatrix {
    pub fn new(s: DMatrix<f64>) -> Result<Self> {
        let m = s.nrows();
        if s.ncols() != m {
            return Err(Error::InvalidInput(format!(
                "similarity matrix must be square, got {}x{}",
                s.nrows(),
                s.ncols()
            )));
        }
        for i in 0..m {
            if s[(i, i)] != 1.0 {
                return Err(Error::InvalidInput(format!(
                    "diagonal entry {i} is {}",
                    s[(i, i)]
                )));
            }
            for j in 0..i {
                let v = s[(i, j)];
                if !(v.abs() <= 1.0) || (v - s[(j, i)]).abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "invalid similarity at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(WindowSimilarityMatrix { s })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn n_windows(&self) -> usize {
        self.s.nrows()
    }

    /// `max(s, 0)` with a zero diagonal: the graph used for modularity.
    pub fn positive_adjacency(&self) -> DMatrix<f64> {
        let m = self.n_windows();
        DMatrix::from_fn(
            m,
            m,
            |i, j| if i == j { 0.0 } else { self.s[(i, j)].max(0.0) },
        )
    }
}

/// Correlate the node-strength vectors (on the `sign` half) of every pair of
/// windows.
pub fn window_similarity(
    dynamic: &DynamicGraphSeries,
    sign: Sign,
) -> Result<WindowSimilarityMatrix> {
    let m = dynamic.len();
    if m < 2 {
        return Err(Error::TooShort(format!("need at least 2 windows, got {m}")));
    }
    if dynamic.n_nodes() < 3 {
        return Err(Error::InvalidInput(format!(
            "need at least 3 nodes, got {}",
            dynamic.n_nodes()
        )));
    }
    let strengths: Vec<Vec<f64>> = dynamic
        .graphs()
        .iter()
        .map(|g| node_strengths(g.weights(sign)))
        .collect();
    for (w, v) in strengths.iter().enumerate() {
        if v.iter().all(|&x| x == v[0]) {
            return Err(Error::ConstantStrength(w));
        }
    }
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|a| {
            (0..a)
                .map(|b| pearson(&strengths[a], &strengths[b]).unwrap_or(0.0))
                .collect()
        })
        .collect();
    let mut s = DMatrix::identity(m, m);
    for (a, row) in rows.iter().enumerate() {
        for (b, &v) in row.iter().enumerate() {
            s[(a, b)] = v;
            s[(b, a)] = v;
        }
    }
    Ok(WindowSimilarityMatrix { s })
}

fn check_assignment(m: usize, assignment: &[usize]) -> Result<usize> {
    if assignment.len() != m {
        return Err(Error::InvalidInput(format!(
            "assignment has {} entries for {m} windows",
            assignment.len()
        )));
    }
    Ok(assignment.iter().copied().max().map_or(0, |c| c + 1))
}

/// Newman modularity of `assignment` on the clipped similarity graph.
pub fn modularity_score(s: &WindowSimilarityMatrix, assignment: &[usize]) -> Result<f64> {
    modularity_with_resolution(&s.positive_adjacency(), assignment, 1.0)
}

/// `Q = (1/2m) Σ_ab [A_ab - γ k_a k_b / 2m] δ(c_a, c_b)` on a non-negative
/// symmetric adjacency.
pub fn modularity_with_resolution(
    adjacency: &DMatrix<f64>,
    assignment: &[usize],
    resolution: f64,
) -> Result<f64> {
    let n_comm = check_assignment(adjacency.nrows(), assignment)?;
    let degrees: Vec<f64> = adjacency.row_iter().map(|r| r.sum()).collect();
    let two_m: f64 = degrees.iter().sum();
    if two_m <= 0.0 {
        return Err(Error::EmptyGraph);
    }
    let mut internal = vec![0.0; n_comm];
    let mut total = vec![0.0; n_comm];
    for (a, &ca) in assignment.iter().enumerate() {
        total[ca] += degrees[a];
        for (b, &cb) in assignment.iter().enumerate() {
            if ca == cb {
                internal[ca] += adjacency[(a, b)];
            }
        }
    }
    Ok(internal
        .iter()
        .zip(&total)
        .map(|(e, a)| e / two_m - resolution * (a / two_m).powi(2))
        .sum())
}

/// Window-to-state assignment with its modularity.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePartition {
    /// State index per window, 0-based and numbered by first appearance.
    pub assignment: Vec<usize>,
    pub n_states: usize,
    pub modularity_q: f64,
}

/// Seeded multi-level greedy modularity maximization on `max(s, 0)`.
pub fn detect_states(
    s: &WindowSimilarityMatrix,
    resolution: f64,
    seed: u64,
) -> Result<StatePartition> {
    let adjacency = s.positive_adjacency();
    let m = adjacency.nrows();
    if adjacency.iter().all(|&v| v == 0.0) {
        return Err(Error::EmptyGraph);
    }
    let mut rng = SeededRng::new(seed);
    let mut membership: Vec<usize> = (0..m).collect();
    let mut level = adjacency.clone();
    loop {
        let local = local_moves(&level, resolution, &mut rng);
        let n_comm = local.iter().max().map_or(0, |c| c + 1);
        for c in membership.iter_mut() {
            *c = local[*c];
        }
        if n_comm == level.nrows() {
            break;
        }
        level = aggregate(&level, &local, n_comm);
    }
    let mut assignment = relabel_by_first_appearance(&membership);
    let mut q = modularity_with_resolution(&adjacency, &assignment, resolution)?;
    let single = vec![0; m];
    let q_single = modularity_with_resolution(&adjacency, &single, resolution)?;
    if q < q_single {
        assignment = single;
        q = q_single;
    }
    let n_states = assignment.iter().max().map_or(0, |c| c + 1);
    Ok(StatePartition {
        assignment,
        n_states,
        modularity_q: q,
    })
}

/// One level of node moves. Returns contiguous community ids per node.
fn local_moves(adj: &DMatrix<f64>, resolution: f64, rng: &mut SeededRng) -> Vec<usize> {
    let n = adj.nrows();
    let degrees: Vec<f64> = adj.row_iter().map(|r| r.sum()).collect();
    let two_m: f64 = degrees.iter().sum();
    let m_half = two_m / 2.0;
    let mut community: Vec<usize> = (0..n).collect();
    let mut totals = degrees.clone();
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);

    let mut links = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut moved = true;
    while moved {
        moved = false;
        for &node in &order {
            let home = community[node];
            let k = degrees[node];
            for &c in &touched {
                links[c] = 0.0;
            }
            touched.clear();
            for other in 0..n {
                let w = adj[(node, other)];
                if other != node && w > 0.0 {
                    let c = community[other];
                    if links[c] == 0.0 {
                        touched.push(c);
                    }
                    links[c] += w;
                }
            }
            totals[home] -= k;
            let gain = |c: usize, links: &[f64]| {
                links[c] / m_half - resolution * k * totals[c] / (2.0 * m_half * m_half)
            };
            let home_gain = gain(home, &links);
            touched.sort_unstable();
            let mut best = home;
            let mut best_gain = home_gain;
            for &c in &touched {
                let g = gain(c, &links);
                // strict comparison keeps the lowest index among ties
                if g > best_gain || (g == best_gain && c < best) {
                    best = c;
                    best_gain = g;
                }
            }
            if best != home && best_gain - home_gain > MIN_GAIN {
                community[node] = best;
                moved = true;
            } else {
                best = home;
            }
            totals[best] += k;
        }
    }
    relabel_by_first_appearance(&community)
}

fn aggregate(adj: &DMatrix<f64>, community: &[usize], n_comm: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n_comm, n_comm);
    for i in 0..adj.nrows() {
        for j in 0..adj.ncols() {
            let w = adj[(i, j)];
            if w != 0.0 {
                out[(community[i], community[j])] += w;
            }
        }
    }
    out
}

fn relabel_by_first_appearance(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Elementwise mean of the member window graphs of one state. Averaging
/// breaks the rule that a pair is either positive or negative, so both
/// halves can be non-zero for the same pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedGraph {
    pub w_plus: DMatrix<f64>,
    pub w_minus: DMatrix<f64>,
    pub labels: Vec<String>,
    pub n_windows: usize,
}

impl AveragedGraph {
    /// `w⁺ - w⁻`, the mean signed correlation off the diagonal.
    pub fn signed(&self) -> DMatrix<f64> {
        &self.w_plus - &self.w_minus
    }
}

/// Average the window graphs of each state.
pub fn state_average_graphs(
    dynamic: &DynamicGraphSeries,
    assignment: &[usize],
) -> Result<Vec<AveragedGraph>> {
    let n_states = check_assignment(dynamic.len(), assignment)?;
    let n = dynamic.n_nodes();
    let mut plus = vec![DMatrix::zeros(n, n); n_states];
    let mut minus = vec![DMatrix::zeros(n, n); n_states];
    let mut counts = vec![0usize; n_states];
    for (g, &state) in dynamic.graphs().iter().zip(assignment) {
        plus[state] += g.w_plus();
        minus[state] += g.w_minus();
        counts[state] += 1;
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::InvalidInput(format!("state {empty} has no windows")));
    }
    Ok(plus
        .into_iter()
        .zip(minus)
        .zip(counts)
        .map(|((p, q), count)| AveragedGraph {
            w_plus: p / count as f64,
            w_minus: q / count as f64,
            labels: dynamic.labels().to_vec(),
            n_windows: count,
        })
        .collect())
}

/// Chance-corrected agreement between two labelings (Hubert–Arabie).
/// Two single-cluster labelings score 1.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings differ in length");
    let n = a.len();
    let ka = a.iter().max().map_or(0, |v| v + 1);
    let kb = b.iter().max().map_or(0, |v| v + 1);
    let mut table = vec![vec![0u64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let pairs = |c: u64| (c * c.saturating_sub(1) / 2) as f64;
    let index: f64 = table.iter().flatten().map(|&c| pairs(c)).sum();
    let rows: f64 = table.iter().map(|r| pairs(r.iter().sum())).sum();
    let cols: f64 = (0..kb)
        .map(|j| pairs(table.iter().map(|r| r[j]).sum()))
        .sum();
    let total = pairs(n as u64);
    let expected = rows * cols / total;
    let max = 0.5 * (rows + cols);
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}
