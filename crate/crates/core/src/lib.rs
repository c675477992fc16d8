//! Static and dynamic multimodal (EEG + fMRI) brain graphs.
//!
//! The crate turns T×N time-course matrices into signed weighted graphs,
//! computes connectivity strength, clustering coefficient and global
//! efficiency on the positive and negative halves, tracks those metrics over
//! sliding windows, and groups windows into connectivity states by modularity
//! maximization.
//!
//! Module map:
//!
//! - [`timeseries`]: data model plus detrending, nuisance regression, despiking
//!   and zero-phase band-pass filtering.
//! - [`eeg_power`]: per-TR EEG band power and hemodynamic convolution.
//! - [`graph`]: Pearson matrices, signed split and the three graph metrics.
//! - [`dynamics`]: sliding windows, metric series, temporal summaries.
//! - [`states`]: window similarity, modularity, Louvain state detection.
//! - [`synth`]: seeded synthetic datasets with planted states.
//! - [`stats`]: paired t-test.
//! - [`io`], [`config`], [`pipeline`], [`report`]: file formats and orchestration.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod eeg_power;
mod error;
pub mod graph;
pub mod io;
mod linalg;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod states;
pub mod stats;
pub mod synth;
pub mod timeseries;

pub use error::{Error, Result};
