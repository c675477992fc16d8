//! Plain-text matrix files and label sidecars.
//!
//! A matrix file is comma-separated. The header is `time` followed by one
//! `label:TAG` field per column, with `TAG` one of `EEG`, `FMRI` or `WINDOW`.
//! Every following row starts with its timestamp in seconds (for matrices
//! without a time axis, the row index) and then the N values. Numbers are
//! written in scientific notation with 17 significant digits, which
//! round-trips every `f64` exactly.
//!
//! ```text
//! time,Fz:EEG,IC01:FMRI
//! 0.0000000000000000e0,1.2500000000000000e-1,-3.0000000000000000e0
//! 2.0000000000000000e0,...
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::timeseries::{Modality, TimeSeriesMatrix};
use crate::{Error, Result};

/// Format one number with full round-trip precision.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<TimeSeriesMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text, path)
}

pub fn write_matrix_file(path: impl AsRef<Path>, ts: &TimeSeriesMatrix) -> Result<()> {
    let path = path.as_ref();
    let times: Vec<f64> = (0..ts.n_samples()).map(|i| i as f64 * ts.dt()).collect();
    let text = render_matrix(ts.values(), ts.labels(), ts.modalities(), &times)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Write a matrix whose first column carries `row_keys` (row index or window
/// start time) instead of a uniform sample clock.
pub fn write_keyed_matrix(
    path: impl AsRef<Path>,
    values: &DMatrix<f64>,
    labels: &[String],
    modalities: &[Modality],
    row_keys: &[f64],
) -> Result<()> {
    let path = path.as_ref();
    let text = render_matrix(values, labels, modalities, row_keys)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn render_matrix(
    values: &DMatrix<f64>,
    labels: &[String],
    modalities: &[Modality],
    row_keys: &[f64],
) -> Result<String> {
    if labels.len() != values.ncols()
        || modalities.len() != values.ncols()
        || row_keys.len() != values.nrows()
    {
        return Err(Error::InvalidInput(
            "matrix, labels and row keys disagree in shape".into(),
        ));
    }
    let mut out = String::from("time");
    for (label, tag) in labels.iter().zip(modalities) {
        if label.is_empty() || label.contains([',', '\n', '\r']) {
            return Err(Error::InvalidInput(format!(
                "label `{label}` cannot be written"
            )));
        }
        write!(out, ",{label}:{tag}").unwrap();
    }
    out.push('\n');
    for (i, key) in row_keys.iter().enumerate() {
        out.push_str(&fmt_f64(*key));
        for v in values.row(i).iter() {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parse matrix text; `origin` only labels error messages.
pub fn parse_matrix(text: &str, origin: &Path) -> Result<TimeSeriesMatrix> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (header_line, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let mut fields = header.split(',').map(str::trim);
    if fields.next() != Some("time") {
        return Err(err(header_line, "header must start with `time`".into()));
    }
    let mut labels = Vec::new();
    let mut modalities = Vec::new();
    for field in fields {
        let (label, tag) = field.rsplit_once(':').ok_or_else(|| {
            err(
                header_line,
                format!("header field `{field}` is not `label:TAG`"),
            )
        })?;
        let modality: Modality = tag
            .parse()
            .map_err(|e: Error| err(header_line, e.to_string()))?;
        if label.is_empty() {
            return Err(err(header_line, "empty label".into()));
        }
        if labels.iter().any(|l| l == label) {
            return Err(err(header_line, format!("duplicate label `{label}`")));
        }
        labels.push(label.to_string());
        modalities.push(modality);
    }
    if labels.is_empty() {
        return Err(err(header_line, "no data columns".into()));
    }
    let n = labels.len();
    let mut times = Vec::new();
    let mut data = Vec::new();
    for (line_no, line) in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != n + 1 {
            return Err(err(
                line_no,
                format!("expected {} fields, found {}", n + 1, cells.len()),
            ));
        }
        for (k, cell) in cells.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| err(line_no, format!("`{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(err(line_no, format!("non-finite value `{cell}`")));
            }
            if k == 0 {
                times.push((line_no, v));
            } else {
                data.push(v);
            }
        }
    }
    let t = times.len();
    if t < 2 {
        return Err(err(
            header_line,
            format!("need at least 2 data rows, found {t}"),
        ));
    }
    let dt = times[1].1 - times[0].1;
    if !(dt > 0.0) {
        return Err(err(times[1].0, "time column must increase".into()));
    }
    for pair in times.windows(2) {
        let step = pair[1].1 - pair[0].1;
        if (step - dt).abs() > 1e-6 * dt {
            return Err(err(
                pair[1].0,
                format!("non-uniform time step {step} (expected {dt})"),
            ));
        }
    }
    let values = DMatrix::from_row_slice(t, n, &data);
    TimeSeriesMatrix::new(values, labels, modalities, dt)
}

/// One non-negative integer per line.
pub fn write_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::with_capacity(labels.len() * 3);
    for l in labels {
        writeln!(text, "{l}").unwrap();
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: format!("`{}` is not a non-negative integer", l.trim()),
            })
        })
        .collect()
}
