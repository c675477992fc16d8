//! Windowed-sinc (Hamming) FIR band-pass applied forward and backward.
//!
//! Frequencies here are normalized to cycles per sample, so the Nyquist
//! frequency is 0.5.

use std::f64::consts::PI;

/// Filter order for a band `[lo, hi]` on a series of length `len`:
/// `min(len - 1 rounded down to even, 4 / transition width rounded up to even)`,
/// never below 2. The transition width is the narrowest of the lower stopband,
/// the passband and the upper stopband.
pub(crate) fn filter_order(lo: f64, hi: f64, len: usize) -> usize {
    let width = lo.min(hi - lo).min(0.5 - hi);
    let design = (4.0 / width).ceil() as usize;
    let design = design + design % 2;
    let cap = len.saturating_sub(1) & !1;
    design.min(cap).max(2)
}

fn hamming(k: usize, ntaps: usize) -> f64 {
    0.54 - 0.46 * (2.0 * PI * k as f64 / (ntaps - 1) as f64).cos()
}

/// Unit-DC-gain low-pass taps, `ntaps` odd. The second half mirrors the
/// first so the kernel is exactly symmetric.
fn lowpass_taps(cutoff: f64, ntaps: usize) -> Vec<f64> {
    let m = (ntaps - 1) / 2;
    let mut taps = vec![0.0; ntaps];
    for k in 0..=m {
        let x = (m - k) as f64;
        let sinc = if k == m {
            2.0 * cutoff
        } else {
            (2.0 * PI * cutoff * x).sin() / (PI * x)
        };
        let v = sinc * hamming(k, ntaps);
        taps[k] = v;
        taps[ntaps - 1 - k] = v;
    }
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Band-pass taps as the difference of two unit-gain low-passes, so the
/// taps sum to zero and DC is rejected exactly.
pub(crate) fn bandpass_taps(lo: f64, hi: f64, ntaps: usize) -> Vec<f64> {
    let high = lowpass_taps(hi, ntaps);
    let low = lowpass_taps(lo, ntaps);
    high.iter().zip(&low).map(|(h, l)| h - l).collect()
}

/// Zero-phase band-pass of one series. Edges are extended by odd reflection
/// about the end samples; the symmetric kernel is applied twice (forward and
/// backward), giving a magnitude response of |H|².
pub(crate) fn zero_phase_bandpass(x: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let n = x.len();
    if n < 3 {
        // too short for any kernel; only the DC rejection survives
        let m = x.iter().sum::<f64>() / n as f64;
        return x.iter().map(|v| v - m).collect();
    }
    let order = filter_order(lo, hi, n);
    let taps = bandpass_taps(lo, hi, order + 1);
    let half = order / 2;
    let pad = order;

    let mut padded = Vec::with_capacity(n + 2 * pad);
    for i in (1..=pad).rev() {
        padded.push(2.0 * x[0] - x[i]);
    }
    padded.extend_from_slice(x);
    for i in 1..=pad {
        padded.push(2.0 * x[n - 1] - x[n - 1 - i]);
    }

    // first pass is valid on [half, len - half), second on [pad, len - pad)
    let first = centered_conv(&padded, &taps, half, padded.len() - half);
    let second = centered_conv(&first, &taps, half, first.len() - half);
    debug_assert_eq!(second.len(), n);
    second
}

fn centered_conv(x: &[f64], taps: &[f64], from: usize, to: usize) -> Vec<f64> {
    let half = taps.len() / 2;
    (from..to)
        .map(|i| {
            let window = &x[i - half..=i + half];
            window.iter().zip(taps).map(|(a, b)| a * b).sum()
        })
        .collect()
}
