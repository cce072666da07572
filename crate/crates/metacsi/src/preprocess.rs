//! Per-packet CSI offset removal.
//!
//! Each packet is sanitized on its own, with no filtering across packets:
//! split amplitude and phase, unwrap the phase along the subcarrier axis per
//! spatial link, fit and subtract the linear-in-k component (which is where
//! the boundary/sampling/carrier offsets live), re-reference the remaining
//! phase to one subcarrier, normalize the amplitudes to unit column mean,
//! and recombine into the three real matrices the models consume.

use std::f64::consts::{PI, TAU};

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use thiserror::Error;

use crate::sim::{CsiPacket, Label};

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("packet {index}: column {column} has non-positive mean amplitude; packet rejected")]
    DegenerateAmplitude { index: u64, column: usize },
    #[error("packet {index}: non-finite CSI entry at ({k}, {m})")]
    NonFiniteEntry { index: u64, k: usize, m: usize },
    #[error("reference subcarrier {k0} out of range [1, {k}]")]
    ReferenceOutOfRange { k0: usize, k: usize },
    #[error("need at least 2 subcarriers for the linear fit, got {0}")]
    TooFewSubcarriers(usize),
}

/// Preprocessing parameters.
#[derive(Debug, Clone, Copy)]
pub struct PreprocessConfig {
    /// Reference subcarrier, 1-based.
    pub reference_subcarrier: usize,
    /// Maximum allowed inter-subcarrier phase jump before a 2*pi correction.
    pub unwrap_threshold_rad: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self { reference_subcarrier: 1, unwrap_threshold_rad: PI }
    }
}

/// The offset-free model input: amplitude, real part, and imaginary part,
/// each K x M, plus the pass-through label and packet index.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessedSample {
    pub amplitude: Array2<f64>,
    pub real_part: Array2<f64>,
    pub imag_part: Array2<f64>,
    pub label: Label,
    pub index: u64,
}

impl PreprocessedSample {
    pub fn n_subcarriers(&self) -> usize {
        self.amplitude.nrows()
    }

    pub fn n_links(&self) -> usize {
        self.amplitude.ncols()
    }
}

/// Split a complex matrix into amplitude and principal-branch phase.
/// Zero entries get phase 0.
pub fn split_amplitude_phase(csi: &Array2<Complex64>) -> (Array2<f64>, Array2<f64>) {
    let amplitude = csi.mapv(|v| v.norm());
    let phase = csi.mapv(|v| if v.norm() == 0.0 { 0.0 } else { v.arg() });
    (amplitude, phase)
}

/// Sequential phase unwrap: successive differences are shifted by multiples
/// of 2*pi into `(-threshold, threshold]`. The output is congruent to the
/// input modulo 2*pi entry-wise and starts at the same first value.
pub fn unwrap_phases(phase_col: &[f64], threshold: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(phase_col.len());
    let Some(&first) = phase_col.first() else {
        return out;
    };
    out.push(first);
    for (i, &raw) in phase_col.iter().enumerate().skip(1) {
        let d = raw - out[i - 1];
        let mut adj = d - TAU * (d / TAU).round();
        if adj > threshold {
            adj -= TAU;
        } else if adj <= -threshold {
            adj += TAU;
        }
        out.push(out[i - 1] + adj);
    }
    out
}

/// Least-squares fit of `phase[k] ~ c + s*k` over 1-based `k` and removal of
/// the fitted line. Returns the residual and `(c, s)`.
///
/// The design matrix has rows `[1, k]`, so the 2x2 normal equations have the
/// closed form used here; the matrix is full rank for every `K >= 2`.
pub fn fit_and_remove_linear(phase_col: &[f64]) -> Result<(Vec<f64>, (f64, f64)), PreprocessError> {
    let k_count = phase_col.len();
    if k_count < 2 {
        return Err(PreprocessError::TooFewSubcarriers(k_count));
    }
    let n = k_count as f64;
    // sums over k = 1..=K
    let sum_k = n * (n + 1.0) / 2.0;
    let sum_k2 = n * (n + 1.0) * (2.0 * n + 1.0) / 6.0;
    let (mut sum_y, mut sum_ky) = (0.0, 0.0);
    for (i, &y) in phase_col.iter().enumerate() {
        sum_y += y;
        sum_ky += (i as f64 + 1.0) * y;
    }
    let det = n * sum_k2 - sum_k * sum_k;
    let intercept = (sum_k2 * sum_y - sum_k * sum_ky) / det;
    let slope = (n * sum_ky - sum_k * sum_y) / det;
    let residual = phase_col
        .iter()
        .enumerate()
        .map(|(i, &y)| y - (intercept + slope * (i as f64 + 1.0)))
        .collect();
    Ok((residual, (intercept, slope)))
}

/// Subtract the phase row of the reference subcarrier (1-based `k0`) from
/// every row, which zeroes the constant offset shared by all subcarriers.
pub fn subtract_reference(
    phase_mat: &Array2<f64>,
    k0: usize,
) -> Result<Array2<f64>, PreprocessError> {
    let k_count = phase_mat.nrows();
    if k0 < 1 || k0 > k_count {
        return Err(PreprocessError::ReferenceOutOfRange { k0, k: k_count });
    }
    let reference: Array1<f64> = phase_mat.row(k0 - 1).to_owned();
    let mut out = phase_mat.clone();
    for mut row in out.rows_mut() {
        row -= &reference;
    }
    Ok(out)
}

/// Divide each column by its own mean over subcarriers so every column has
/// unit mean amplitude. Columns with non-positive or non-finite mean reject
/// the packet upstream.
pub fn normalize_amplitudes(amp_mat: &Array2<f64>) -> Result<Array2<f64>, PreprocessError> {
    let mut out = amp_mat.clone();
    for (m, mut col) in out.columns_mut().into_iter().enumerate() {
        let mean = col.mean().unwrap_or(0.0);
        if !(mean > 0.0) || !mean.is_finite() {
            return Err(PreprocessError::DegenerateAmplitude { index: 0, column: m });
        }
        col.mapv_inplace(|v| v / mean);
    }
    Ok(out)
}

/// Full preprocessing pipeline for one packet.
pub fn preprocess_packet(
    pkt: &CsiPacket,
    cfg: &PreprocessConfig,
) -> Result<PreprocessedSample, PreprocessError> {
    let (k_count, m_count) = pkt.csi.dim();
    if cfg.reference_subcarrier < 1 || cfg.reference_subcarrier > k_count {
        return Err(PreprocessError::ReferenceOutOfRange {
            k0: cfg.reference_subcarrier,
            k: k_count,
        });
    }
    for ((k, m), v) in pkt.csi.indexed_iter() {
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(PreprocessError::NonFiniteEntry { index: pkt.index, k, m });
        }
    }

    let (amplitude, phase) = split_amplitude_phase(&pkt.csi);

    let mut cleaned_phase = Array2::<f64>::zeros((k_count, m_count));
    let mut col_buf = vec![0.0; k_count];
    for m in 0..m_count {
        for k in 0..k_count {
            col_buf[k] = phase[[k, m]];
        }
        let unwrapped = unwrap_phases(&col_buf, cfg.unwrap_threshold_rad);
        let (residual, _beta) = fit_and_remove_linear(&unwrapped)?;
        for (k, &v) in residual.iter().enumerate() {
            cleaned_phase[[k, m]] = v;
        }
    }
    let referenced = subtract_reference(&cleaned_phase, cfg.reference_subcarrier)?;

    let normalized = normalize_amplitudes(&amplitude).map_err(|e| match e {
        PreprocessError::DegenerateAmplitude { column, .. } => {
            PreprocessError::DegenerateAmplitude { index: pkt.index, column }
        }
        other => other,
    })?;

    let real_part = ndarray::Zip::from(&normalized)
        .and(&referenced)
        .map_collect(|&a, &p| a * p.cos());
    let imag_part = ndarray::Zip::from(&normalized)
        .and(&referenced)
        .map_collect(|&a, &p| a * p.sin());

    Ok(PreprocessedSample {
        amplitude: normalized,
        real_part,
        imag_part,
        label: pkt.label.clone(),
        index: pkt.index,
    })
}

/// Feed-through used for the "no preprocessing" baselines: raw amplitude,
/// real, and imaginary parts with no offset removal at all.
pub fn raw_sample(pkt: &CsiPacket) -> PreprocessedSample {
    PreprocessedSample {
        amplitude: pkt.csi.mapv(|v| v.norm()),
        real_part: pkt.csi.mapv(|v| v.re),
        imag_part: pkt.csi.mapv(|v| v.im),
        label: pkt.label.clone(),
        index: pkt.index,
    }
}
