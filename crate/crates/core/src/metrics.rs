//! Per-trial estimation and detection quality measures.

use crate::detection::DetectionResult;
use crate::error::{Error, Result};
use crate::signal::{BitFrame, PILOT_BITS};

/// Quality of one trial for one detector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrialMetrics {
    pub pee: f64,
    pub amp_mae: f64,
    pub delay_errors: usize,
    pub bit_errors: usize,
    pub data_bits: usize,
}

fn same_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch {
            expected: a,
            actual: b,
        });
    }
    if a == 0 {
        return Err(Error::InvalidParameter("no users to compare".into()));
    }
    Ok(())
}

/// Mean squared amplitude error, `(1/K) sum |A_k - Â_k|^2`.
pub fn power_estimation_error(true_amps: &[f64], est_amps: &[f64]) -> Result<f64> {
    same_len(true_amps.len(), est_amps.len())?;
    let sum: f64 = true_amps
        .iter()
        .zip(est_amps)
        .map(|(a, e)| (a - e).powi(2))
        .sum();
    Ok(sum / true_amps.len() as f64)
}

/// Mean absolute amplitude error, `(1/K) sum |A_k - Â_k|`.
pub fn amplitude_abs_error(true_amps: &[f64], est_amps: &[f64]) -> Result<f64> {
    same_len(true_amps.len(), est_amps.len())?;
    let sum: f64 = true_amps
        .iter()
        .zip(est_amps)
        .map(|(a, e)| (a - e).abs())
        .sum();
    Ok(sum / true_amps.len() as f64)
}

pub fn delay_errors(true_delays: &[usize], est_delays: &[usize]) -> Result<usize> {
    same_len(true_delays.len(), est_delays.len())?;
    Ok(true_delays
        .iter()
        .zip(est_delays)
        .filter(|(t, e)| t != e)
        .count())
}

/// Fraction of users whose delay estimate is wrong.
pub fn delay_error_rate(true_delays: &[usize], est_delays: &[usize]) -> Result<f64> {
    Ok(delay_errors(true_delays, est_delays)? as f64 / true_delays.len() as f64)
}

/// Bit disagreements between transmitted and detected frames, optionally
/// skipping the pilot columns. Returns `(errors, errors / counted)`.
pub fn bit_error_rate(
    tx: &BitFrame,
    rx: &DetectionResult,
    skip_pilots: bool,
) -> Result<(usize, f64)> {
    if tx.n_users() != rx.n_users() || tx.n_bits() != rx.n_bits() {
        return Err(Error::ShapeMismatch(format!(
            "transmitted {}x{} vs detected {}x{}",
            tx.n_users(),
            tx.n_bits(),
            rx.n_users(),
            rx.n_bits()
        )));
    }
    let first = if skip_pilots {
        PILOT_BITS.min(tx.n_bits())
    } else {
        0
    };
    let counted = tx.n_users() * (tx.n_bits() - first);
    let errors = (0..tx.n_users())
        .map(|k| {
            tx.row(k)[first..]
                .iter()
                .zip(&rx.decisions[k][first..])
                .filter(|(a, b)| a != b)
                .count()
        })
        .sum();
    let rate = if counted == 0 {
        0.0
    } else {
        errors as f64 / counted as f64
    };
    Ok((errors, rate))
}

/// 95% normal-approximation interval for a proportion, clipped to `[0, 1]`.
pub fn ber_confidence_interval(errors: u64, bits: u64) -> (f64, f64) {
    if bits == 0 {
        return (0.0, 0.0);
    }
    let p = errors as f64 / bits as f64;
    let half = 1.959_963_984_540_054 * (p * (1.0 - p) / bits as f64).sqrt();
    ((p - half).max(0.0), (p + half).min(1.0))
}
