//! Bit detectors: the conventional matched-filter bank, the single-stage
//! successive interference canceller (SIC), and the SIC variant that also
//! removes next-bit interference using matched-filter decisions (SIC/MF).
//!
//! [`MatrixModel`] expresses the noiseless matched-filter outputs through the
//! block-tridiagonal correlation matrix and serves as an independent check on
//! the sample-domain filters.

use nalgebra::{DMatrix, DVector};

use crate::codes::{CorrelationSet, SpreadingCode};
use crate::error::{Error, Result};
use crate::estimation::ChannelEstimate;
use crate::signal::{BitFrame, SampledSignal};

/// Hard decisions, `decisions[k][i]` for user `k` and bit `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionResult {
    pub decisions: Vec<Vec<i8>>,
}

impl DetectionResult {
    pub fn get(&self, user: usize, bit: usize) -> i8 {
        self.decisions[user][bit]
    }

    pub fn n_users(&self) -> usize {
        self.decisions.len()
    }

    pub fn n_bits(&self) -> usize {
        self.decisions.first().map_or(0, Vec::len)
    }

    pub fn to_frame(&self) -> Result<BitFrame> {
        BitFrame::unpiloted(self.decisions.clone())
    }
}

#[inline]
fn sign(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// Adds `scale * s(t - bit_start_chip)` to a segment that begins at absolute
/// sample `segment_start`, clipping the waveform to the segment.
fn add_bit_waveform(
    segment: &mut [f64],
    segment_start: usize,
    code: &SpreadingCode,
    bit_start_chip: usize,
    ns: usize,
    scale: f64,
) {
    let segment_end = segment_start + segment.len();
    for (m, &c) in code.chips().iter().enumerate() {
        let from = ((bit_start_chip + m) * ns).max(segment_start);
        let to = ((bit_start_chip + m + 1) * ns).min(segment_end);
        if from < to {
            for x in &mut segment[from - segment_start..to - segment_start] {
                *x += scale * c;
            }
        }
    }
}

fn correlate(segment: &[f64], code: &SpreadingCode, ns: usize) -> f64 {
    segment
        .chunks_exact(ns)
        .zip(code.chips())
        .map(|(chip, c)| c * chip.iter().sum::<f64>())
        .sum()
}

fn check_users(codes: &[SpreadingCode], est: &ChannelEstimate) -> Result<()> {
    if codes.is_empty() {
        return Err(Error::InvalidParameter("no users".into()));
    }
    if codes.len() != est.users() {
        return Err(Error::LengthMismatch {
            expected: codes.len(),
            actual: est.users(),
        });
    }
    Ok(())
}

/// Correlation of the received signal with a user's signature over the bit
/// window `[i Tb + tau, (i+1) Tb + tau)`, normalized by `ns`.
pub fn matched_filter_output(
    received: &SampledSignal,
    code: &SpreadingCode,
    delay: usize,
    bit_index: usize,
) -> Result<f64> {
    let ns = received.ns;
    let nc = code.nc();
    let start = (bit_index * nc + delay) * ns;
    let end = start + nc * ns;
    if end > received.len() {
        return Err(Error::WindowOutOfBounds {
            start,
            end,
            len: received.len(),
        });
    }
    Ok(correlate(&received.samples[start..end], code, ns) / ns as f64)
}

/// Sign of each matched-filter output; zero maps to `+1`.
pub fn conventional_detect(
    received: &SampledSignal,
    codes: &[SpreadingCode],
    est: &ChannelEstimate,
    n_bits: usize,
) -> Result<DetectionResult> {
    check_users(codes, est)?;
    let decisions = codes
        .iter()
        .zip(&est.delays)
        .map(|(code, &delay)| {
            (0..n_bits)
                .map(|i| matched_filter_output(received, code, delay, i).map(sign))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DetectionResult { decisions })
}

/// `Y = Z W B` for a finite frame: `Z` is block tridiagonal with `R(0)` on the
/// diagonal, `R(-1)` above and `R(1)` below; `W` repeats the amplitudes once
/// per bit; `B` stacks the bits bit-major (`b_1(0)..b_K(0), b_1(1), ...`).
#[derive(Debug, Clone)]
pub struct MatrixModel {
    pub z: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl MatrixModel {
    pub fn build(corr: &CorrelationSet, amplitudes: &[f64], frame: &BitFrame) -> Result<Self> {
        let k = corr.users();
        if amplitudes.len() != k {
            return Err(Error::LengthMismatch {
                expected: k,
                actual: amplitudes.len(),
            });
        }
        if frame.n_users() != k {
            return Err(Error::LengthMismatch {
                expected: k,
                actual: frame.n_users(),
            });
        }
        let n = frame.n_bits();
        let nk = n * k;
        let mut z = DMatrix::zeros(nk, nk);
        for row in 0..n {
            for (col, lag) in [
                (row.checked_sub(1), 1i64),
                (Some(row), 0),
                (Some(row + 1), -1),
            ] {
                let Some(col) = col.filter(|&c| c < n) else {
                    continue;
                };
                let block = corr.lag(lag).expect("lags -1..=1 always present");
                z.view_mut((row * k, col * k), (k, k)).copy_from(block);
            }
        }
        let w = DMatrix::from_diagonal(&DVector::from_fn(nk, |j, _| amplitudes[j % k]));
        let b = DVector::from_fn(nk, |j, _| f64::from(frame.get(j % k, j / k)));
        Ok(Self { z, w, b })
    }

    pub fn outputs(&self) -> DVector<f64> {
        &self.z * (&self.w * &self.b)
    }
}

/// Noiseless matched-filter outputs predicted by the matrix model, indexed
/// `i * K + k`.
pub fn matrix_model_outputs(
    corr: &CorrelationSet,
    amplitudes: &[f64],
    frame: &BitFrame,
) -> Result<Vec<f64>> {
    Ok(MatrixModel::build(corr, amplitudes, frame)?
        .outputs()
        .iter()
        .copied()
        .collect())
}

/// Residual inside the detection window of one bit index. `z_signal` holds
/// only the windowed samples; sample `j` sits at absolute index
/// `window.0 + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct IcuState {
    pub z_signal: SampledSignal,
    pub bit_index: usize,
    pub window: (usize, usize),
}

impl IcuState {
    /// Window `[i Tb, (i+1) Tb + max_delay]` of the received signal.
    pub fn open(
        received: &SampledSignal,
        bit_index: usize,
        nc: usize,
        max_delay: usize,
    ) -> Result<Self> {
        let ns = received.ns;
        let start = bit_index * nc * ns;
        let end = ((bit_index + 1) * nc + max_delay) * ns;
        if end > received.len() {
            return Err(Error::WindowOutOfBounds {
                start,
                end,
                len: received.len(),
            });
        }
        Ok(Self {
            z_signal: SampledSignal {
                samples: received.samples[start..end].to_vec(),
                ns,
            },
            bit_index,
            window: (start, end),
        })
    }

    /// Adds `scale * s(t - bit Tb - delay)` restricted to the window.
    fn add_bit(&mut self, code: &SpreadingCode, bit: usize, delay: usize, scale: f64) {
        let ns = self.z_signal.ns;
        add_bit_waveform(
            &mut self.z_signal.samples,
            self.window.0,
            code,
            bit * code.nc() + delay,
            ns,
            scale,
        );
    }
}

/// One interference cancellation unit: detect user `user`'s bit from the
/// residual, then subtract its reconstruction.
pub fn icu_process(
    mut state: IcuState,
    user: usize,
    est: &ChannelEstimate,
    code: &SpreadingCode,
) -> Result<(i8, IcuState)> {
    let ns = state.z_signal.ns;
    let nc = code.nc();
    let delay = *est.delays.get(user).ok_or(Error::LengthMismatch {
        expected: user + 1,
        actual: est.users(),
    })?;
    let start = (state.bit_index * nc + delay) * ns;
    let end = start + nc * ns;
    if start < state.window.0 || end > state.window.1 {
        return Err(Error::WindowOutOfBounds {
            start,
            end,
            len: state.window.1,
        });
    }
    let offset = start - state.window.0;
    let corr = correlate(&state.z_signal.samples[offset..offset + nc * ns], code, ns);
    let decision = sign(corr);
    let bit = state.bit_index;
    state.add_bit(
        code,
        bit,
        delay,
        -est.amplitudes[user] * f64::from(decision),
    );
    Ok((decision, state))
}

/// Single-stage SIC: per bit index, remove the previous bit's reconstructed
/// interference, then run the ICU chain in user order.
pub fn sic_detect(
    received: &SampledSignal,
    codes: &[SpreadingCode],
    est: &ChannelEstimate,
    n_bits: usize,
) -> Result<DetectionResult> {
    sic_pass(received, codes, est, n_bits, None)
}

/// SIC that also removes next-bit interference reconstructed from
/// matched-filter decisions taken over the whole frame beforehand.
pub fn sic_mf_detect(
    received: &SampledSignal,
    codes: &[SpreadingCode],
    est: &ChannelEstimate,
    n_bits: usize,
) -> Result<DetectionResult> {
    let mf = conventional_detect(received, codes, est, n_bits)?;
    sic_pass(received, codes, est, n_bits, Some(&mf))
}

/// `z_0` for bit `bit_index`: the windowed signal minus reconstructed
/// interference from bit `i-1` (own earlier decisions) and, when
/// `next_bits` is given, bit `i+1`.
pub(crate) fn sic_input(
    received: &SampledSignal,
    codes: &[SpreadingCode],
    est: &ChannelEstimate,
    bit_index: usize,
    previous: &DetectionResult,
    next_bits: Option<&DetectionResult>,
) -> Result<IcuState> {
    let nc = codes[0].nc();
    let n_bits = previous.n_bits();
    let mut state = IcuState::open(received, bit_index, nc, est.max_delay())?;
    for (k, code) in codes.iter().enumerate() {
        let amp = est.amplitudes[k];
        let delay = est.delays[k];
        // a zero-delay user's previous bit ends at the window start and is
        // clipped away
        if bit_index > 0 {
            state.add_bit(
                code,
                bit_index - 1,
                delay,
                -amp * f64::from(previous.get(k, bit_index - 1)),
            );
        }
        if let Some(next) = next_bits.filter(|_| bit_index + 1 < n_bits) {
            state.add_bit(
                code,
                bit_index + 1,
                delay,
                -amp * f64::from(next.get(k, bit_index + 1)),
            );
        }
    }
    Ok(state)
}

fn sic_pass(
    received: &SampledSignal,
    codes: &[SpreadingCode],
    est: &ChannelEstimate,
    n_bits: usize,
    next_bits: Option<&DetectionResult>,
) -> Result<DetectionResult> {
    check_users(codes, est)?;
    let mut result = DetectionResult {
        decisions: vec![vec![1; n_bits]; codes.len()],
    };
    for i in 0..n_bits {
        let mut state = sic_input(received, codes, est, i, &result, next_bits)?;
        for (k, code) in codes.iter().enumerate() {
            let (decision, next) = icu_process(state, k, est, code)?;
            result.decisions[k][i] = decision;
            state = next;
        }
    }
    Ok(result)
}
