//! Pilot-based joint delay and amplitude estimation.
//!
//! The first two bits of every user are `+1` pilots, so the first two bit
//! periods of the received signal contain each user's signature repeated
//! twice behind a zero prefix of its delay. Users are processed from the
//! least to the most delayed. For each one the delay is found by correlating
//! the signature against the residual left after cancelling all earlier
//! users, then the amplitude is read from the part of the residual that no
//! later user overlaps yet.
//!
//! The earliest arrival is the receiver's time origin: user 1 has delay zero
//! and only its amplitude is estimated.

use crate::codes::SpreadingCode;
use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// Per-user amplitude and integer-chip delay.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub amplitudes: Vec<f64>,
    pub delays: Vec<usize>,
}

impl ChannelEstimate {
    pub fn new(amplitudes: Vec<f64>, delays: Vec<usize>) -> Result<Self> {
        if amplitudes.len() != delays.len() {
            return Err(Error::LengthMismatch {
                expected: amplitudes.len(),
                actual: delays.len(),
            });
        }
        Ok(Self { amplitudes, delays })
    }

    pub fn users(&self) -> usize {
        self.delays.len()
    }

    pub fn max_delay(&self) -> usize {
        self.delays.iter().copied().max().unwrap_or(0)
    }
}

/// The first two bit periods of the received signal, at chip rate (for the
/// delay search) and at the full sampling rate (for amplitudes).
#[derive(Debug, Clone, PartialEq)]
pub struct PilotWindow {
    pub chip_rate: Vec<f64>,
    pub oversampled: Vec<f64>,
    pub ns: usize,
}

/// Which amplitude formula applies to a user in the estimation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    First,
    Middle,
    Last,
}

impl Position {
    pub fn of(user: usize, k_users: usize) -> Self {
        if user == 0 {
            Position::First
        } else if user + 1 == k_users {
            Position::Last
        } else {
            Position::Middle
        }
    }
}

pub fn extract_pilot_window(received: &SampledSignal, nc: usize) -> Result<PilotWindow> {
    let ns = received.ns;
    if ns == 0 || nc == 0 {
        return Err(Error::InvalidParameter("ns and nc must be positive".into()));
    }
    let needed = 2 * nc * ns;
    if received.len() < needed {
        return Err(Error::WindowOutOfBounds {
            start: 0,
            end: needed,
            len: received.len(),
        });
    }
    let oversampled = received.samples[..needed].to_vec();
    let chip_rate = oversampled
        .chunks_exact(ns)
        .map(|chip| chip.iter().sum::<f64>() / ns as f64)
        .collect();
    Ok(PilotWindow {
        chip_rate,
        oversampled,
        ns,
    })
}

/// Offset in `[0, nc-1]` maximizing `|s^T residual[tau .. tau+nc]|`; the
/// smallest offset wins ties.
pub fn estimate_delay(residual_chip_rate: &[f64], code: &SpreadingCode) -> Result<usize> {
    let nc = code.nc();
    if residual_chip_rate.len() != 2 * nc {
        return Err(Error::LengthMismatch {
            expected: 2 * nc,
            actual: residual_chip_rate.len(),
        });
    }
    let mut best = (0usize, f64::NEG_INFINITY);
    for tau in 0..nc {
        let corr: f64 = residual_chip_rate[tau..tau + nc]
            .iter()
            .zip(code.chips())
            .map(|(r, c)| r * c)
            .sum();
        if corr.abs() > best.1 {
            best = (tau, corr.abs());
        }
    }
    Ok(best.0)
}

/// Subtracts `amp * [0; delay] ++ s ++ s`, truncated to the two-bit window,
/// from both views.
pub fn cancel_user(
    window: &PilotWindow,
    amp: f64,
    delay: usize,
    code: &SpreadingCode,
) -> Result<PilotWindow> {
    let nc = code.nc();
    check_delay(delay, nc)?;
    if window.chip_rate.len() != 2 * nc {
        return Err(Error::LengthMismatch {
            expected: 2 * nc,
            actual: window.chip_rate.len(),
        });
    }
    let ns = window.ns;
    let mut out = window.clone();
    for chip in delay..2 * nc {
        let value = amp * code.chips()[(chip - delay) % nc];
        out.chip_rate[chip] -= value;
        for x in &mut out.oversampled[chip * ns..(chip + 1) * ns] {
            *x -= value;
        }
    }
    Ok(out)
}

fn check_delay(delay: usize, nc: usize) -> Result<()> {
    if delay >= nc {
        return Err(Error::DelayOutOfRange { delay, max: nc - 1 });
    }
    Ok(())
}

/// Amplitude from the user's MAI-free region of an already-cancelled window.
///
/// `First` and `Middle` correlate the single chip starting at `delay` with
/// the signature's first chip: every later user starts at least one chip
/// after. `Last` has no later users and uses the rest of the first pilot bit,
/// chips `[delay, nc)`.
pub fn estimate_amplitude(
    window: &PilotWindow,
    delay: usize,
    code: &SpreadingCode,
    position: Position,
) -> Result<f64> {
    let nc = code.nc();
    check_delay(delay, nc)?;
    let ns = window.ns;
    if window.oversampled.len() != 2 * nc * ns {
        return Err(Error::LengthMismatch {
            expected: 2 * nc * ns,
            actual: window.oversampled.len(),
        });
    }
    let used_chips = match position {
        Position::First | Position::Middle => 1,
        Position::Last => nc - delay,
    };
    let start = delay * ns;
    let acc: f64 = window.oversampled[start..start + used_chips * ns]
        .iter()
        .enumerate()
        .map(|(j, r)| r * code.chips()[j / ns])
        .sum();
    Ok(nc as f64 / (used_chips * ns) as f64 * acc)
}

/// Successive estimation of every user's delay and amplitude from the pilot
/// window. Users must be indexed in ascending delay order with the first
/// user at delay zero.
pub fn estimate_channel(
    received: &SampledSignal,
    codes: &[SpreadingCode],
) -> Result<ChannelEstimate> {
    successive_estimate(received, codes, None)
}

/// Same successive loop with the delay search replaced by known delays;
/// only amplitudes are estimated.
pub fn estimate_amplitudes_known_delays(
    received: &SampledSignal,
    codes: &[SpreadingCode],
    delays: &[usize],
) -> Result<ChannelEstimate> {
    if delays.len() != codes.len() {
        return Err(Error::LengthMismatch {
            expected: codes.len(),
            actual: delays.len(),
        });
    }
    successive_estimate(received, codes, Some(delays))
}

fn successive_estimate(
    received: &SampledSignal,
    codes: &[SpreadingCode],
    known_delays: Option<&[usize]>,
) -> Result<ChannelEstimate> {
    let k_users = codes.len();
    if k_users == 0 {
        return Err(Error::InvalidParameter("at least one user required".into()));
    }
    let nc = codes[0].nc();
    if let Some(odd) = codes.iter().find(|c| c.nc() != nc) {
        return Err(Error::LengthMismatch {
            expected: nc,
            actual: odd.nc(),
        });
    }
    let mut residual = extract_pilot_window(received, nc)?;
    let mut amplitudes = Vec::with_capacity(k_users);
    let mut delays = Vec::with_capacity(k_users);
    for (k, code) in codes.iter().enumerate() {
        if k > 0 {
            residual = cancel_user(&residual, amplitudes[k - 1], delays[k - 1], &codes[k - 1])?;
        }
        let delay = match known_delays {
            Some(known) => {
                check_delay(known[k], nc)?;
                known[k]
            }
            None if k == 0 => 0,
            None => estimate_delay(&residual.chip_rate, code)?,
        };
        let amp = estimate_amplitude(&residual, delay, code, Position::of(k, k_users))?;
        delays.push(delay);
        amplitudes.push(amp);
    }
    ChannelEstimate::new(amplitudes, delays)
}
