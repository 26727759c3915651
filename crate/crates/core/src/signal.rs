//! Baseband synthesis on a discrete sample grid: pilot-led bit frames, delayed
//! and amplitude-scaled user waveforms, their superposition, and additive
//! white Gaussian noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::codes::SpreadingCode;
use crate::error::{Error, Result};

/// Leading pilot bits per user, always `+1`.
pub const PILOT_BITS: usize = 2;

/// One transmitter as seen by the receiver.
#[derive(Debug, Clone, Copy)]
pub struct UserProfile<'a> {
    /// 1-based user index.
    pub index: usize,
    pub amplitude: f64,
    pub delay_chips: usize,
    pub code: &'a SpreadingCode,
}

impl<'a> UserProfile<'a> {
    pub fn new(
        index: usize,
        amplitude: f64,
        delay_chips: usize,
        code: &'a SpreadingCode,
    ) -> Result<Self> {
        if !(amplitude > 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "amplitude {amplitude} must be positive"
            )));
        }
        if delay_chips >= code.nc() {
            return Err(Error::DelayOutOfRange {
                delay: delay_chips,
                max: code.nc() - 1,
            });
        }
        Ok(Self {
            index,
            amplitude,
            delay_chips,
            code,
        })
    }
}

/// `K x N` matrix of antipodal bits, one row per user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitFrame {
    rows: Vec<Vec<i8>>,
    n_pilots: usize,
}

impl BitFrame {
    /// A transmitted frame: every entry is `±1` and the first two columns are
    /// the `+1` pilots.
    pub fn new(rows: Vec<Vec<i8>>) -> Result<Self> {
        let frame = Self::unpiloted(rows)?;
        if frame.n_bits() < PILOT_BITS
            || frame
                .rows
                .iter()
                .any(|r| r[..PILOT_BITS].iter().any(|&b| b != 1))
        {
            return Err(Error::InvalidFrame("pilot columns must be +1".into()));
        }
        Ok(Self {
            n_pilots: PILOT_BITS,
            ..frame
        })
    }

    /// Any rectangular `±1` matrix, without the pilot requirement. Used for
    /// detector decisions and for arbitrary bit patterns fed to the
    /// matrix model.
    pub fn unpiloted(rows: Vec<Vec<i8>>) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || n == 0 {
            return Err(Error::InvalidFrame("frame is empty".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidFrame("rows differ in length".into()));
        }
        if rows.iter().flatten().any(|&b| b != 1 && b != -1) {
            return Err(Error::InvalidFrame("entries must be +1 or -1".into()));
        }
        Ok(Self { rows, n_pilots: 0 })
    }

    pub fn n_users(&self) -> usize {
        self.rows.len()
    }

    pub fn n_bits(&self) -> usize {
        self.rows[0].len()
    }

    pub fn n_pilots(&self) -> usize {
        self.n_pilots
    }

    pub fn get(&self, user: usize, bit: usize) -> i8 {
        self.rows[user][bit]
    }

    pub fn row(&self, user: usize) -> &[i8] {
        &self.rows[user]
    }

    pub fn rows(&self) -> &[Vec<i8>] {
        &self.rows
    }
}

/// Real baseband samples at `ns` samples per chip.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub samples: Vec<f64>,
    pub ns: usize,
}

impl SampledSignal {
    pub fn zeros(len: usize, ns: usize) -> Self {
        Self {
            samples: vec![0.0; len],
            ns,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum()
    }
}

/// Samples needed for `n_bits` bits plus one bit period of tail headroom.
pub fn frame_len(n_bits: usize, nc: usize, ns: usize) -> usize {
    (n_bits * nc + nc) * ns
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Per-sample noise standard deviation.
    pub sigma: f64,
    pub seed: u64,
}

pub fn generate_bit_frame<R: Rng + ?Sized>(
    k_users: usize,
    n_bits: usize,
    rng: &mut R,
) -> Result<BitFrame> {
    if k_users == 0 {
        return Err(Error::InvalidFrame("at least one user required".into()));
    }
    if n_bits <= PILOT_BITS {
        return Err(Error::InvalidFrame(format!(
            "{n_bits} bits leave no payload after {PILOT_BITS} pilots"
        )));
    }
    let rows = (0..k_users)
        .map(|_| {
            let mut row = vec![1i8; n_bits];
            for b in &mut row[PILOT_BITS..] {
                *b = if rng.random::<bool>() { 1 } else { -1 };
            }
            row
        })
        .collect();
    BitFrame::new(rows)
}

/// Adds `scale * s(t - start_chip)` to `out`, where the waveform holds one
/// bit of the signature. Samples outside `out` are dropped.
pub(crate) fn add_chip_waveform(
    out: &mut [f64],
    code: &SpreadingCode,
    start_chip: usize,
    ns: usize,
    scale: f64,
) {
    for (m, &c) in code.chips().iter().enumerate() {
        let from = (start_chip + m) * ns;
        if from >= out.len() {
            break;
        }
        let to = (from + ns).min(out.len());
        for x in &mut out[from..to] {
            *x += scale * c;
        }
    }
}

/// Sampled `r_k(t) = sum_i A_k b_k[i] s_k(t - i Tb - tau_k)`.
pub fn modulate_user(
    profile: &UserProfile<'_>,
    bits: &[i8],
    ns: usize,
    frame_len: usize,
) -> Result<SampledSignal> {
    if ns == 0 {
        return Err(Error::InvalidParameter("ns must be at least 1".into()));
    }
    let nc = profile.code.nc();
    let needed = self::frame_len(bits.len(), nc, ns);
    if frame_len < needed {
        return Err(Error::InvalidParameter(format!(
            "frame of {frame_len} samples cannot hold {} bits at ns={ns} (need {needed})",
            bits.len()
        )));
    }
    let mut out = SampledSignal::zeros(frame_len, ns);
    for (i, &b) in bits.iter().enumerate() {
        add_chip_waveform(
            &mut out.samples,
            profile.code,
            i * nc + profile.delay_chips,
            ns,
            profile.amplitude * f64::from(b),
        );
    }
    Ok(out)
}

pub fn superpose(signals: &[SampledSignal]) -> Result<SampledSignal> {
    let (first, rest) = signals
        .split_first()
        .ok_or_else(|| Error::ShapeMismatch("nothing to superpose".into()))?;
    let mut out = first.clone();
    for s in rest {
        if s.ns != out.ns || s.len() != out.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} samples at ns={} vs {} samples at ns={}",
                s.len(),
                s.ns,
                out.len(),
                out.ns
            )));
        }
        for (acc, x) in out.samples.iter_mut().zip(&s.samples) {
            *acc += x;
        }
    }
    Ok(out)
}

/// Adds i.i.d. `N(0, sigma^2)` noise drawn from a ChaCha stream seeded by
/// `params.seed`. Equal seeds give the same standard-normal draws at every
/// sigma, so realizations are paired across noise levels.
pub fn add_awgn(signal: &SampledSignal, params: ChannelParams) -> Result<SampledSignal> {
    if !(params.sigma >= 0.0) || !params.sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise sigma {} must be finite and non-negative",
            params.sigma
        )));
    }
    let mut out = signal.clone();
    if params.sigma == 0.0 {
        return Ok(out);
    }
    let normal =
        Normal::new(0.0, params.sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for x in &mut out.samples {
        *x += normal.sample(&mut rng);
    }
    Ok(out)
}

/// Per-sample noise deviation for a given SNR: `a_ref * 10^(-snr_db/20)`.
pub fn snr_to_sigma(snr_db: f64, a_ref: f64) -> Result<f64> {
    if !(a_ref > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reference amplitude {a_ref} must be positive"
        )));
    }
    Ok(a_ref * 10f64.powf(-snr_db / 20.0))
}

/// Linear amplitude for a level in dB relative to unit amplitude.
pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}
