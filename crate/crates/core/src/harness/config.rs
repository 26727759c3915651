//! Experiment configuration and its flat `key = value` file format.
//!
//! ```text
//! # four users, 3 dB near-far steps
//! k_users = 4
//! ns = 120
//! snr_grid_db = 0, 4, 8, 12
//! amplitude_profile_db = 0, -3, -6, -9
//! delay_mode = random
//! channel_mode = estimated
//! detectors = mf, sic, sicmf
//! code_taps = 45, 75
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::codes::{
    parse_octal_taps, validate_delays, DEFAULT_PREFERRED_PAIR, GOLD_FAMILY_SIZE, SIGNATURE_LEN,
};
use crate::error::{Error, Result};
use crate::signal::{db_to_amplitude, PILOT_BITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    Mf,
    Sic,
    SicMf,
}

impl Detector {
    pub const ALL: [Detector; 3] = [Detector::Mf, Detector::Sic, Detector::SicMf];

    pub fn name(self) -> &'static str {
        match self {
            Detector::Mf => "mf",
            Detector::Sic => "sic",
            Detector::SicMf => "sicmf",
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mf" => Ok(Detector::Mf),
            "sic" => Ok(Detector::Sic),
            "sicmf" | "sic/mf" | "sic-mf" => Ok(Detector::SicMf),
            other => Err(Error::Config(format!(
                "unknown detector {other:?} (expected mf, sic or sicmf)"
            ))),
        }
    }
}

/// What the receiver knows about the channel before detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelMode {
    /// True amplitudes and delays.
    Known,
    /// Delays known, amplitudes estimated from the pilots.
    KnownDelays,
    /// Both estimated from the pilots.
    Estimated,
}

impl ChannelMode {
    pub fn name(self) -> &'static str {
        match self {
            ChannelMode::Known => "known",
            ChannelMode::KnownDelays => "known-delays",
            ChannelMode::Estimated => "estimated",
        }
    }
}

impl fmt::Display for ChannelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "known" => Ok(ChannelMode::Known),
            "known-delays" => Ok(ChannelMode::KnownDelays),
            "estimated" => Ok(ChannelMode::Estimated),
            other => Err(Error::Config(format!(
                "unknown channel mode {other:?} (expected known, known-delays or estimated)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DelayMode {
    /// Distinct chip delays drawn per trial, sorted, first user at zero.
    RandomSorted,
    Fixed(Vec<usize>),
}

impl FromStr for DelayMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "random" | "random_sorted" | "random-sorted" => return Ok(DelayMode::RandomSorted),
            _ => {}
        }
        let list = s.strip_prefix("fixed:").unwrap_or(s);
        Ok(DelayMode::Fixed(parse_list(list, "delay_mode")?))
    }
}

impl fmt::Display for DelayMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DelayMode::RandomSorted => f.write_str("random"),
            DelayMode::Fixed(d) => {
                let parts: Vec<String> = d.iter().map(usize::to_string).collect();
                write!(f, "fixed:{}", parts.join(","))
            }
        }
    }
}

fn parse_list<T: FromStr>(text: &str, key: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Config(format!("{key}: cannot parse {t:?}")))
        })
        .collect()
}

fn parse_scalar<T: FromStr>(text: &str, key: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {text:?}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub k_users: usize,
    pub nc: usize,
    /// Bits per user and frame, pilots included.
    pub n_bits: usize,
    pub ns: usize,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    /// Per-user level in dB, strongest first. Empty means equal amplitudes.
    pub amplitude_profile_db: Vec<f64>,
    pub delay_mode: DelayMode,
    pub channel_mode: ChannelMode,
    pub detectors: Vec<Detector>,
    pub code_taps: (u32, u32),
    pub output_path: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            k_users: 4,
            nc: SIGNATURE_LEN,
            n_bits: 52,
            ns: 120,
            snr_grid_db: (0..=8).map(|i| f64::from(i) * 2.0).collect(),
            trials: 200,
            master_seed: 1,
            amplitude_profile_db: Vec::new(),
            delay_mode: DelayMode::RandomSorted,
            channel_mode: ChannelMode::Estimated,
            detectors: Detector::ALL.to_vec(),
            code_taps: DEFAULT_PREFERRED_PAIR,
            output_path: PathBuf::from("results.csv"),
        }
    }
}

pub const CONFIG_KEYS: [&str; 13] = [
    "k_users",
    "nc",
    "n_bits",
    "ns",
    "snr_grid_db",
    "trials",
    "master_seed",
    "amplitude_profile_db",
    "delay_mode",
    "channel_mode",
    "detectors",
    "code_taps",
    "output_path",
];

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        match key {
            "k_users" => self.k_users = parse_scalar(value, key)?,
            "nc" => self.nc = parse_scalar(value, key)?,
            "n_bits" => self.n_bits = parse_scalar(value, key)?,
            "ns" => self.ns = parse_scalar(value, key)?,
            "snr_grid_db" => self.snr_grid_db = parse_list(value, key)?,
            "trials" => self.trials = parse_scalar(value, key)?,
            "master_seed" => self.master_seed = parse_scalar(value, key)?,
            "amplitude_profile_db" => self.amplitude_profile_db = parse_list(value, key)?,
            "delay_mode" => self.delay_mode = value.parse()?,
            "channel_mode" => self.channel_mode = value.parse()?,
            "detectors" => {
                let mut dets = value
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<Vec<Detector>>>()?;
                dets.sort();
                dets.dedup();
                self.detectors = dets;
            }
            "code_taps" => {
                let taps: Vec<&str> = value.split(',').map(str::trim).collect();
                let [a, b] = taps.as_slice() else {
                    return Err(Error::Config(format!(
                        "code_taps: expected two octal masks, got {value:?}"
                    )));
                };
                self.code_taps = (parse_octal_taps(a)?, parse_octal_taps(b)?);
            }
            "output_path" => self.output_path = PathBuf::from(value.trim()),
            other => {
                return Err(Error::Config(format!(
                    "unknown key {other:?}; valid keys: {}",
                    CONFIG_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Parses the flat config format on top of the defaults. Blank lines and
    /// `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            config
                .set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Inclusive SNR grid `start, start+step, ..., <= stop`.
    pub fn snr_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
            return Err(Error::Config(format!(
                "invalid SNR range {start}..{stop} step {step}"
            )));
        }
        let count = ((stop - start) / step + 1e-9).floor();
        if count < 0.0 {
            return Ok(Vec::new());
        }
        Ok((0..=count as usize)
            .map(|i| start + i as f64 * step)
            .collect())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.k_users == 0 || self.k_users > GOLD_FAMILY_SIZE {
            return fail(format!(
                "k_users must be in [1, {GOLD_FAMILY_SIZE}], got {}",
                self.k_users
            ));
        }
        if self.nc != SIGNATURE_LEN {
            return fail(format!("nc is fixed at {SIGNATURE_LEN}, got {}", self.nc));
        }
        if self.n_bits <= PILOT_BITS {
            return fail(format!(
                "n_bits must exceed the {PILOT_BITS} pilots, got {}",
                self.n_bits
            ));
        }
        if self.ns == 0 {
            return fail("ns must be at least 1".into());
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return fail("snr_grid_db values must be finite".into());
        }
        if !self.amplitude_profile_db.is_empty() {
            if self.amplitude_profile_db.len() != self.k_users {
                return fail(format!(
                    "amplitude_profile_db has {} entries for {} users",
                    self.amplitude_profile_db.len(),
                    self.k_users
                ));
            }
            if self.amplitude_profile_db.iter().any(|a| !a.is_finite()) {
                return fail("amplitude_profile_db values must be finite".into());
            }
            if self.amplitude_profile_db.windows(2).any(|w| w[0] < w[1]) {
                return fail("amplitude_profile_db must be sorted strongest first".into());
            }
        }
        if let DelayMode::Fixed(delays) = &self.delay_mode {
            if delays.len() != self.k_users {
                return fail(format!(
                    "{} fixed delays for {} users",
                    delays.len(),
                    self.k_users
                ));
            }
            validate_delays(delays, self.nc).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.detectors.is_empty() {
            return fail("at least one detector required".into());
        }
        Ok(())
    }

    /// Linear per-user amplitudes.
    pub fn amplitudes(&self) -> Vec<f64> {
        if self.amplitude_profile_db.is_empty() {
            vec![1.0; self.k_users]
        } else {
            self.amplitude_profile_db
                .iter()
                .map(|&db| db_to_amplitude(db))
                .collect()
        }
    }

    /// Amplitude the noise level is referenced to: the strongest user.
    pub fn reference_amplitude(&self) -> f64 {
        self.amplitudes().into_iter().fold(f64::MIN, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn parses_every_key() {
        let text = "\
            # comment line\n\
            k_users = 3\n\
            nc = 32\n\
            n_bits = 10   # trailing comment\n\
            ns = 4\n\
            snr_grid_db = 0, 4.5, 8\n\
            trials = 7\n\
            master_seed = 99\n\
            amplitude_profile_db = 0, -3, -6\n\
            delay_mode = fixed:0,4,17\n\
            channel_mode = known\n\
            detectors = sic, mf\n\
            code_taps = 45, 0o75\n\
            output_path = out/r.csv\n";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.k_users, 3);
        assert_eq!(c.n_bits, 10);
        assert_eq!(c.ns, 4);
        assert_eq!(c.snr_grid_db, vec![0.0, 4.5, 8.0]);
        assert_eq!(c.trials, 7);
        assert_eq!(c.master_seed, 99);
        assert_eq!(c.delay_mode, DelayMode::Fixed(vec![0, 4, 17]));
        assert_eq!(c.channel_mode, ChannelMode::Known);
        assert_eq!(c.detectors, vec![Detector::Mf, Detector::Sic]);
        assert_eq!(c.code_taps, (0o45, 0o75));
        assert_eq!(c.output_path, PathBuf::from("out/r.csv"));
        c.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_key_and_syntax() {
        let err = ExperimentConfig::parse("users = 3").unwrap_err();
        assert!(err.to_string().contains("k_users"), "{err}");
        assert!(ExperimentConfig::parse("k_users 3").is_err());
        assert!(ExperimentConfig::parse("detectors = mmse").is_err());
    }

    #[test]
    fn validation_failures() {
        let bad = |f: fn(&mut ExperimentConfig)| {
            let mut c = ExperimentConfig::default();
            f(&mut c);
            assert!(c.validate().is_err());
        };
        bad(|c| c.k_users = 34);
        bad(|c| c.nc = 31);
        bad(|c| c.n_bits = 2);
        bad(|c| c.amplitude_profile_db = vec![0.0, -3.0]);
        bad(|c| c.amplitude_profile_db = vec![-3.0, 0.0, -6.0, -9.0]);
        bad(|c| c.delay_mode = DelayMode::Fixed(vec![0, 9, 4, 20]));
        bad(|c| c.delay_mode = DelayMode::Fixed(vec![0, 4, 9, 32]));
        bad(|c| c.detectors.clear());
    }

    #[test]
    fn near_far_reference_is_strongest() {
        let mut c = ExperimentConfig::default();
        c.amplitude_profile_db = vec![0.0, -3.0, -6.0, -9.0];
        assert_eq!(c.reference_amplitude(), c.amplitudes()[0]);
        assert_eq!(c.reference_amplitude(), 1.0);
    }

    #[test]
    fn snr_range_inclusive() {
        assert_eq!(
            ExperimentConfig::snr_range(0.0, 8.0, 4.0).unwrap(),
            vec![0.0, 4.0, 8.0]
        );
        assert!(ExperimentConfig::snr_range(4.0, 0.0, 1.0)
            .unwrap()
            .is_empty());
        assert!(ExperimentConfig::snr_range(0.0, 8.0, 0.0).is_err());
    }
}
