//! Seeded Monte Carlo experiments: one trial runs frame generation, the
//! channel, estimation, every configured detector and the metrics; a sweep
//! aggregates trials per SNR point and detector.
//!
//! Trial `t` draws everything from a ChaCha stream keyed by
//! `(master_seed, t)`. The SNR only scales the noise, so all SNR points of a
//! sweep see the same frames, delays and standard-normal noise draws.

mod config;
mod report;

pub use config::{ChannelMode, DelayMode, Detector, ExperimentConfig, CONFIG_KEYS};
pub use report::{emit_csv, emit_plot, plot_series, read_csv, PlotSeries, ResultRow, PLOT_METRICS};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codes::{assign_codes, SpreadingCode};
use crate::detection::{conventional_detect, sic_detect, sic_mf_detect, DetectionResult};
use crate::error::Result;
use crate::estimation::{estimate_amplitudes_known_delays, estimate_channel, ChannelEstimate};
use crate::metrics::{
    amplitude_abs_error, ber_confidence_interval, bit_error_rate, delay_errors,
    power_estimation_error, TrialMetrics,
};
use crate::signal::{
    add_awgn, frame_len, generate_bit_frame, modulate_user, snr_to_sigma, superpose, BitFrame,
    ChannelParams, SampledSignal, UserProfile, PILOT_BITS,
};

/// Everything one trial produced, kept for inspection.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub delays: Vec<usize>,
    pub amplitudes: Vec<f64>,
    pub estimate: ChannelEstimate,
    pub metrics: Vec<(Detector, TrialMetrics)>,
}

/// A validated configuration with its spreading codes built.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    codes: Vec<SpreadingCode>,
    amplitudes: Vec<f64>,
    a_ref: f64,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let codes = assign_codes(config.code_taps, config.k_users)?;
        let amplitudes = config.amplitudes();
        let a_ref = config.reference_amplitude();
        Ok(Self {
            config,
            codes,
            amplitudes,
            a_ref,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn codes(&self) -> &[SpreadingCode] {
        &self.codes
    }

    /// Amplitude the noise is referenced to.
    pub fn reference_amplitude(&self) -> f64 {
        self.a_ref
    }

    fn trial_rng(&self, trial_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.master_seed);
        rng.set_stream(trial_index);
        rng
    }

    fn draw_delays(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        match &self.config.delay_mode {
            DelayMode::Fixed(d) => d.clone(),
            DelayMode::RandomSorted => {
                let mut d =
                    rand::seq::index::sample(rng, self.config.nc, self.config.k_users).into_vec();
                d.sort_unstable();
                let first = d[0];
                d.iter_mut().for_each(|x| *x -= first);
                d
            }
        }
    }

    /// Noiseless received signal and the noise seed for a trial.
    fn synthesize(
        &self,
        rng: &mut ChaCha8Rng,
        delays: &[usize],
    ) -> Result<(BitFrame, SampledSignal, u64)> {
        let cfg = &self.config;
        let frame = generate_bit_frame(cfg.k_users, cfg.n_bits, rng)?;
        let noise_seed = rng.random::<u64>();
        let len = frame_len(cfg.n_bits, cfg.nc, cfg.ns);
        let parts = (0..cfg.k_users)
            .map(|k| {
                let profile =
                    UserProfile::new(k + 1, self.amplitudes[k], delays[k], &self.codes[k])?;
                modulate_user(&profile, frame.row(k), cfg.ns, len)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((frame, superpose(&parts)?, noise_seed))
    }

    pub fn run_trial_record(&self, snr_db: f64, trial_index: u64) -> Result<TrialRecord> {
        let cfg = &self.config;
        let mut rng = self.trial_rng(trial_index);
        let delays = self.draw_delays(&mut rng);
        let (frame, clean, noise_seed) = self.synthesize(&mut rng, &delays)?;
        let sigma = snr_to_sigma(snr_db, self.a_ref)?;
        let received = add_awgn(
            &clean,
            ChannelParams {
                sigma,
                seed: noise_seed,
            },
        )?;

        let estimate = match cfg.channel_mode {
            ChannelMode::Known => ChannelEstimate::new(self.amplitudes.clone(), delays.clone())?,
            ChannelMode::KnownDelays => {
                estimate_amplitudes_known_delays(&received, &self.codes, &delays)?
            }
            ChannelMode::Estimated => estimate_channel(&received, &self.codes)?,
        };
        let pee = power_estimation_error(&self.amplitudes, &estimate.amplitudes)?;
        let amp_mae = amplitude_abs_error(&self.amplitudes, &estimate.amplitudes)?;
        let delay_errors = delay_errors(&delays, &estimate.delays)?;

        let metrics = cfg
            .detectors
            .iter()
            .map(|&det| {
                let decisions = self.detect(det, &received, &estimate)?;
                let (bit_errors, _) = bit_error_rate(&frame, &decisions, true)?;
                Ok((
                    det,
                    TrialMetrics {
                        pee,
                        amp_mae,
                        delay_errors,
                        bit_errors,
                        data_bits: cfg.k_users * (cfg.n_bits - PILOT_BITS),
                    },
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TrialRecord {
            delays,
            amplitudes: self.amplitudes.clone(),
            estimate,
            metrics,
        })
    }

    pub fn detect(
        &self,
        detector: Detector,
        received: &SampledSignal,
        estimate: &ChannelEstimate,
    ) -> Result<DetectionResult> {
        let n = self.config.n_bits;
        match detector {
            Detector::Mf => conventional_detect(received, &self.codes, estimate, n),
            Detector::Sic => sic_detect(received, &self.codes, estimate, n),
            Detector::SicMf => sic_mf_detect(received, &self.codes, estimate, n),
        }
    }

    /// Per-detector metrics of one trial; bit-exact for equal arguments.
    pub fn run_trial(
        &self,
        snr_db: f64,
        trial_index: u64,
    ) -> Result<Vec<(Detector, TrialMetrics)>> {
        Ok(self.run_trial_record(snr_db, trial_index)?.metrics)
    }

    /// Aggregated rows sorted by detector, then SNR. Trials run on the
    /// current rayon pool; results are reduced in trial order, so the output
    /// does not depend on the degree of parallelism.
    pub fn run_sweep(&self) -> Result<Vec<ResultRow>> {
        let cfg = &self.config;
        let mut rows = Vec::new();
        for &snr in &cfg.snr_grid_db {
            let trials = (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| self.run_trial(snr, t))
                .collect::<Result<Vec<_>>>()?;
            rows.extend(cfg.detectors.iter().enumerate().map(|(d, &det)| {
                let mut agg = Aggregate::default();
                for trial in &trials {
                    agg.add(&trial[d].1);
                }
                agg.row(snr, det, cfg)
            }));
        }
        rows.sort_by(|a, b| {
            a.detector
                .cmp(&b.detector)
                .then(a.snr_db.total_cmp(&b.snr_db))
        });
        Ok(rows)
    }
}

#[derive(Debug, Default)]
struct Aggregate {
    trials: u64,
    bit_errors: u64,
    data_bits: u64,
    delay_errors: u64,
    pee_sum: f64,
    mae_sum: f64,
}

impl Aggregate {
    fn add(&mut self, m: &TrialMetrics) {
        self.trials += 1;
        self.bit_errors += m.bit_errors as u64;
        self.data_bits += m.data_bits as u64;
        self.delay_errors += m.delay_errors as u64;
        self.pee_sum += m.pee;
        self.mae_sum += m.amp_mae;
    }

    fn row(&self, snr_db: f64, detector: Detector, cfg: &ExperimentConfig) -> ResultRow {
        let n = self.trials as f64;
        let ber = if self.data_bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.data_bits as f64
        };
        let (lo, hi) = ber_confidence_interval(self.bit_errors, self.data_bits);
        ResultRow {
            snr_db,
            detector,
            channel_mode: cfg.channel_mode,
            ns: cfg.ns,
            ber,
            ber_ci95_low: lo,
            ber_ci95_high: hi,
            pee: self.pee_sum / n,
            amp_mae: self.mae_sum / n,
            delay_error_rate: self.delay_errors as f64 / (n * cfg.k_users as f64),
            trials: self.trials,
            master_seed: cfg.master_seed,
        }
    }
}

pub fn run_trial(
    config: &ExperimentConfig,
    snr_db: f64,
    trial_index: u64,
) -> Result<Vec<(Detector, TrialMetrics)>> {
    Experiment::new(config.clone())?.run_trial(snr_db, trial_index)
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Experiment::new(config.clone())?.run_sweep()
}
