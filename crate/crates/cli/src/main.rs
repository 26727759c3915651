//! `simulate`: run a DS-CDMA Monte Carlo sweep and write the results as CSV
//! and, optionally, an SVG plot.
//!
//! Settings are layered: built-in defaults, then the `--config` file, then
//! command-line flags. Every config key has a flag of the same name
//! (`--k-users` or `--k_users` for `k_users`), and the common ones have
//! shorter aliases such as `--users` and `--seed`.
//!
//! Exit codes: 0 on success, 1 for configuration errors, 2 for I/O errors.
//! Trials run on all cores; set `RAYON_NUM_THREADS` to limit them. Results do
//! not depend on the thread count.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser};
use satcdma_core::harness::{emit_csv, emit_plot, run_sweep, PLOT_METRICS};
use satcdma_core::{Error, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(
    name = "simulate",
    version,
    about = "Asynchronous DS-CDMA uplink simulator with pilot-based estimation and SIC detection"
)]
#[command(group(ArgGroup::new("snr_range").args(["snr_start", "snr_stop", "snr_step"]).multiple(true).conflicts_with("snr_grid_db")))]
struct Cli {
    /// Flat `key = value` config file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Number of active users.
    #[arg(
        long = "k-users",
        visible_alias = "users",
        alias = "k_users",
        value_name = "N"
    )]
    k_users: Option<String>,
    /// Chips per bit (fixed at 32).
    #[arg(long, value_name = "N")]
    nc: Option<String>,
    /// Bits per user per frame, including the two pilots.
    #[arg(long = "n-bits", alias = "n_bits", value_name = "N")]
    n_bits: Option<String>,
    /// Samples per chip.
    #[arg(long, value_name = "N")]
    ns: Option<String>,
    /// Explicit SNR grid in dB, comma separated.
    #[arg(
        long = "snr-grid-db",
        alias = "snr_grid_db",
        value_name = "LIST",
        allow_hyphen_values = true
    )]
    snr_grid_db: Option<String>,
    /// First SNR point in dB.
    #[arg(long = "snr-start", value_name = "DB", requires_all = ["snr_stop", "snr_step"], allow_hyphen_values = true)]
    snr_start: Option<f64>,
    /// Last SNR point in dB (inclusive).
    #[arg(long = "snr-stop", value_name = "DB", requires_all = ["snr_start", "snr_step"], allow_hyphen_values = true)]
    snr_stop: Option<f64>,
    /// SNR step in dB.
    #[arg(long = "snr-step", value_name = "DB", requires_all = ["snr_start", "snr_stop"])]
    snr_step: Option<f64>,
    /// Monte Carlo trials per SNR point.
    #[arg(long, value_name = "T")]
    trials: Option<String>,
    /// Master seed of every trial's random stream.
    #[arg(
        long = "master-seed",
        visible_alias = "seed",
        alias = "master_seed",
        value_name = "X"
    )]
    master_seed: Option<String>,
    /// Per-user levels in dB, strongest first; empty for equal amplitudes.
    #[arg(
        long = "amplitude-profile-db",
        visible_alias = "near-far",
        alias = "amplitude_profile_db",
        value_name = "LIST",
        allow_hyphen_values = true
    )]
    amplitude_profile_db: Option<String>,
    /// `random` or `fixed:d1,d2,...` in chips.
    #[arg(long = "delay-mode", alias = "delay_mode", value_name = "MODE")]
    delay_mode: Option<String>,
    /// known, known-delays or estimated.
    #[arg(
        long = "channel-mode",
        visible_alias = "channel",
        alias = "channel_mode",
        value_name = "MODE"
    )]
    channel_mode: Option<String>,
    /// Comma-separated subset of mf, sic, sicmf.
    #[arg(long, value_name = "LIST")]
    detectors: Option<String>,
    /// Preferred pair of octal feedback masks, e.g. `45,75`.
    #[arg(long = "code-taps", alias = "code_taps", value_name = "PAIR")]
    code_taps: Option<String>,
    /// CSV output path.
    #[arg(
        long = "output-path",
        visible_alias = "out",
        alias = "output_path",
        value_name = "PATH"
    )]
    output_path: Option<String>,

    /// Also render an SVG plot of `--metric` against SNR.
    #[arg(long, value_name = "PATH")]
    plot: Option<PathBuf>,
    /// Column to plot.
    #[arg(long, default_value = "ber", requires = "plot")]
    metric: String,
}

impl Cli {
    fn overrides(&self) -> [(&'static str, Option<&String>); 13] {
        [
            ("k_users", self.k_users.as_ref()),
            ("nc", self.nc.as_ref()),
            ("n_bits", self.n_bits.as_ref()),
            ("ns", self.ns.as_ref()),
            ("snr_grid_db", self.snr_grid_db.as_ref()),
            ("trials", self.trials.as_ref()),
            ("master_seed", self.master_seed.as_ref()),
            ("amplitude_profile_db", self.amplitude_profile_db.as_ref()),
            ("delay_mode", self.delay_mode.as_ref()),
            ("channel_mode", self.channel_mode.as_ref()),
            ("detectors", self.detectors.as_ref()),
            ("code_taps", self.code_taps.as_ref()),
            ("output_path", self.output_path.as_ref()),
        ]
    }

    fn build_config(&self) -> Result<ExperimentConfig, Error> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        for (key, value) in self.overrides() {
            if let Some(value) = value {
                config
                    .set(key, value)
                    .map_err(|e| Error::Config(format!("--{}: {e}", key.replace('_', "-"))))?;
            }
        }
        if let (Some(start), Some(stop), Some(step)) =
            (self.snr_start, self.snr_stop, self.snr_step)
        {
            config.snr_grid_db = ExperimentConfig::snr_range(start, stop, step)?;
        }
        if self.plot.is_some() && !PLOT_METRICS.contains(&self.metric.as_str()) {
            return Err(Error::Config(format!(
                "unknown metric {:?}; valid metrics: {}",
                self.metric,
                PLOT_METRICS.join(", ")
            )));
        }
        config.validate()?;
        Ok(config)
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let config = cli.build_config()?;
    let rows = run_sweep(&config)?;
    emit_csv(&rows, &config.output_path)?;
    eprintln!(
        "wrote {} rows to {}",
        rows.len(),
        config.output_path.display()
    );
    if let Some(plot) = &cli.plot {
        emit_plot(&rows, &cli.metric, plot)?;
        eprintln!("wrote {} plot to {}", cli.metric, plot.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
