//! Asynchronous DS-CDMA uplink simulation with pilot-based joint
//! delay/amplitude estimation and single-stage successive interference
//! cancellation.
//!
//! Time is measured in chips: a bit lasts `nc = 32` chips and signals are
//! sampled at `ns` samples per chip. The processing chain is
//! [`codes`] → [`signal`] → [`estimation`] → [`detection`] → [`metrics`],
//! and [`harness`] wires it into seeded Monte Carlo sweeps.

pub mod codes;
pub mod detection;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod metrics;
pub mod signal;

pub use codes::{CorrelationSet, SpreadingCode};
pub use detection::{DetectionResult, IcuState, MatrixModel};
pub use error::{Error, Result};
pub use estimation::{ChannelEstimate, PilotWindow, Position};
pub use harness::{ChannelMode, DelayMode, Detector, Experiment, ExperimentConfig, ResultRow};
pub use metrics::TrialMetrics;
pub use signal::{BitFrame, ChannelParams, SampledSignal, UserProfile};
