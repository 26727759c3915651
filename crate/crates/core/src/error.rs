use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("LFSR seed must be a nonzero {degree}-bit state")]
    ZeroSeed { degree: u32 },

    #[error("feedback polynomial {taps:#o} is not a primitive degree-{degree} polynomial")]
    NotPrimitive { taps: u32, degree: u32 },

    #[error(
        "polynomials {first:#o} and {second:#o} are not a preferred pair: \
         cross-correlation takes value {value} at shift {shift}"
    )]
    NotPreferredPair {
        first: u32,
        second: u32,
        value: i32,
        shift: usize,
    },

    #[error("expected {expected} elements, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("delays must be sorted ascending and distinct: {0:?}")]
    UnsortedDelays(Vec<usize>),

    #[error("delay {delay} outside [0, {max}]")]
    DelayOutOfRange { delay: usize, max: usize },

    #[error("invalid bit frame: {0}")]
    InvalidFrame(String),

    #[error("window [{start}, {end}) exceeds signal of {len} samples")]
    WindowOutOfBounds {
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("signals differ in shape: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// True for errors caused by the filesystem rather than by bad input.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Csv { .. })
    }
}
