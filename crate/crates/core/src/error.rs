use thiserror::Error;

use crate::fsm::{LoadSize, WashState};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("duration for {state} / {load} must be nonzero")]
    ZeroDuration { state: WashState, load: LoadSize },
    #[error("time_scale must be at least 1")]
    ZeroTimeScale,
    #[error("time_scale {0} does not divide the 50 MHz master clock evenly")]
    UnevenTimeScale(u64),
    #[error("debounce depth {0} outside 1..=64")]
    DebounceDepth(u32),
    #[error("debounce period must be at least 1 cycle")]
    DebouncePeriod,
    #[error("rotary gap must be at least 1 cycle")]
    RotaryGap,
    #[error("frame decimation must be at least 1")]
    FrameDecimation,
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    BadValue { key: String, reason: String },
    #[error("malformed configuration: {0}")]
    Syntax(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StimulusError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: cycle {cycle} is earlier than the previous event at {previous}")]
    Unsorted { line: usize, cycle: u64, previous: u64 },
    #[error("conflicting values for {signal} at cycle {cycle}")]
    Conflict { signal: String, cycle: u64 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CaptureError {
    #[error("video desynchronized: hsync period of {measured} clocks, expected {expected}")]
    LinePeriod { measured: u64, expected: u64 },
    #[error("video desynchronized: {measured} lines between vsync edges, expected {expected}")]
    FrameLines { measured: u64, expected: u64 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TimingError {
    #[error("sync trace too short: no complete frame between two vsync edges")]
    TraceTooShort,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Stimulus(#[from] StimulusError),
    #[error("internal video fault: {0}")]
    Capture(#[from] CaptureError),
    #[error("writing output: {0}")]
    Output(String),
}
