//! Cycle-accurate simulator of an FPGA washing-machine controller.
//!
//! The machine is stepped one 50 MHz master cycle at a time. Raw button,
//! switch and rotary-encoder levels pass through two-flop synchronizers,
//! shift-register debouncers and a quadrature filter into a ten-state wash
//! FSM with load-dependent 32-bit stage timers. A 25 MHz pixel-enable
//! drives a 640x480 VGA sync generator and a state-colored status display,
//! which a virtual monitor captures back into frames by following the sync
//! pulses alone.

pub mod capture;
pub mod clocking;
pub mod conditioning;
pub mod config;
pub mod error;
pub mod fsm;
pub mod harness;
pub mod machine;
pub mod session;
pub mod stimulus;
pub mod vga;
pub mod wire;

pub use capture::{check_timing, encode_ppm, CaptureState, ConformanceReport, Frame};
pub use config::RunConfig;
pub use error::{CaptureError, ConfigError, RunError, StimulusError, TimingError};
pub use fsm::{DurationTable, LoadSize, WashState};
pub use harness::{run, run_with, Driver, RunOutput};
pub use machine::{Machine, MachineConfig, Signal, Status};
pub use session::Session;
pub use stimulus::{parse_stimulus, StimulusEvent};
pub use vga::{hud_pixel, Color3, ScanPosition, TimingParams, VgaSample};
