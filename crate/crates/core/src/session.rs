//! Live front-panel session logic, independent of any transport.
//!
//! Client inputs are scheduled at the next cycle boundary and recorded in
//! an input log that replays through [`crate::harness::run`] to the same
//! status trace and frames.

use crate::config::RunConfig;
use crate::error::{CaptureError, ConfigError};
use crate::harness::Driver;
use crate::machine::{Machine, Status};
use crate::stimulus::{self, detent_span, StimulusAction, StimulusEvent};
use crate::wire::{parse_client_message, ClientMessage, ServerMessage};

#[derive(Debug, Clone)]
pub struct Session {
    driver: Driver,
    log: Vec<StimulusEvent>,
    rot_gap: u64,
    decimation: u64,
    /// Cycle from which the next rotary macro may start.
    rot_free_at: u64,
}

impl Session {
    pub fn new(config: &RunConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(Self {
            driver: Driver::new(Machine::new(&config.machine)?),
            log: Vec::new(),
            rot_gap: config.rot_gap,
            decimation: config.frame_decimation,
            rot_free_at: 0,
        })
    }

    pub fn machine(&self) -> &Machine {
        &self.driver.machine()
    }

    pub fn status(&self) -> Status {
        self.driver.machine().status()
    }

    pub fn trace(&self) -> &[Status] {
        self.driver.trace()
    }

    /// Inputs applied so far, in stimulus-script form.
    pub fn input_log(&self) -> &[StimulusEvent] {
        &self.log
    }

    pub fn input_script(&self) -> String {
        stimulus::format_script(&self.log)
    }

    /// Parses and applies one line from the client. A malformed line yields
    /// an error message for the client and leaves the simulation untouched.
    pub fn handle_line(&mut self, line: &str) -> Option<ServerMessage> {
        match parse_client_message(line) {
            Ok(msg) => {
                self.submit(msg);
                None
            }
            Err(e) => Some(ServerMessage::Error {
                message: format!("rejected message: {e}"),
            }),
        }
    }

    pub fn submit(&mut self, msg: ClientMessage) {
        let now = self.driver.machine().now().master_cycle;
        let event = match msg {
            ClientMessage::Input { name, value } => {
                // never put two levels for one pin on the same cycle
                let mut at = now;
                while self.driver.pending().any(|p| {
                    p.at_cycle == at && matches!(p.action, StimulusAction::Set(s, v) if s == name && v != value)
                }) {
                    at += 1;
                }
                StimulusEvent::set(at, name, value)
            }
            ClientMessage::Rotary { dir } => {
                let at = now.max(self.rot_free_at);
                self.rot_free_at = at + detent_span(self.rot_gap) + self.rot_gap;
                StimulusEvent::rot(at, dir.into())
            }
        };
        let expanded = stimulus::expand(&[event], self.rot_gap).expect("a single event cannot conflict");
        self.driver.schedule(expanded);
        self.log.push(event);
    }

    /// Advances `cycles` master cycles, returning the messages to push: a
    /// status on each visible change and every K-th completed frame.
    pub fn advance(&mut self, cycles: u64) -> Result<Vec<ServerMessage>, CaptureError> {
        let mut out = Vec::new();
        for _ in 0..cycles {
            let (step, status) = self.driver.step()?;
            if let Some(s) = status {
                out.push(ServerMessage::status(&s));
            }
            if let Some(frame) = step.frame {
                if frame.seq % self.decimation == 0 {
                    out.push(ServerMessage::frame(&frame));
                }
            }
        }
        Ok(out)
    }
}
