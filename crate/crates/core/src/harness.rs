//! Deterministic scripted runs of the composed machine.

use std::collections::VecDeque;

use crate::capture::Frame;
use crate::error::{CaptureError, RunError};
use crate::fsm::WashState;
use crate::machine::{Machine, Status, StepOutput};
use crate::config::RunConfig;
use crate::stimulus::{StimulusAction, StimulusEvent};

/// A machine plus its queue of pending pin-level events. Events scheduled
/// for cycle `t` are applied immediately before the step that executes
/// cycle `t`.
#[derive(Debug, Clone)]
pub struct Driver {
    machine: Machine,
    pending: VecDeque<StimulusEvent>,
    last_status: Status,
    trace: Vec<Status>,
}

impl Driver {
    pub fn new(machine: Machine) -> Self {
        let status = machine.status();
        Self {
            machine,
            pending: VecDeque::new(),
            last_status: status,
            trace: vec![status],
        }
    }

    pub fn machine(&self) -> &Machine {
        &self.machine
    }

    pub fn into_machine(self) -> Machine {
        self.machine
    }

    /// Status records so far: the reset status, then one per change.
    pub fn trace(&self) -> &[Status] {
        &self.trace
    }

    pub fn take_trace(&mut self) -> Vec<Status> {
        std::mem::take(&mut self.trace)
    }

    /// Queues pin-level events. Events earlier than the current cycle are
    /// applied at the next step.
    pub fn schedule(&mut self, events: impl IntoIterator<Item = StimulusEvent>) {
        for ev in events {
            debug_assert!(matches!(ev.action, StimulusAction::Set(..)), "expand macros first");
            let pos = self.pending.partition_point(|p| p.at_cycle <= ev.at_cycle);
            self.pending.insert(pos, ev);
        }
    }

    pub fn pending(&self) -> impl Iterator<Item = &StimulusEvent> {
        self.pending.iter()
    }

    /// Runs one master cycle. Returns the step output and, if the visible
    /// status changed, the new status.
    pub fn step(&mut self) -> Result<(StepOutput, Option<Status>), CaptureError> {
        let now = self.machine.now().master_cycle;
        while let Some(ev) = self.pending.front() {
            if ev.at_cycle > now {
                break;
            }
            if let StimulusAction::Set(sig, level) = ev.action {
                self.machine.set_pin(sig, level);
            }
            self.pending.pop_front();
        }
        let out = self.machine.step()?;
        let mut status = self.machine.status();
        // stamp with the cycle whose step produced the change
        status.cycle = now;
        let changed = status.key() != self.last_status.key();
        self.last_status = status;
        if changed {
            self.trace.push(status);
            Ok((out, Some(status)))
        } else {
            Ok((out, None))
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub machine: Machine,
    pub frames: Vec<Frame>,
    pub trace: Vec<Status>,
}

impl RunOutput {
    /// `(cycle, state)` at each state change, starting with the reset state.
    pub fn transitions(&self) -> Vec<(u64, WashState)> {
        state_transitions(&self.trace)
    }
}

pub fn state_transitions(trace: &[Status]) -> Vec<(u64, WashState)> {
    let mut out: Vec<(u64, WashState)> = Vec::new();
    for s in trace {
        if out.last().map(|&(_, st)| st) != Some(s.state) {
            out.push((s.cycle, s.state));
        }
    }
    out
}

/// Runs cycles `0..until_cycle`, handing each completed frame to `on_frame`.
pub fn run_with(
    config: &RunConfig,
    stimulus: &[StimulusEvent],
    until_cycle: u64,
    mut on_frame: impl FnMut(Frame) -> Result<(), RunError>,
) -> Result<(Machine, Vec<Status>), RunError> {
    config.validate()?;
    let mut driver = Driver::new(Machine::new(&config.machine)?);
    driver.schedule(stimulus.iter().copied());
    while driver.machine().now().master_cycle < until_cycle {
        let (out, _) = driver.step()?;
        if let Some(frame) = out.frame {
            on_frame(frame)?;
        }
    }
    let trace = driver.take_trace();
    Ok((driver.into_machine(), trace))
}

/// Runs cycles `0..until_cycle` and keeps every frame in memory.
pub fn run(config: &RunConfig, stimulus: &[StimulusEvent], until_cycle: u64) -> Result<RunOutput, RunError> {
    let mut frames = Vec::new();
    let (machine, trace) = run_with(config, stimulus, until_cycle, |f| {
        frames.push(f);
        Ok(())
    })?;
    Ok(RunOutput { machine, frames, trace })
}
