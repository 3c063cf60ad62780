//! The composed top-level machine, stepped one master cycle at a time.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::capture::{CaptureState, Frame};
use crate::clocking::{ClockState, SimInstant, Synchronizer2FF};
use crate::conditioning::{
    ConditionedInputs, DebouncerState, DoorGateState, EdgeDetector, RawInputs, RotaryFilterState,
};
use crate::error::{CaptureError, ConfigError};
use crate::fsm::{
    derive_outputs, fsm_step, rearm_timer, select_load, timer_step, ActuatorOutputs,
    DurationTable, LoadSize, StageTimer, WashState,
};
use crate::vga::{hud_pixel, TimingParams, VgaSample, VgaSync};

/// Input pins that stimulus can drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Signal {
    #[serde(rename = "BTN_START")]
    BtnStart,
    #[serde(rename = "BTN_RESET")]
    BtnReset,
    #[serde(rename = "SW_DOOR")]
    SwDoor,
    #[serde(rename = "ROT_A")]
    RotA,
    #[serde(rename = "ROT_B")]
    RotB,
}

impl Signal {
    pub const ALL: [Signal; 5] = [
        Signal::BtnStart,
        Signal::BtnReset,
        Signal::SwDoor,
        Signal::RotA,
        Signal::RotB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Signal::BtnStart => "BTN_START",
            Signal::BtnReset => "BTN_RESET",
            Signal::SwDoor => "SW_DOOR",
            Signal::RotA => "ROT_A",
            Signal::RotB => "ROT_B",
        }
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Signal {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Signal::ALL
            .into_iter()
            .find(|sig| sig.name() == s)
            .ok_or_else(|| format!("unknown signal `{s}`"))
    }
}

/// Static configuration of the composed machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineConfig {
    pub durations: DurationTable,
    pub debounce_depth: u32,
    pub debounce_period: u64,
    pub timing: TimingParams,
}

impl MachineConfig {
    pub const DEFAULT_DEBOUNCE_DEPTH: u32 = 16;
    pub const DEFAULT_DEBOUNCE_PERIOD: u64 = 50_000;

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.durations.validate()?;
        if !(1..=crate::conditioning::MAX_DEBOUNCE_DEPTH).contains(&self.debounce_depth) {
            return Err(ConfigError::DebounceDepth(self.debounce_depth));
        }
        if self.debounce_period == 0 {
            return Err(ConfigError::DebouncePeriod);
        }
        Ok(())
    }
}

impl Default for MachineConfig {
    fn default() -> Self {
        Self {
            durations: DurationTable::new(1).expect("unit time scale is valid"),
            debounce_depth: Self::DEFAULT_DEBOUNCE_DEPTH,
            debounce_period: Self::DEFAULT_DEBOUNCE_PERIOD,
            timing: TimingParams::VGA_640X480,
        }
    }
}

/// Externally visible status, as pushed to the front panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Status {
    pub cycle: u64,
    pub state: WashState,
    pub load: LoadSize,
    pub leds: [bool; 8],
    pub buzzer: bool,
    pub door_open: bool,
}

impl Status {
    /// Fields whose change triggers a new status record.
    pub fn key(&self) -> (WashState, LoadSize, [bool; 8], bool) {
        (self.state, self.load, self.leds, self.door_open)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let leds: String = self.leds.iter().map(|&l| if l { '1' } else { '0' }).collect();
        write!(
            f,
            "{} {} {} leds={} door={}",
            self.cycle, self.state, self.load, leds, self.door_open as u8
        )
    }
}

/// What one master cycle produced on the video side.
#[derive(Debug, Clone, Default)]
pub struct StepOutput {
    pub pixel_enable: bool,
    pub sample: Option<VgaSample>,
    pub frame: Option<Frame>,
}

#[derive(Debug, Clone, Copy, Default)]
struct InputSync {
    start: Synchronizer2FF,
    reset: Synchronizer2FF,
    door: Synchronizer2FF,
    rot_a: Synchronizer2FF,
    rot_b: Synchronizer2FF,
}

#[derive(Debug, Clone)]
pub struct Machine {
    clock: ClockState,
    pins: RawInputs,
    sync: InputSync,
    deb_start: DebouncerState,
    deb_reset: DebouncerState,
    deb_door: DebouncerState,
    edge_start: EdgeDetector,
    edge_reset: EdgeDetector,
    rotary: RotaryFilterState,
    gate: DoorGateState,
    state: WashState,
    load: LoadSize,
    timer: StageTimer,
    durations: DurationTable,
    vga: VgaSync,
    capture: CaptureState,
    conditioned: ConditionedInputs,
}

impl Machine {
    pub fn new(config: &MachineConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let deb = DebouncerState::new(config.debounce_depth, config.debounce_period);
        Ok(Self {
            clock: ClockState::new(),
            pins: RawInputs::default(),
            sync: InputSync::default(),
            deb_start: deb.clone(),
            deb_reset: deb.clone(),
            deb_door: deb,
            edge_start: EdgeDetector::default(),
            edge_reset: EdgeDetector::default(),
            rotary: RotaryFilterState::new(),
            gate: DoorGateState::new(),
            state: WashState::Idle,
            load: LoadSize::Medium,
            timer: StageTimer::armed(0, false),
            durations: config.durations.clone(),
            vga: VgaSync::new(config.timing),
            capture: CaptureState::new(config.timing),
            conditioned: ConditionedInputs::default(),
        })
    }

    pub fn now(&self) -> SimInstant {
        self.clock.now()
    }

    pub fn state(&self) -> WashState {
        self.state
    }

    pub fn load(&self) -> LoadSize {
        self.load
    }

    pub fn timer(&self) -> StageTimer {
        self.timer
    }

    pub fn pins(&self) -> RawInputs {
        self.pins
    }

    pub fn durations(&self) -> &DurationTable {
        &self.durations
    }

    /// Conditioned inputs computed during the last step.
    pub fn conditioned(&self) -> ConditionedInputs {
        self.conditioned
    }

    pub fn door_open(&self) -> bool {
        self.gate.door_open(self.state)
    }

    pub fn outputs(&self) -> ActuatorOutputs {
        derive_outputs(self.state, self.load, self.clock.now().master_cycle)
    }

    pub fn status(&self) -> Status {
        let out = self.outputs();
        Status {
            cycle: self.clock.now().master_cycle,
            state: self.state,
            load: self.load,
            leds: out.leds,
            buzzer: out.buzzer,
            door_open: self.door_open(),
        }
    }

    pub fn capture(&self) -> &CaptureState {
        &self.capture
    }

    /// Drives an input pin; takes effect at the next step.
    pub fn set_pin(&mut self, signal: Signal, level: bool) {
        let p = &mut self.pins;
        match signal {
            Signal::BtnStart => p.btn_start = level,
            Signal::BtnReset => p.btn_reset = level,
            Signal::SwDoor => p.sw_door = level,
            Signal::RotA => p.rot_a = level,
            Signal::RotB => p.rot_b = level,
        }
    }

    /// Executes one master cycle.
    pub fn step(&mut self) -> Result<StepOutput, CaptureError> {
        let pixel_enable = self.clock.tick();
        let pins = self.pins;

        let start_s = self.sync.start.synchronize(pins.btn_start);
        let reset_s = self.sync.reset.synchronize(pins.btn_reset);
        let door_s = self.sync.door.synchronize(pins.sw_door);
        let a_s = self.sync.rot_a.synchronize(pins.rot_a);
        let b_s = self.sync.rot_b.synchronize(pins.rot_b);

        let (start_level, _) = self.deb_start.step(start_s);
        let (reset_level, _) = self.deb_reset.step(reset_s);
        let (door_level, _) = self.deb_door.step(door_s);
        let start_pulse = self.edge_start.step(start_level);
        let reset_pulse = self.edge_reset.step(reset_level);
        let (rotary_event, direction) = self.rotary.step(a_s, b_s);
        self.conditioned = ConditionedInputs {
            start_pulse,
            reset_pulse,
            door_level,
            rotary_event,
            direction,
        };

        // The gate register clocks on the pixel enable and feeds the FSM
        // in the same cycle.
        if pixel_enable {
            self.gate.step(door_level, pins.btn_start, self.state);
        }
        let door_open = self.gate.door_open(self.state);

        self.load = select_load(rotary_event, direction, self.state, self.load);
        let (timer, timer_done) = timer_step(self.state, self.load, self.timer, &self.durations);
        self.timer = timer;

        let next = fsm_step(start_pulse, reset_pulse, door_open, timer_done, self.state);
        if reset_pulse {
            self.load = LoadSize::Medium;
        }
        if next != self.state {
            self.timer = rearm_timer(self.state, next, self.load, self.timer, &self.durations);
            self.state = next;
        }

        let mut out = StepOutput {
            pixel_enable,
            ..Default::default()
        };
        if pixel_enable {
            let (state, load, door) = (self.state, self.load, self.gate.door_open(self.state));
            let sample = self.vga.step(|pos| hud_pixel(pos, state, load, door));
            out.frame = self.capture.step(sample)?;
            out.sample = Some(sample);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast_config(ticks: u32) -> MachineConfig {
        MachineConfig {
            durations: DurationTable::uniform(50_000, ticks).unwrap(),
            debounce_depth: 1,
            debounce_period: 1,
            ..Default::default()
        }
    }

    #[test]
    fn reset_state() {
        let m = Machine::new(&MachineConfig::default()).unwrap();
        assert_eq!(m.state(), WashState::Idle);
        assert_eq!(m.load(), LoadSize::Medium);
        assert_eq!(m.now().master_cycle, 0);
    }

    #[test]
    fn rejects_bad_debounce() {
        let cfg = MachineConfig {
            debounce_depth: 0,
            ..Default::default()
        };
        assert_eq!(Machine::new(&cfg).unwrap_err(), ConfigError::DebounceDepth(0));
    }

    #[test]
    fn start_latency_is_sync_plus_register() {
        let mut m = Machine::new(&fast_config(3)).unwrap();
        m.set_pin(Signal::BtnStart, true);
        let mut entered = None;
        for c in 0..10 {
            m.step().unwrap();
            if m.state() == WashState::Fill && entered.is_none() {
                entered = Some(c);
            }
        }
        // synchronized at step 2, pulse and FSM update in the same step
        assert_eq!(entered, Some(2));
    }

    #[test]
    fn signal_names_round_trip() {
        for s in Signal::ALL {
            assert_eq!(s.name().parse::<Signal>().unwrap(), s);
        }
        assert!("BTN_X".parse::<Signal>().is_err());
    }
}
