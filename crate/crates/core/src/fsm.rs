//! Wash-cycle state machine, load selection, stage timers and actuator
//! outputs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::clocking::MASTER_HZ;
use crate::error::ConfigError;

/// Wash-cycle state with its 4-bit hardware encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
#[repr(u8)]
pub enum WashState {
    Idle = 0b0000,
    Fill = 0b0001,
    Wash = 0b0010,
    Drain = 0b0011,
    RinseFill = 0b0100,
    RinseAgitate = 0b0101,
    RinseDrain = 0b0110,
    Spin = 0b0111,
    Hold = 0b1000,
    Done = 0b1001,
}

impl WashState {
    pub const ALL: [WashState; 10] = [
        WashState::Idle,
        WashState::Fill,
        WashState::Wash,
        WashState::Drain,
        WashState::RinseFill,
        WashState::RinseAgitate,
        WashState::RinseDrain,
        WashState::Spin,
        WashState::Hold,
        WashState::Done,
    ];

    /// States whose duration comes from the load-dependent table.
    pub const STAGES: [WashState; 7] = [
        WashState::Fill,
        WashState::Wash,
        WashState::Drain,
        WashState::RinseFill,
        WashState::RinseAgitate,
        WashState::RinseDrain,
        WashState::Spin,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            WashState::Idle => "IDLE",
            WashState::Fill => "FILL",
            WashState::Wash => "WASH",
            WashState::Drain => "DRAIN",
            WashState::RinseFill => "RINSE_FILL",
            WashState::RinseAgitate => "RINSE_AGITATE",
            WashState::RinseDrain => "RINSE_DRAIN",
            WashState::Spin => "SPIN",
            WashState::Hold => "HOLD",
            WashState::Done => "DONE",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name().eq_ignore_ascii_case(name))
    }

    /// `washing_state == 4'b0111 || washing_state == 4'b1000`
    pub fn door_may_open(self) -> bool {
        matches!(self, WashState::Spin | WashState::Hold)
    }

    /// Whether the stage timer counts in this state.
    pub fn is_timed(self) -> bool {
        !matches!(self, WashState::Idle | WashState::Hold)
    }

    /// Successor on timer expiry.
    fn after_timer(self) -> WashState {
        match self {
            WashState::Fill => WashState::Wash,
            WashState::Wash => WashState::Drain,
            WashState::Drain => WashState::RinseFill,
            WashState::RinseFill => WashState::RinseAgitate,
            WashState::RinseAgitate => WashState::RinseDrain,
            WashState::RinseDrain => WashState::Spin,
            WashState::Spin => WashState::Done,
            WashState::Done => WashState::Idle,
            other => other,
        }
    }
}

impl fmt::Display for WashState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LoadSize {
    Small,
    #[default]
    Medium,
    Large,
}

impl LoadSize {
    pub const ALL: [LoadSize; 3] = [LoadSize::Small, LoadSize::Medium, LoadSize::Large];

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            LoadSize::Small => "SMALL",
            LoadSize::Medium => "MEDIUM",
            LoadSize::Large => "LARGE",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.name().eq_ignore_ascii_case(name))
    }

    fn increment(self) -> Self {
        match self {
            LoadSize::Small => LoadSize::Medium,
            _ => LoadSize::Large,
        }
    }

    fn decrement(self) -> Self {
        match self {
            LoadSize::Large => LoadSize::Medium,
            _ => LoadSize::Small,
        }
    }
}

impl fmt::Display for LoadSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Stage durations in ticks, indexed by state code and load ordinal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DurationTable {
    ticks: [[u32; 3]; 10],
    tick_period_cycles: u64,
    time_scale: u64,
}

impl DurationTable {
    pub const DEFAULT_DONE_TICKS: u32 = 2;

    /// Built-in durations in seconds (Small, Medium, Large).
    pub const DEFAULT_SECONDS: [(WashState, [u32; 3]); 7] = [
        (WashState::Fill, [10, 15, 20]),
        (WashState::Wash, [20, 30, 40]),
        (WashState::Drain, [8, 10, 12]),
        (WashState::RinseFill, [10, 15, 20]),
        (WashState::RinseAgitate, [10, 15, 20]),
        (WashState::RinseDrain, [8, 10, 12]),
        (WashState::Spin, [15, 20, 25]),
    ];

    /// A tick lasts `50_000_000 / time_scale` master cycles.
    pub fn new(time_scale: u64) -> Result<Self, ConfigError> {
        let tick_period_cycles = tick_period_for(time_scale)?;
        let mut ticks = [[0u32; 3]; 10];
        for (state, secs) in Self::DEFAULT_SECONDS {
            ticks[state.code() as usize] = secs;
        }
        ticks[WashState::Done.code() as usize] = [Self::DEFAULT_DONE_TICKS; 3];
        Ok(Self {
            ticks,
            tick_period_cycles,
            time_scale,
        })
    }

    /// Overrides one timed entry. `Done` ignores `load` and sets all three.
    pub fn set(&mut self, state: WashState, load: LoadSize, ticks: u32) -> Result<(), ConfigError> {
        if !state.is_timed() {
            return Err(ConfigError::BadValue {
                key: state.name().to_owned(),
                reason: "state has no duration".into(),
            });
        }
        if ticks == 0 {
            return Err(ConfigError::ZeroDuration { state, load });
        }
        let row = &mut self.ticks[state.code() as usize];
        if state == WashState::Done {
            *row = [ticks; 3];
        } else {
            row[load.ordinal()] = ticks;
        }
        Ok(())
    }

    /// Sets every timed stage (including DONE) to the same tick count.
    pub fn uniform(time_scale: u64, ticks: u32) -> Result<Self, ConfigError> {
        let mut table = Self::new(time_scale)?;
        for state in WashState::ALL.into_iter().filter(|s| s.is_timed()) {
            for load in LoadSize::ALL {
                table.set(state, load, ticks)?;
            }
        }
        Ok(table)
    }

    pub fn ticks(&self, state: WashState, load: LoadSize) -> u32 {
        self.ticks[state.code() as usize][load.ordinal()]
    }

    pub fn tick_period_cycles(&self) -> u64 {
        self.tick_period_cycles
    }

    pub fn time_scale(&self) -> u64 {
        self.time_scale
    }

    /// Ticks for an uninterrupted cycle at `load`, DONE window included.
    pub fn total_cycle_ticks(&self, load: LoadSize) -> u64 {
        WashState::STAGES
            .iter()
            .chain(std::iter::once(&WashState::Done))
            .map(|&s| self.ticks(s, load) as u64)
            .sum()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for state in WashState::ALL.into_iter().filter(|s| s.is_timed()) {
            for load in LoadSize::ALL {
                if self.ticks(state, load) == 0 {
                    return Err(ConfigError::ZeroDuration { state, load });
                }
            }
        }
        Ok(())
    }
}

fn tick_period_for(time_scale: u64) -> Result<u64, ConfigError> {
    if time_scale == 0 {
        return Err(ConfigError::ZeroTimeScale);
    }
    if MASTER_HZ % time_scale != 0 {
        return Err(ConfigError::UnevenTimeScale(time_scale));
    }
    Ok(MASTER_HZ / time_scale)
}

/// 32-bit stage timer with a master-cycle prescaler.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageTimer {
    pub counter: u32,
    pub target: u32,
    pub running: bool,
    prescaler: u64,
}

impl StageTimer {
    pub fn armed(target: u32, running: bool) -> Self {
        Self {
            counter: 0,
            target,
            running,
            prescaler: 0,
        }
    }

    pub fn prescaler(&self) -> u64 {
        self.prescaler
    }

    /// One master cycle. Returns true on the cycle the counter reaches its
    /// target.
    pub fn step(&mut self, tick_period_cycles: u64) -> bool {
        if !self.running || self.counter >= self.target {
            return false;
        }
        self.prescaler += 1;
        if self.prescaler < tick_period_cycles {
            return false;
        }
        self.prescaler = 0;
        self.counter += 1;
        self.counter == self.target
    }
}

/// Functional timer step: the timer runs in every timed state and is frozen
/// in IDLE and HOLD.
pub fn timer_step(
    state: WashState,
    _load: LoadSize,
    mut timer: StageTimer,
    table: &DurationTable,
) -> (StageTimer, bool) {
    timer.running = state.is_timed();
    let done = timer.step(table.tick_period_cycles());
    (timer, done)
}

/// Timer for a freshly entered state. SPIN⇄HOLD keeps the paused timer.
pub fn rearm_timer(
    from: WashState,
    to: WashState,
    load: LoadSize,
    timer: StageTimer,
    table: &DurationTable,
) -> StageTimer {
    match (from, to) {
        (WashState::Spin, WashState::Hold) | (WashState::Hold, WashState::Spin) => StageTimer {
            running: to.is_timed(),
            ..timer
        },
        _ => StageTimer::armed(table.ticks(to, load), to.is_timed()),
    }
}

/// Next-state function. Priority: reset, door, timer, start.
pub fn fsm_step(
    start_pulse: bool,
    reset_pulse: bool,
    door_open: bool,
    timer_done: bool,
    state: WashState,
) -> WashState {
    if reset_pulse {
        return WashState::Idle;
    }
    match state {
        WashState::Spin if door_open => WashState::Hold,
        WashState::Hold if !door_open => WashState::Spin,
        WashState::Hold => WashState::Hold,
        WashState::Idle if start_pulse => WashState::Fill,
        WashState::Idle => WashState::Idle,
        s if timer_done => s.after_timer(),
        s => s,
    }
}

/// Knob turns change the load only while idle; direction 0 increments.
pub fn select_load(rotary_event: bool, direction: bool, state: WashState, load: LoadSize) -> LoadSize {
    if !rotary_event || state != WashState::Idle {
        return load;
    }
    if direction {
        load.decrement()
    } else {
        load.increment()
    }
}

/// Master cycles per half period of the 1 kHz buzzer tone.
pub const BUZZER_HALF_PERIOD: u64 = MASTER_HZ / 2_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ActuatorOutputs {
    pub valve: bool,
    pub agitate_motor: bool,
    pub pump: bool,
    pub spin_motor: bool,
    pub door_lock: bool,
    /// BUZZ
    pub buzzer: bool,
    /// 0..=4 mirror the actuators above, 5..=7 one-hot load size.
    pub leds: [bool; 8],
}

/// Output decode. `buzzer_phase` is any free-running master-cycle count.
pub fn derive_outputs(state: WashState, load: LoadSize, buzzer_phase: u64) -> ActuatorOutputs {
    use WashState::*;
    let valve = matches!(state, Fill | RinseFill);
    let agitate_motor = matches!(state, Wash | RinseAgitate);
    let pump = matches!(state, Drain | RinseDrain);
    let spin_motor = state == Spin;
    let door_lock = !matches!(state, Idle | Hold | Done);
    let buzzer = state == Done && (buzzer_phase / BUZZER_HALF_PERIOD) % 2 == 0;
    let mut leds = [valve, agitate_motor, pump, spin_motor, door_lock, false, false, false];
    leds[5 + load.ordinal()] = true;
    ActuatorOutputs {
        valve,
        agitate_motor,
        pump,
        spin_motor,
        door_lock,
        buzzer,
        leds,
    }
}
