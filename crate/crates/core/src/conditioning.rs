//! Input conditioning: shift-register debouncing, the quadrature rotary
//! filter, rising-edge detection and the SPIN/HOLD door gate.

use crate::fsm::WashState;

/// Pin-level inputs as presented to the board, sampled once per master cycle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RawInputs {
    /// BTNS
    pub btn_start: bool,
    pub btn_reset: bool,
    /// SW3
    pub sw_door: bool,
    /// ROTA
    pub rot_a: bool,
    /// ROTB
    pub rot_b: bool,
}

/// Inputs after synchronization, debouncing and edge detection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConditionedInputs {
    pub start_pulse: bool,
    pub reset_pulse: bool,
    pub door_level: bool,
    pub rotary_event: bool,
    pub direction: bool,
}

pub const MAX_DEBOUNCE_DEPTH: u32 = 64;

/// Shift-register debouncer with a sample prescaler.
///
/// Every `period` calls the raw level is shifted in. The stable output
/// flips only once the last `depth` samples all agree on the new value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DebouncerState {
    shift: u64,
    depth: u32,
    period: u64,
    divider: u64,
    stable: bool,
}

impl DebouncerState {
    /// `depth` must be in `1..=64` and `period` at least 1; the harness
    /// validates both when loading configuration.
    pub fn new(depth: u32, period: u64) -> Self {
        assert!((1..=MAX_DEBOUNCE_DEPTH).contains(&depth), "debounce depth out of range");
        assert!(period >= 1, "debounce period must be nonzero");
        Self {
            shift: 0,
            depth,
            period,
            divider: 0,
            stable: false,
        }
    }

    fn mask(&self) -> u64 {
        if self.depth == 64 {
            u64::MAX
        } else {
            (1u64 << self.depth) - 1
        }
    }

    pub fn stable(&self) -> bool {
        self.stable
    }

    /// Feeds one master cycle. Returns `(stable, changed)`; `changed` is
    /// high for the single cycle on which `stable` flips.
    pub fn step(&mut self, raw: bool) -> (bool, bool) {
        let sample_now = self.divider == 0;
        self.divider = (self.divider + 1) % self.period;
        if !sample_now {
            return (self.stable, false);
        }
        let mask = self.mask();
        self.shift = ((self.shift << 1) | raw as u64) & mask;
        let agreed = if self.shift == mask {
            Some(true)
        } else if self.shift == 0 {
            Some(false)
        } else {
            None
        };
        match agreed {
            Some(v) if v != self.stable => {
                self.stable = v;
                (v, true)
            }
            _ => (self.stable, false),
        }
    }
}

/// Registers of the quadrature rotary filter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RotaryFilterState {
    /// `{rotary_b, rotary_a}` as a two-bit value.
    pub rotary_sync: u8,
    pub rotary_q1: bool,
    pub rotary_q2: bool,
    pub delay_rotary_q1: bool,
}

impl RotaryFilterState {
    pub fn new() -> Self {
        Self::default()
    }

    /// One clock of the filter. Returns `(rotary_event, direction)` as seen
    /// during this cycle, then clocks all registers.
    ///
    /// `rotary_sync` is `00` clears q1, `11` sets q1, `01` clears q2, `10`
    /// sets q2. The event is the rising edge of q1 and the direction is q2.
    pub fn step(&mut self, rot_a: bool, rot_b: bool) -> (bool, bool) {
        let event = self.rotary_q1 && !self.delay_rotary_q1;
        let direction = self.rotary_q2;

        self.delay_rotary_q1 = self.rotary_q1;
        match self.rotary_sync {
            0b00 => self.rotary_q1 = false,
            0b01 => self.rotary_q2 = false,
            0b10 => self.rotary_q2 = true,
            _ => self.rotary_q1 = true,
        }
        self.rotary_sync = ((rot_b as u8) << 1) | rot_a as u8;

        (event, direction)
    }
}

/// Rising-edge detector. Returns `(pulse, new_prev)`.
pub fn edge_detect(level: bool, prev: bool) -> (bool, bool) {
    (level && !prev, level)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeDetector {
    prev: bool,
}

impl EdgeDetector {
    pub fn step(&mut self, level: bool) -> bool {
        let (pulse, prev) = edge_detect(level, self.prev);
        self.prev = prev;
        pulse
    }
}

/// The door-switch gate: the door may only read as open during SPIN or HOLD.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DoorGateState {
    pub sw3_sync: bool,
    pub sw3_block: bool,
}

impl DoorGateState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Clocks the gate register; called on pixel-enable cycles. The start
    /// button has priority and forces the door closed.
    pub fn step(&mut self, sw3_sync: bool, btn_start_raw: bool, washing_state: WashState) -> bool {
        self.sw3_sync = sw3_sync;
        self.sw3_block = if btn_start_raw {
            false
        } else if washing_state.door_may_open() {
            sw3_sync
        } else {
            false
        };
        self.sw3_block
    }

    /// Gate output qualified by the current state.
    pub fn door_open(&self, washing_state: WashState) -> bool {
        self.sw3_block && washing_state.door_may_open()
    }
}

/// Functional form of [`DoorGateState::step`].
pub fn door_gate(
    sw3_sync: bool,
    btn_start_raw: bool,
    washing_state: WashState,
    mut state: DoorGateState,
) -> (DoorGateState, bool) {
    let open = state.step(sw3_sync, btn_start_raw, washing_state);
    (state, open)
}
