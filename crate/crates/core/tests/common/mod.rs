#![allow(dead_code)]

use rand::Rng;
use washsim_core::conditioning::RotaryFilterState;
use washsim_core::fsm::{DurationTable, LoadSize, WashState};
use washsim_core::{RunConfig, TimingParams};

/// Independent rotary oracle written from the case table's observable
/// consequences rather than by stepping registers.
///
/// A sample `11` produces an event iff the most recent earlier `00`/`11`
/// sample is `00` (or there is none, q1 starting cleared). The direction
/// is 1 iff the most recent `01`/`10` sample at or before it is `10`.
/// Samples are `{b,a}` as two-bit values.
pub fn rotary_oracle(samples: &[u8]) -> Vec<bool> {
    let mut events = Vec::new();
    for (i, &s) in samples.iter().enumerate() {
        if s != 0b11 {
            continue;
        }
        let armed = samples[..i]
            .iter()
            .rev()
            .find(|&&p| p == 0b00 || p == 0b11)
            .is_none_or(|&p| p == 0b00);
        if armed {
            let dir = samples[..=i]
                .iter()
                .rev()
                .find(|&&p| p == 0b01 || p == 0b10)
                .is_some_and(|&p| p == 0b10);
            events.push(dir);
        }
    }
    events
}

/// Feeds samples straight into the filter (already synchronized) and
/// returns the direction of each event. Returns the sample index whose
/// registered value produced each event as well.
pub fn rotary_filter_events(samples: &[u8]) -> Vec<(usize, bool)> {
    let mut f = RotaryFilterState::new();
    let mut out = Vec::new();
    let tail = samples.last().copied().unwrap_or(0);
    for (t, s) in samples.iter().copied().chain(std::iter::repeat_n(tail, 3)).enumerate() {
        let (ev, dir) = f.step(s & 1 == 1, s & 2 == 2);
        if ev {
            // sample t-2 reached rotary_q1 on step t
            out.push((t - 2, dir));
        }
    }
    out
}

const CW: [u8; 4] = [0b00, 0b01, 0b11, 0b10];

/// A random encoder trajectory mixing clean detents in both directions,
/// contact bounce between neighbouring Gray-code states, and half turns
/// that reverse before reaching the detent.
pub fn random_rotary_sequence(rng: &mut impl Rng) -> Vec<u8> {
    let mut seq = vec![0b00];
    let segments = rng.gen_range(1..12);
    for _ in 0..segments {
        let hold = |rng: &mut dyn rand::RngCore| 1 + (rng.next_u32() % 4) as usize;
        match rng.gen_range(0..4) {
            // clean detent
            0 | 1 => {
                let cw = rng.gen_bool(0.5);
                for k in 1..=4 {
                    let s = if cw { CW[k % 4] } else { CW[(4 - k) % 4] };
                    seq.extend(std::iter::repeat_n(s, hold(rng)));
                }
            }
            // bounce around the current position
            2 => {
                let here = *seq.last().unwrap();
                let idx = CW.iter().position(|&c| c == here).unwrap();
                for _ in 0..rng.gen_range(1..8) {
                    let step: isize = if rng.gen_bool(0.5) { 1 } else { -1 };
                    let n = CW[(idx as isize + step).rem_euclid(4) as usize];
                    seq.extend(std::iter::repeat_n(n, hold(rng)));
                    seq.extend(std::iter::repeat_n(here, hold(rng)));
                }
            }
            // arbitrary (possibly illegal) jumps
            _ => {
                for _ in 0..rng.gen_range(1..10) {
                    let s = rng.gen_range(0..4u8);
                    seq.extend(std::iter::repeat_n(s, hold(rng)));
                }
            }
        }
    }
    seq
}

/// True iff a `00` sample lies between every pair of consecutive events.
pub fn events_all_rearmed(samples: &[u8], event_samples: &[usize]) -> bool {
    let mut from = 0;
    for (n, &i) in event_samples.iter().enumerate() {
        if n > 0 && !samples[from..i].contains(&0b00) {
            return false;
        }
        from = i;
    }
    true
}

/// Config with one tick = 1,000 master cycles and pass-through debounce.
pub fn compressed() -> RunConfig {
    RunConfig::compressed(1)
}

/// All stages one tick except `hold_in`, which lasts `long_ticks`.
pub fn hold_state_config(hold_in: WashState, long_ticks: u32) -> RunConfig {
    let mut cfg = RunConfig::compressed(1);
    let mut table = DurationTable::uniform(50_000, 1).unwrap();
    if hold_in.is_timed() {
        for load in LoadSize::ALL {
            table.set(hold_in, load, long_ticks).unwrap();
        }
    }
    cfg.machine.durations = table;
    cfg
}

pub const P: TimingParams = TimingParams::VGA_640X480;
