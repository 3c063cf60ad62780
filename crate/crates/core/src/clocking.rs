//! Master clock, pixel-clock enable and two-flop synchronizer.
//!
//! The whole machine runs in the 50 MHz master domain. The 25 MHz pixel
//! clock is an enable strobe asserted on every even master cycle, so VGA
//! logic advances exactly once per two master cycles.

/// Nanoseconds per master cycle (50 MHz).
pub const MASTER_PERIOD_NS: u64 = 20;
/// Master clock frequency in Hz.
pub const MASTER_HZ: u64 = 50_000_000;
/// Master cycles per pixel clock.
pub const CYCLES_PER_PIXEL: u64 = 2;

/// A point in simulated time, counted in master cycles.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimInstant {
    pub master_cycle: u64,
}

impl SimInstant {
    pub const fn new(master_cycle: u64) -> Self {
        Self { master_cycle }
    }

    /// Elapsed simulated time since reset in whole nanoseconds.
    pub const fn nanos(self) -> u64 {
        self.master_cycle * MASTER_PERIOD_NS
    }

    /// Pixel-clock enable for this cycle; phase is fixed at reset.
    pub const fn pixel_enable(self) -> bool {
        self.master_cycle % CYCLES_PER_PIXEL == 0
    }
}

/// Free-running master cycle counter.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClockState {
    now: SimInstant,
}

impl ClockState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> SimInstant {
        self.now
    }

    /// Advances one master cycle and returns the pixel enable of the cycle
    /// just executed.
    pub fn tick(&mut self) -> bool {
        let enable = self.now.pixel_enable();
        // 2^64 cycles at 50 MHz is ~11,700 years.
        self.now.master_cycle += 1;
        enable
    }
}

/// Two-register synchronizer. The value returned at a call is the raw
/// input seen two calls earlier.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Synchronizer2FF {
    stage1: bool,
    stage2: bool,
}

impl Synchronizer2FF {
    pub fn new() -> Self {
        Self::default()
    }

    /// Clocks the chain once with `raw` and returns the synchronized level
    /// presented during this cycle.
    pub fn synchronize(&mut self, raw: bool) -> bool {
        let stable = self.stage2;
        self.stage2 = self.stage1;
        self.stage1 = raw;
        stable
    }

    pub fn stages(&self) -> (bool, bool) {
        (self.stage1, self.stage2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pixel_enable_phase() {
        let mut clk = ClockState::new();
        assert!(clk.tick());
        assert!(!clk.tick());
        assert_eq!(clk.now().master_cycle, 2);
        assert_eq!(clk.now().nanos(), 40);
    }

    #[test]
    fn one_frame_of_master_cycles_gives_frame_of_pixel_clocks() {
        let mut clk = ClockState::new();
        let enables = (0..833_600).filter(|_| clk.tick()).count();
        assert_eq!(enables, 416_800);
    }

    #[test]
    fn synchronizer_step_delays_two_cycles() {
        let mut s = Synchronizer2FF::new();
        let raw = [false, false, true, true, true, true];
        let out: Vec<bool> = raw.iter().map(|&r| s.synchronize(r)).collect();
        assert_eq!(out, [false, false, false, false, true, true]);
    }

    #[test]
    fn synchronizer_preserves_single_cycle_pulse() {
        let mut s = Synchronizer2FF::new();
        let raw = [false, true, false, false, false];
        let out: Vec<bool> = raw.iter().map(|&r| s.synchronize(r)).collect();
        assert_eq!(out, [false, false, false, true, false]);
    }

    #[test]
    fn constant_low_stays_low() {
        let mut s = Synchronizer2FF::new();
        assert!((0..50).all(|_| !s.synchronize(false)));
    }

    proptest! {
        #[test]
        fn pixel_enable_count_is_half_rounded_up(n in 0u64..5_000) {
            let mut clk = ClockState::new();
            let count = (0..n).filter(|_| clk.tick()).count() as u64;
            prop_assert_eq!(count, n.div_ceil(2));
        }

        #[test]
        fn synchronizer_is_pure_two_cycle_delay(seq in proptest::collection::vec(any::<bool>(), 0..200)) {
            let mut s = Synchronizer2FF::new();
            let out: Vec<bool> = seq.iter().map(|&r| s.synchronize(r)).collect();
            for t in 2..seq.len() {
                prop_assert_eq!(out[t], seq[t - 2]);
            }
        }
    }
}
