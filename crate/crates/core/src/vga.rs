//! 640x480 VGA sync generation and the state-colored status display.
//!
//! Each line runs active → front porch → sync → back porch, and each frame
//! does the same in lines, so scan position (0, 0) is the first visible
//! pixel. Both sync outputs are active low.

use crate::fsm::{LoadSize, WashState};

/// Line and frame geometry in pixel clocks and lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimingParams {
    pub h_display: u32,
    pub h_front_porch: u32,
    pub h_pulse: u32,
    pub h_back_porch: u32,
    pub v_display: u32,
    pub v_front_porch: u32,
    pub v_pulse: u32,
    pub v_back_porch: u32,
}

impl TimingParams {
    pub const VGA_640X480: TimingParams = TimingParams {
        h_display: 640,
        h_front_porch: 16,
        h_pulse: 96,
        h_back_porch: 48,
        v_display: 480,
        v_front_porch: 10,
        v_pulse: 2,
        v_back_porch: 29,
    };

    pub const fn h_total(&self) -> u32 {
        self.h_display + self.h_front_porch + self.h_pulse + self.h_back_porch
    }

    pub const fn v_total(&self) -> u32 {
        self.v_display + self.v_front_porch + self.v_pulse + self.v_back_porch
    }

    pub const fn frame_clocks(&self) -> u64 {
        self.h_total() as u64 * self.v_total() as u64
    }

    pub const fn active_samples(&self) -> u64 {
        self.h_display as u64 * self.v_display as u64
    }

    fn h_sync_range(&self) -> std::ops::Range<u32> {
        let start = self.h_display + self.h_front_porch;
        start..start + self.h_pulse
    }

    fn v_sync_range(&self) -> std::ops::Range<u32> {
        let start = self.v_display + self.v_front_porch;
        start..start + self.v_pulse
    }
}

impl Default for TimingParams {
    fn default() -> Self {
        Self::VGA_640X480
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ScanPosition {
    pub hcount: u32,
    pub vcount: u32,
}

impl ScanPosition {
    pub const fn new(hcount: u32, vcount: u32) -> Self {
        Self { hcount, vcount }
    }
}

/// 3-bit RGB color; one bit per channel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Color3(u8);

impl Color3 {
    pub const BLACK: Color3 = Color3(0b000);
    pub const BLUE: Color3 = Color3(0b001);
    pub const GREEN: Color3 = Color3(0b010);
    pub const CYAN: Color3 = Color3(0b011);
    pub const RED: Color3 = Color3(0b100);
    pub const MAGENTA: Color3 = Color3(0b101);
    pub const YELLOW: Color3 = Color3(0b110);
    pub const WHITE: Color3 = Color3(0b111);

    pub const PALETTE: [Color3; 8] = [
        Self::BLACK,
        Self::BLUE,
        Self::GREEN,
        Self::CYAN,
        Self::RED,
        Self::MAGENTA,
        Self::YELLOW,
        Self::WHITE,
    ];

    pub const fn new(r: bool, g: bool, b: bool) -> Self {
        Color3(((r as u8) << 2) | ((g as u8) << 1) | b as u8)
    }

    /// `r·4 + g·2 + b`; `None` outside 0..=7.
    pub const fn from_code(code: u8) -> Option<Self> {
        if code < 8 {
            Some(Color3(code))
        } else {
            None
        }
    }

    pub const fn code(self) -> u8 {
        self.0
    }

    pub const fn r(self) -> bool {
        self.0 & 0b100 != 0
    }

    pub const fn g(self) -> bool {
        self.0 & 0b010 != 0
    }

    pub const fn b(self) -> bool {
        self.0 & 0b001 != 0
    }

    pub fn name(self) -> &'static str {
        ["Black", "Blue", "Green", "Cyan", "Red", "Magenta", "Yellow", "White"][self.0 as usize]
    }
}

/// What the monitor sees on one pixel clock.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VgaSample {
    pub color: Color3,
    /// HS pin level (low during the pulse).
    pub hsync: bool,
    /// VS pin level (low during the pulse).
    pub vsync: bool,
    pub active: bool,
}

/// Sync outputs at `pos`, plus the position for the next pixel clock.
/// Returns `(next, hsync, vsync, active)`.
pub fn sync_step(pos: ScanPosition, params: &TimingParams) -> (ScanPosition, bool, bool, bool) {
    let hsync = !params.h_sync_range().contains(&pos.hcount);
    let vsync = !params.v_sync_range().contains(&pos.vcount);
    let active = pos.hcount < params.h_display && pos.vcount < params.v_display;

    let mut next = pos;
    next.hcount += 1;
    if next.hcount == params.h_total() {
        next.hcount = 0;
        next.vcount += 1;
        if next.vcount == params.v_total() {
            next.vcount = 0;
        }
    }
    (next, hsync, vsync, active)
}

/// Sync generator registers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VgaSync {
    pub pos: ScanPosition,
    pub params: TimingParams,
}

impl VgaSync {
    pub fn new(params: TimingParams) -> Self {
        Self {
            pos: ScanPosition::default(),
            params,
        }
    }

    /// Emits the sample for the current position and advances. `pixel`
    /// supplies the color for active positions.
    pub fn step(&mut self, pixel: impl FnOnce(ScanPosition) -> Color3) -> VgaSample {
        let pos = self.pos;
        let (next, hsync, vsync, active) = sync_step(pos, &self.params);
        self.pos = next;
        let color = if active { pixel(pos) } else { Color3::BLACK };
        VgaSample {
            color,
            hsync,
            vsync,
            active,
        }
    }
}

/// Everything the display shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HudInputs {
    pub state: WashState,
    pub load: LoadSize,
    pub door_open: bool,
}

pub const STATUS_BAND_ROWS: std::ops::RangeInclusive<u32> = 0..=319;
pub const INDICATOR_ROWS: std::ops::RangeInclusive<u32> = 360..=439;
pub const DOOR_COLUMNS: std::ops::RangeInclusive<u32> = 480..=559;

pub fn state_color(state: WashState) -> Color3 {
    match state {
        WashState::Idle => Color3::BLACK,
        WashState::Fill => Color3::BLUE,
        WashState::Wash => Color3::CYAN,
        WashState::Drain => Color3::YELLOW,
        WashState::RinseFill => Color3::BLUE,
        WashState::RinseAgitate => Color3::GREEN,
        WashState::RinseDrain => Color3::YELLOW,
        WashState::Spin => Color3::WHITE,
        WashState::Hold => Color3::RED,
        WashState::Done => Color3::MAGENTA,
    }
}

/// Columns covered by load block `i` (0..3).
pub fn load_block_columns(i: u32) -> std::ops::RangeInclusive<u32> {
    40 + 120 * i..=119 + 120 * i
}

/// Display color at an active position.
pub fn hud_pixel(pos: ScanPosition, state: WashState, load: LoadSize, door_open: bool) -> Color3 {
    let ScanPosition { hcount: x, vcount: y } = pos;
    if STATUS_BAND_ROWS.contains(&y) {
        return state_color(state);
    }
    if INDICATOR_ROWS.contains(&y) {
        if let Some(i) = (0..3).find(|&i| load_block_columns(i).contains(&x)) {
            return if (i as usize) < load.ordinal() + 1 {
                Color3::WHITE
            } else {
                Color3::BLACK
            };
        }
        if DOOR_COLUMNS.contains(&x) {
            return if door_open { Color3::RED } else { Color3::GREEN };
        }
    }
    Color3::BLACK
}
