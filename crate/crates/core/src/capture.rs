//! Virtual VGA monitor.
//!
//! The monitor sees only the pin-level sample stream. It locks on a vsync
//! falling edge and finds every pixel by counting hsync edges and clocks,
//! the way a real display would, so a sync bug shows up as a broken
//! capture instead of being hidden behind shared counters.

use std::fmt;

use crate::error::{CaptureError, TimingError};
use crate::vga::{Color3, TimingParams, VgaSample};

/// A captured image of palette colors, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Color3>,
    pub seq: u64,
}

impl Frame {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            pixels: vec![Color3::BLACK; (width * height) as usize],
            seq: 0,
        }
    }

    /// Builds a frame by evaluating `f(x, y)` over every position.
    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> Color3) -> Self {
        let mut pixels = Vec::with_capacity((width * height) as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
            seq: 0,
        }
    }

    pub fn get(&self, x: u32, y: u32) -> Color3 {
        self.pixels[(y * self.width + x) as usize]
    }

    pub fn row(&self, y: u32) -> &[Color3] {
        let w = self.width as usize;
        &self.pixels[y as usize * w..(y as usize + 1) * w]
    }
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Frame")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("seq", &self.seq)
            .finish_non_exhaustive()
    }
}

/// Binary PPM (P6): one byte per channel, 0 or 255.
pub fn encode_ppm(frame: &Frame) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", frame.width, frame.height);
    let mut out = Vec::with_capacity(header.len() + frame.pixels.len() * 3);
    out.extend_from_slice(header.as_bytes());
    let level = |bit: bool| if bit { 0xFF } else { 0x00 };
    for c in &frame.pixels {
        out.extend_from_slice(&[level(c.r()), level(c.g()), level(c.b())]);
    }
    out
}

/// Capture registers of the virtual monitor.
#[derive(Debug, Clone)]
pub struct CaptureState {
    params: TimingParams,
    prev_hsync: Option<bool>,
    prev_vsync: Option<bool>,
    locked: bool,
    /// Clocks since the last hsync falling edge, once one has been seen.
    since_hfall: Option<u64>,
    /// hsync falling edges since the vsync falling edge that locked the frame.
    lines: u64,
    latched: u64,
    buffer: Vec<Color3>,
    next_seq: u64,
}

impl CaptureState {
    pub fn new(params: TimingParams) -> Self {
        Self {
            params,
            prev_hsync: None,
            prev_vsync: None,
            locked: false,
            since_hfall: None,
            lines: 0,
            latched: 0,
            buffer: vec![Color3::BLACK; params.active_samples() as usize],
            next_seq: 0,
        }
    }

    pub fn is_locked(&self) -> bool {
        self.locked
    }

    pub fn frames_emitted(&self) -> u64 {
        self.next_seq
    }

    /// Consumes one pixel-clock sample; returns a frame at each vsync
    /// falling edge that closes a fully captured frame.
    pub fn step(&mut self, sample: VgaSample) -> Result<Option<Frame>, CaptureError> {
        let p = self.params;
        let hfall = self.prev_hsync == Some(true) && !sample.hsync;
        let vfall = self.prev_vsync == Some(true) && !sample.vsync;
        self.prev_hsync = Some(sample.hsync);
        self.prev_vsync = Some(sample.vsync);

        let mut completed = None;
        if vfall {
            if self.locked {
                let expected_lines = p.v_total() as u64;
                if self.lines != expected_lines {
                    self.locked = false;
                    return Err(CaptureError::FrameLines {
                        measured: self.lines,
                        expected: expected_lines,
                    });
                }
                if self.latched == p.active_samples() {
                    completed = Some(self.emit());
                }
            }
            self.locked = true;
            self.lines = 0;
            self.latched = 0;
        }

        if hfall {
            if self.locked && self.lines > 0 {
                let measured = self.since_hfall.map_or(0, |n| n + 1);
                let expected = p.h_total() as u64;
                if measured != expected {
                    self.locked = false;
                    return Err(CaptureError::LinePeriod { measured, expected });
                }
            }
            self.since_hfall = Some(0);
            if self.locked {
                self.lines += 1;
            }
        } else if let Some(n) = self.since_hfall.as_mut() {
            *n += 1;
        }

        if self.locked {
            self.latch(sample.color);
        }
        Ok(completed)
    }

    fn latch(&mut self, color: Color3) {
        let p = self.params;
        let Some(since) = self.since_hfall else { return };
        // Line starts h_pulse + h_back_porch clocks after the hsync edge;
        // the first visible line follows v_pulse + v_back_porch edges.
        let x = since as i64 - (p.h_pulse + p.h_back_porch) as i64;
        let y = self.lines as i64 - (p.v_pulse + p.v_back_porch) as i64;
        if (0..p.h_display as i64).contains(&x) && (0..p.v_display as i64).contains(&y) {
            self.buffer[(y * p.h_display as i64 + x) as usize] = color;
            self.latched += 1;
        }
    }

    fn emit(&mut self) -> Frame {
        let p = self.params;
        let frame = Frame {
            width: p.h_display,
            height: p.v_display,
            pixels: self.buffer.clone(),
            seq: self.next_seq,
        };
        self.next_seq += 1;
        frame
    }
}

/// Functional form of [`CaptureState::step`].
pub fn capture_step(
    sample: VgaSample,
    state: &mut CaptureState,
) -> Result<Option<Frame>, CaptureError> {
    state.step(sample)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    ClocksPerLine,
    HsyncPulseClocks,
    HDisplayClocks,
    HFrontPorchClocks,
    HBackPorchClocks,
    LinesPerFrame,
    FrameClocks,
    VsyncPulseLines,
    VDisplayLines,
    VFrontPorchLines,
    VBackPorchLines,
    ActiveSamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub measured: u64,
    pub expected: u64,
}

/// Measured timing of a sync trace. Each field holds the expected value
/// when every measurement agreed, else the first deviating measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConformanceReport {
    pub frames: u64,
    pub lines_per_frame: u64,
    pub frame_clocks: u64,
    pub clocks_per_line: u64,
    pub hsync_pulse_clocks: u64,
    pub h_display_clocks: u64,
    pub h_front_porch_clocks: u64,
    pub h_back_porch_clocks: u64,
    pub vsync_pulse_lines: u64,
    pub v_display_lines: u64,
    pub v_front_porch_lines: u64,
    pub v_back_porch_lines: u64,
    pub active_samples: u64,
    pub pass: bool,
    pub violations: Vec<Violation>,
}

impl fmt::Display for ConformanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "frames measured     {}", self.frames)?;
        writeln!(f, "clocks per line     {}", self.clocks_per_line)?;
        writeln!(f, "hsync pulse clocks  {}", self.hsync_pulse_clocks)?;
        writeln!(f, "h display/fp/bp     {}/{}/{}", self.h_display_clocks, self.h_front_porch_clocks, self.h_back_porch_clocks)?;
        writeln!(f, "lines per frame     {}", self.lines_per_frame)?;
        writeln!(f, "frame clocks        {}", self.frame_clocks)?;
        writeln!(f, "vsync pulse lines   {}", self.vsync_pulse_lines)?;
        writeln!(f, "v display/fp/bp     {}/{}/{}", self.v_display_lines, self.v_front_porch_lines, self.v_back_porch_lines)?;
        writeln!(f, "active samples      {}", self.active_samples)?;
        for v in &self.violations {
            writeln!(f, "VIOLATION {:?}: measured {}, expected {}", v.kind, v.measured, v.expected)?;
        }
        write!(f, "{}", if self.pass { "PASS" } else { "FAIL" })
    }
}

struct Measurements {
    violations: Vec<Violation>,
    first_bad: std::collections::BTreeMap<ViolationKind, u64>,
}

impl Measurements {
    fn check(&mut self, kind: ViolationKind, measured: u64, expected: u64) {
        if measured == expected {
            return;
        }
        self.first_bad.entry(kind).or_insert(measured);
        let v = Violation {
            kind,
            measured,
            expected,
        };
        if !self.violations.contains(&v) {
            self.violations.push(v);
        }
    }

    fn value(&self, kind: ViolationKind, expected: u64) -> u64 {
        self.first_bad.get(&kind).copied().unwrap_or(expected)
    }
}

/// Measures every line and every complete frame (vsync falling edge to
/// vsync falling edge) in `trace` against `params`.
///
/// Horizontal quantities are in pixel clocks; vertical ones are measured in
/// clocks and reported in lines, a partial line being reported as the
/// truncated quotient with the raw clock count flagged separately.
pub fn check_timing(trace: &[VgaSample], params: &TimingParams) -> Result<ConformanceReport, TimingError> {
    let h_total = params.h_total() as u64;
    let mut m = Measurements {
        violations: Vec::new(),
        first_bad: Default::default(),
    };

    let falls = |sel: fn(&VgaSample) -> bool| -> Vec<usize> {
        trace
            .windows(2)
            .enumerate()
            .filter(|(_, w)| sel(&w[0]) && !sel(&w[1]))
            .map(|(i, _)| i + 1)
            .collect()
    };
    let rises = |sel: fn(&VgaSample) -> bool| -> Vec<usize> {
        trace
            .windows(2)
            .enumerate()
            .filter(|(_, w)| !sel(&w[0]) && sel(&w[1]))
            .map(|(i, _)| i + 1)
            .collect()
    };
    let h_falls = falls(|s| s.hsync);
    let h_rises = rises(|s| s.hsync);
    let v_falls = falls(|s| s.vsync);
    let v_rises = rises(|s| s.vsync);
    // active runs as [start, end)
    let act_starts = rises(|s| s.active);
    let act_ends = falls(|s| s.active);

    if v_falls.len() < 2 {
        return Err(TimingError::TraceTooShort);
    }
    let span = v_falls[0]..v_falls[v_falls.len() - 1];
    let within = |i: &usize| span.contains(i);

    // Horizontal: one measurement per line inside the measured frames.
    for w in h_falls.windows(2).filter(|w| within(&w[0])) {
        m.check(ViolationKind::ClocksPerLine, (w[1] - w[0]) as u64, h_total);
    }
    for &f in h_falls.iter().filter(|i| within(i)) {
        if let Some(&r) = h_rises.iter().find(|&&r| r > f) {
            m.check(ViolationKind::HsyncPulseClocks, (r - f) as u64, params.h_pulse as u64);
        }
    }
    for &s in act_starts.iter().filter(|i| within(i)) {
        if let Some(&e) = act_ends.iter().find(|&&e| e > s) {
            m.check(ViolationKind::HDisplayClocks, (e - s) as u64, params.h_display as u64);
            if let Some(&f) = h_falls.iter().find(|&&f| f >= e) {
                m.check(ViolationKind::HFrontPorchClocks, (f - e) as u64, params.h_front_porch as u64);
            }
        }
        if let Some(&r) = h_rises.iter().rev().find(|&&r| r <= s) {
            m.check(ViolationKind::HBackPorchClocks, (s - r) as u64, params.h_back_porch as u64);
        }
    }

    // Vertical: one measurement per complete frame.
    for w in v_falls.windows(2) {
        let (start, end) = (w[0], w[1]);
        m.check(ViolationKind::FrameClocks, (end - start) as u64, params.frame_clocks());
        let lines = h_falls.iter().filter(|&&f| f >= start && f < end).count() as u64;
        m.check(ViolationKind::LinesPerFrame, lines, params.v_total() as u64);

        if let Some(&r) = v_rises.iter().find(|&&r| r > start) {
            m.check(ViolationKind::VsyncPulseLines, (r - start) as u64 / h_total, params.v_pulse as u64);
            if (r - start) as u64 % h_total != 0 {
                m.check(ViolationKind::VsyncPulseLines, (r - start) as u64, params.v_pulse as u64 * h_total);
            }
            // back porch: vsync rise to the first active sample of the frame
            if let Some(&s) = act_starts.iter().find(|&&s| s > r && s < end) {
                m.check(ViolationKind::VBackPorchLines, (s - r) as u64 / h_total, params.v_back_porch as u64);
            }
        }

        let runs: Vec<usize> = act_starts.iter().copied().filter(|&s| s > start && s < end).collect();
        m.check(ViolationKind::VDisplayLines, runs.len() as u64, params.v_display as u64);
        // front porch: end of the last visible line to the closing vsync edge
        if let Some(&last) = runs.last() {
            let fp = (end - last) as u64;
            m.check(ViolationKind::VFrontPorchLines, fp.saturating_sub(h_total) / h_total, params.v_front_porch as u64);
        }
        let active = trace[start..end].iter().filter(|s| s.active).count() as u64;
        m.check(ViolationKind::ActiveSamples, active, params.active_samples());
    }
    let frames = (v_falls.len() - 1) as u64;

    let pass = m.violations.is_empty();
    Ok(ConformanceReport {
        frames,
        lines_per_frame: m.value(ViolationKind::LinesPerFrame, params.v_total() as u64),
        frame_clocks: m.value(ViolationKind::FrameClocks, params.frame_clocks()),
        clocks_per_line: m.value(ViolationKind::ClocksPerLine, h_total),
        hsync_pulse_clocks: m.value(ViolationKind::HsyncPulseClocks, params.h_pulse as u64),
        h_display_clocks: m.value(ViolationKind::HDisplayClocks, params.h_display as u64),
        h_front_porch_clocks: m.value(ViolationKind::HFrontPorchClocks, params.h_front_porch as u64),
        h_back_porch_clocks: m.value(ViolationKind::HBackPorchClocks, params.h_back_porch as u64),
        vsync_pulse_lines: m.value(ViolationKind::VsyncPulseLines, params.v_pulse as u64),
        v_display_lines: m.value(ViolationKind::VDisplayLines, params.v_display as u64),
        v_front_porch_lines: m.value(ViolationKind::VFrontPorchLines, params.v_front_porch as u64),
        v_back_porch_lines: m.value(ViolationKind::VBackPorchLines, params.v_back_porch as u64),
        active_samples: m.value(ViolationKind::ActiveSamples, params.active_samples()),
        pass,
        violations: m.violations,
    })
}
