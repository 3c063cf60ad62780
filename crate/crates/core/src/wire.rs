//! Live-panel wire protocol: one JSON object per line.

use serde::{Deserialize, Serialize};

use crate::capture::Frame;
use crate::machine::{Signal, Status};
use crate::stimulus::Rotation;
use crate::vga::Color3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dir {
    Cw,
    Ccw,
}

impl From<Dir> for Rotation {
    fn from(d: Dir) -> Self {
        match d {
            Dir::Cw => Rotation::Cw,
            Dir::Ccw => Rotation::Ccw,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "lowercase", deny_unknown_fields)]
pub enum ClientMessage {
    Input { name: Signal, value: bool },
    Rotary { dir: Dir },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "lowercase")]
pub enum ServerMessage {
    Status {
        state: String,
        load: String,
        leds: [bool; 8],
        buzzer: bool,
        door_open: bool,
        cycle: u64,
    },
    Frame {
        seq: u64,
        runs: Vec<(u32, u8)>,
    },
    Error {
        message: String,
    },
}

impl ServerMessage {
    pub fn status(s: &Status) -> Self {
        ServerMessage::Status {
            state: s.state.name().to_owned(),
            load: s.load.name().to_owned(),
            leds: s.leds,
            buzzer: s.buzzer,
            door_open: s.door_open,
            cycle: s.cycle,
        }
    }

    pub fn frame(f: &Frame) -> Self {
        ServerMessage::Frame {
            seq: f.seq,
            runs: encode_runs(f),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialize")
    }
}

pub fn parse_client_message(line: &str) -> Result<ClientMessage, String> {
    serde_json::from_str(line.trim()).map_err(|e| e.to_string())
}

/// Run-length encodes a frame as `[count, color code]` pairs, row-major.
pub fn encode_runs(frame: &Frame) -> Vec<(u32, u8)> {
    let mut runs: Vec<(u32, u8)> = Vec::new();
    for c in &frame.pixels {
        match runs.last_mut() {
            Some((n, code)) if *code == c.code() => *n += 1,
            _ => runs.push((1, c.code())),
        }
    }
    runs
}

/// Inverse of [`encode_runs`]; rejects bad color codes and run totals that
/// do not fill the frame exactly.
pub fn decode_runs(runs: &[(u32, u8)], width: u32, height: u32) -> Result<Frame, String> {
    let total = (width * height) as u64;
    let sum: u64 = runs.iter().map(|&(n, _)| n as u64).sum();
    if sum != total {
        return Err(format!("runs cover {sum} pixels, frame has {total}"));
    }
    let mut frame = Frame::new(width, height);
    frame.pixels.clear();
    for &(n, code) in runs {
        let c = Color3::from_code(code).ok_or_else(|| format!("color code {code} out of range"))?;
        frame.pixels.extend(std::iter::repeat(c).take(n as usize));
    }
    Ok(frame)
}
