//! Scripted stimulus files.
//!
//! ```text
//! # comment
//! @100 BTN_START=1
//! @150 BTN_START=0
//! @200 ROT CW
//! ```

use std::collections::BTreeMap;
use std::fmt;

use crate::error::StimulusError;
use crate::machine::Signal;

pub const DEFAULT_ROT_GAP: u64 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rotation {
    Cw,
    Ccw,
}

impl Rotation {
    pub fn name(self) -> &'static str {
        match self {
            Rotation::Cw => "CW",
            Rotation::Ccw => "CCW",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StimulusAction {
    Set(Signal, bool),
    Rot(Rotation),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StimulusEvent {
    pub at_cycle: u64,
    pub action: StimulusAction,
}

impl StimulusEvent {
    pub fn set(at_cycle: u64, signal: Signal, level: bool) -> Self {
        Self {
            at_cycle,
            action: StimulusAction::Set(signal, level),
        }
    }

    pub fn rot(at_cycle: u64, rotation: Rotation) -> Self {
        Self {
            at_cycle,
            action: StimulusAction::Rot(rotation),
        }
    }
}

impl fmt::Display for StimulusEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.action {
            StimulusAction::Set(sig, v) => write!(f, "@{} {}={}", self.at_cycle, sig, v as u8),
            StimulusAction::Rot(r) => write!(f, "@{} ROT {}", self.at_cycle, r.name()),
        }
    }
}

/// Master cycles one detent macro occupies, from its first to last edge.
pub fn detent_span(gap: u64) -> u64 {
    4 * gap
}

/// Pin-level phases of one detent, as `(offset, ROT_A, ROT_B)`.
///
/// Clockwise walks `{b,a}` 00 → 01 → 11 → 10 → 00, counterclockwise
/// 00 → 10 → 11 → 01 → 00.
fn detent_phases(rotation: Rotation) -> [(u64, bool, bool); 5] {
    let cw = [(0, false, false), (1, true, false), (2, true, true), (3, false, true), (4, false, false)];
    match rotation {
        Rotation::Cw => cw,
        Rotation::Ccw => cw.map(|(i, a, b)| (i, b, a)),
    }
}

fn parse_line(line: &str, lineno: usize) -> Result<Option<StimulusEvent>, StimulusError> {
    let err = |reason: &str| StimulusError::Parse {
        line: lineno,
        reason: reason.to_owned(),
    };
    let body = line.split('#').next().unwrap_or("").trim();
    if body.is_empty() {
        return Ok(None);
    }
    let mut parts = body.split_whitespace();
    let at = parts.next().ok_or_else(|| err("empty line"))?;
    let cycle = at
        .strip_prefix('@')
        .ok_or_else(|| err("expected `@<cycle>`"))?
        .parse::<u64>()
        .map_err(|e| err(&format!("bad cycle: {e}")))?;
    let what = parts.next().ok_or_else(|| err("missing action"))?;
    let event = if what == "ROT" {
        let dir = parts.next().ok_or_else(|| err("ROT needs CW or CCW"))?;
        let rotation = match dir {
            "CW" => Rotation::Cw,
            "CCW" => Rotation::Ccw,
            other => return Err(err(&format!("unknown rotation `{other}`"))),
        };
        StimulusEvent::rot(cycle, rotation)
    } else {
        let (name, value) = what
            .split_once('=')
            .ok_or_else(|| err("expected <SIGNAL>=<0|1> or ROT <CW|CCW>"))?;
        let signal = name.parse::<Signal>().map_err(|e| err(&e))?;
        let level = match value {
            "0" => false,
            "1" => true,
            other => return Err(err(&format!("level must be 0 or 1, got `{other}`"))),
        };
        StimulusEvent::set(cycle, signal, level)
    };
    if let Some(extra) = parts.next() {
        return Err(err(&format!("unexpected `{extra}`")));
    }
    Ok(Some(event))
}

/// Parses a stimulus script, keeping rotary macros unexpanded.
pub fn parse_script(text: &str) -> Result<Vec<StimulusEvent>, StimulusError> {
    let mut events: Vec<StimulusEvent> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if let Some(ev) = parse_line(line, lineno)? {
            if let Some(prev) = events.last() {
                if ev.at_cycle < prev.at_cycle {
                    return Err(StimulusError::Unsorted {
                        line: lineno,
                        cycle: ev.at_cycle,
                        previous: prev.at_cycle,
                    });
                }
            }
            events.push(ev);
        }
    }
    Ok(events)
}

/// Expands rotary macros into pin-level events, sorted by cycle. Two
/// events setting the same pin to different levels on the same cycle are
/// rejected.
pub fn expand(events: &[StimulusEvent], gap: u64) -> Result<Vec<StimulusEvent>, StimulusError> {
    let mut out = Vec::with_capacity(events.len());
    for ev in events {
        match ev.action {
            StimulusAction::Set(..) => out.push(*ev),
            StimulusAction::Rot(r) => {
                for (i, a, b) in detent_phases(r) {
                    let at = ev.at_cycle + i * gap;
                    out.push(StimulusEvent::set(at, Signal::RotA, a));
                    out.push(StimulusEvent::set(at, Signal::RotB, b));
                }
            }
        }
    }
    out.sort_by_key(|e| e.at_cycle);

    let mut seen: BTreeMap<(u64, Signal), bool> = BTreeMap::new();
    for ev in &out {
        if let StimulusAction::Set(sig, v) = ev.action {
            if let Some(&prev) = seen.get(&(ev.at_cycle, sig)) {
                if prev != v {
                    return Err(StimulusError::Conflict {
                        signal: sig.name().to_owned(),
                        cycle: ev.at_cycle,
                    });
                }
            }
            seen.insert((ev.at_cycle, sig), v);
        }
    }
    Ok(out)
}

/// Parses and expands a stimulus file into the pin-level event list.
pub fn parse_stimulus(text: &str, gap: u64) -> Result<Vec<StimulusEvent>, StimulusError> {
    expand(&parse_script(text)?, gap)
}

/// Renders events in the script format, sorted by cycle.
pub fn format_script(events: &[StimulusEvent]) -> String {
    let mut sorted = events.to_vec();
    sorted.sort_by_key(|e| e.at_cycle);
    sorted.iter().map(|e| format!("{e}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_button_events() {
        let evs = parse_stimulus("@100 BTN_START=1\n@150 BTN_START=0", DEFAULT_ROT_GAP).unwrap();
        assert_eq!(
            evs,
            vec![
                StimulusEvent::set(100, Signal::BtnStart, true),
                StimulusEvent::set(150, Signal::BtnStart, false)
            ]
        );
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# header\n\n@5 SW_DOOR=1   # open\n  \n";
        assert_eq!(parse_stimulus(text, 10).unwrap().len(), 1);
    }

    #[test]
    fn rotation_expands_to_detent() {
        let evs = parse_stimulus("@200 ROT CW", 1_000).unwrap();
        let levels: Vec<(u64, Signal, bool)> = evs
            .iter()
            .map(|e| match e.action {
                StimulusAction::Set(s, v) => (e.at_cycle, s, v),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(levels.len(), 10);
        assert!(levels.contains(&(1_200, Signal::RotA, true)));
        assert!(levels.contains(&(1_200, Signal::RotB, false)));
        assert!(levels.contains(&(2_200, Signal::RotB, true)));
        assert!(levels.contains(&(4_200, Signal::RotB, false)));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        assert_eq!(
            parse_stimulus("bad line", 1),
            Err(StimulusError::Parse {
                line: 1,
                reason: "expected `@<cycle>`".into()
            })
        );
        assert!(matches!(parse_stimulus("@1 BTN_START=1\n@x BTN_START=0", 1), Err(StimulusError::Parse { line: 2, .. })));
        assert!(matches!(parse_stimulus("@1 BTN_START=2", 1), Err(StimulusError::Parse { line: 1, .. })));
        assert!(matches!(parse_stimulus("@1 ROT UP", 1), Err(StimulusError::Parse { line: 1, .. })));
        assert!(matches!(parse_stimulus("@1 FOO=1", 1), Err(StimulusError::Parse { line: 1, .. })));
        assert!(matches!(parse_stimulus("@1 SW_DOOR=1 x", 1), Err(StimulusError::Parse { line: 1, .. })));
    }

    #[test]
    fn unsorted_rejected() {
        assert_eq!(
            parse_stimulus("@10 SW_DOOR=1\n@5 SW_DOOR=0", 1),
            Err(StimulusError::Unsorted {
                line: 2,
                cycle: 5,
                previous: 10
            })
        );
    }

    #[test]
    fn conflicting_duplicates_rejected() {
        assert!(matches!(
            parse_stimulus("@10 SW_DOOR=1\n@10 SW_DOOR=0", 1),
            Err(StimulusError::Conflict { cycle: 10, .. })
        ));
        // identical duplicates are harmless
        assert!(parse_stimulus("@10 SW_DOOR=1\n@10 SW_DOOR=1", 1).is_ok());
        // overlapping detents collide on ROT_A
        assert!(parse_stimulus("@0 ROT CW\n@1 ROT CCW", 1).is_err());
    }

    #[test]
    fn format_round_trips() {
        let script = "@0 ROT CCW\n@10 BTN_START=1\n@20 BTN_START=0\n";
        let evs = parse_script(script).unwrap();
        assert_eq!(format_script(&evs), script);
    }
}
