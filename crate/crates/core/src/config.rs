//! Run configuration: a flat JSON object of key/value pairs.
//!
//! ```json
//! { "time_scale": 50000, "wash_medium": 3, "done": 1, "debounce_depth": 4 }
//! ```
//!
//! Duration keys are `<state>_<load>` in lower case (for example
//! `rinse_agitate_large`), plus `done` for the completion window. All
//! durations are in ticks; one tick is `50_000_000 / time_scale` master
//! cycles.

use std::path::PathBuf;

use serde_json::{Map, Value};

use crate::error::ConfigError;
use crate::fsm::{DurationTable, LoadSize, WashState};
use crate::machine::MachineConfig;
use crate::stimulus::DEFAULT_ROT_GAP;
use crate::vga::TimingParams;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub machine: MachineConfig,
    pub frames_dir: Option<PathBuf>,
    pub cycles: Option<u64>,
    pub port: u16,
    /// Master cycles between the phases of a rotary detent macro.
    pub rot_gap: u64,
    /// Live sessions send every K-th captured frame.
    pub frame_decimation: u64,
    /// Simulated seconds per wall-clock second in live sessions.
    pub speed: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            machine: MachineConfig::default(),
            frames_dir: None,
            cycles: None,
            port: 8080,
            rot_gap: DEFAULT_ROT_GAP,
            frame_decimation: 2,
            speed: 1.0,
        }
    }
}

fn duration_key(state: WashState, load: LoadSize) -> String {
    format!("{}_{}", state.name(), load.name()).to_ascii_lowercase()
}

fn as_u64(key: &str, v: &Value) -> Result<u64, ConfigError> {
    v.as_u64().ok_or_else(|| ConfigError::BadValue {
        key: key.to_owned(),
        reason: format!("expected a non-negative integer, got {v}"),
    })
}

fn as_u32(key: &str, v: &Value) -> Result<u32, ConfigError> {
    u32::try_from(as_u64(key, v)?).map_err(|_| ConfigError::BadValue {
        key: key.to_owned(),
        reason: "does not fit in 32 bits".into(),
    })
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        let Value::Object(map) = value else {
            return Err(ConfigError::Syntax("top level must be an object".into()));
        };
        Self::from_map(&map)
    }

    fn from_map(map: &Map<String, Value>) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let time_scale = match map.get("time_scale") {
            Some(v) => as_u64("time_scale", v)?,
            None => 1,
        };
        let mut table = DurationTable::new(time_scale)?;

        for (key, v) in map {
            match key.as_str() {
                "time_scale" => {}
                "debounce_depth" => cfg.machine.debounce_depth = as_u32(key, v)?,
                "debounce_period" => cfg.machine.debounce_period = as_u64(key, v)?,
                "cycles" => cfg.cycles = Some(as_u64(key, v)?),
                "rot_gap" => cfg.rot_gap = as_u64(key, v)?,
                "frame_decimation" => cfg.frame_decimation = as_u64(key, v)?,
                "port" => {
                    cfg.port = u16::try_from(as_u64(key, v)?).map_err(|_| ConfigError::BadValue {
                        key: key.clone(),
                        reason: "port out of range".into(),
                    })?
                }
                "frames_dir" => {
                    let dir = v.as_str().ok_or_else(|| ConfigError::BadValue {
                        key: key.clone(),
                        reason: "expected a string".into(),
                    })?;
                    cfg.frames_dir = Some(PathBuf::from(dir));
                }
                "speed" => {
                    cfg.speed = v.as_f64().filter(|s| *s > 0.0).ok_or_else(|| ConfigError::BadValue {
                        key: key.clone(),
                        reason: "expected a positive number".into(),
                    })?
                }
                "done" => table.set(WashState::Done, LoadSize::Medium, as_u32(key, v)?)?,
                other => {
                    let target = WashState::STAGES
                        .iter()
                        .flat_map(|&s| LoadSize::ALL.map(move |l| (s, l)))
                        .find(|&(s, l)| duration_key(s, l) == other);
                    match target {
                        Some((s, l)) => table.set(s, l, as_u32(key, v)?)?,
                        None => return Err(ConfigError::UnknownKey(other.to_owned())),
                    }
                }
            }
        }
        cfg.machine.durations = table;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.machine.validate()?;
        if self.rot_gap == 0 {
            return Err(ConfigError::RotaryGap);
        }
        if self.frame_decimation == 0 {
            return Err(ConfigError::FrameDecimation);
        }
        Ok(())
    }

    /// Fast-running configuration used throughout the tests: every stage
    /// lasts `ticks` ticks of 1,000 master cycles and debouncing is a
    /// single-sample pass-through.
    pub fn compressed(ticks: u32) -> Self {
        let mut cfg = RunConfig::default();
        cfg.machine = MachineConfig {
            durations: DurationTable::uniform(50_000, ticks).expect("valid table"),
            debounce_depth: 1,
            debounce_period: 1,
            timing: TimingParams::VGA_640X480,
        };
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let cfg = RunConfig::from_json_str("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.machine.durations.ticks(WashState::Spin, LoadSize::Large), 25);
    }

    #[test]
    fn overrides_apply() {
        let cfg = RunConfig::from_json_str(
            r#"{"time_scale": 50000, "rinse_agitate_large": 7, "done": 3, "debounce_depth": 4,
                "debounce_period": 10, "frames_dir": "out", "port": 9000, "cycles": 42}"#,
        )
        .unwrap();
        let t = &cfg.machine.durations;
        assert_eq!(t.tick_period_cycles(), 1_000);
        assert_eq!(t.ticks(WashState::RinseAgitate, LoadSize::Large), 7);
        assert_eq!(t.ticks(WashState::RinseAgitate, LoadSize::Small), 10);
        assert_eq!(t.ticks(WashState::Done, LoadSize::Small), 3);
        assert_eq!(cfg.machine.debounce_depth, 4);
        assert_eq!(cfg.frames_dir, Some(PathBuf::from("out")));
        assert_eq!(cfg.port, 9000);
        assert_eq!(cfg.cycles, Some(42));
    }

    #[test]
    fn errors() {
        assert_eq!(
            RunConfig::from_json_str(r#"{"fill_small": 0}"#),
            Err(ConfigError::ZeroDuration {
                state: WashState::Fill,
                load: LoadSize::Small
            })
        );
        assert_eq!(RunConfig::from_json_str(r#"{"time_scale": 0}"#), Err(ConfigError::ZeroTimeScale));
        assert_eq!(RunConfig::from_json_str(r#"{"bogus": 1}"#), Err(ConfigError::UnknownKey("bogus".into())));
        assert_eq!(RunConfig::from_json_str(r#"{"debounce_depth": 65}"#), Err(ConfigError::DebounceDepth(65)));
        assert!(matches!(RunConfig::from_json_str("[1]"), Err(ConfigError::Syntax(_))));
        assert!(matches!(RunConfig::from_json_str(r#"{"wash_small": -1}"#), Err(ConfigError::BadValue { .. })));
        assert!(matches!(RunConfig::from_json_str(r#"{"hold_small": 3}"#), Err(ConfigError::UnknownKey(_))));
    }
}
