//! Scenario configuration: JSON schema, validation and `key=value` overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channel::DepthProfile;
use crate::error::{Error, Result};
use crate::radio::{
    Band, BlePolicy, CalibrationSet, LinkLibrary, Protocol, RadioMode, Role, BLE_FEM_MAX_TXP_DBM, BLE_MIN_TXP_DBM,
    BLE_SOC_MAX_TXP_DBM,
};
use crate::sim::SimTime;
use crate::streaming::DEFAULT_FRAME_BYTES;
use crate::txp::TxpController;

/// Largest accepted frame.
pub const MAX_IMAGE_BYTES: u64 = 16 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Fixed,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BleConfig {
    pub policy: PolicyKind,
    /// TXP for the fixed policy.
    pub txp_dbm: f64,
    /// Front-end module fitted; defaults to on for the adaptive policy.
    pub fem: Option<bool>,
    pub adaptive: TxpController,
}

impl Default for BleConfig {
    fn default() -> Self {
        BleConfig {
            policy: PolicyKind::Fixed,
            txp_dbm: 3.0,
            fem: None,
            adaptive: TxpController::default(),
        }
    }
}

impl BleConfig {
    pub fn mode(&self) -> RadioMode {
        let policy = match self.policy {
            PolicyKind::Fixed => BlePolicy::Fixed { txp_dbm: self.txp_dbm },
            PolicyKind::Adaptive => BlePolicy::Adaptive,
        };
        RadioMode::Ble {
            policy,
            fem: self.fem.unwrap_or(self.policy == PolicyKind::Adaptive),
        }
    }

    pub fn from_mode(mode: &RadioMode) -> Option<Self> {
        let RadioMode::Ble { policy, fem } = *mode else {
            return None;
        };
        Some(match policy {
            BlePolicy::Fixed { txp_dbm } => BleConfig {
                policy: PolicyKind::Fixed,
                txp_dbm,
                fem: Some(fem),
                ..BleConfig::default()
            },
            BlePolicy::Adaptive => BleConfig {
                policy: PolicyKind::Adaptive,
                fem: Some(fem),
                ..BleConfig::default()
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WifiConfig {
    pub band: Band,
    pub role: Role,
}

impl Default for WifiConfig {
    fn default() -> Self {
        WifiConfig {
            band: Band::Ghz2_4,
            role: Role::Sta,
        }
    }
}

impl WifiConfig {
    pub fn mode(&self) -> RadioMode {
        RadioMode::Wifi {
            band: self.band,
            role: self.role,
        }
    }
}

/// When a scheduled command is issued.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Align {
    /// At `t_ms` exactly.
    #[default]
    Exact,
    /// At the first frame start at or after `t_ms`.
    FrameStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchCommand {
    pub t_ms: f64,
    pub target: Protocol,
    #[serde(default)]
    pub align: Align,
}

/// Demand-driven switching with hysteresis around the BLE frame capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AutoPolicy {
    /// `[t_ms, fps]` steps; frames are paced at the demanded rate.
    pub fps_demand: Vec<(f64, f64)>,
    pub up_ratio: f64,
    pub down_ratio: f64,
}

impl Default for AutoPolicy {
    fn default() -> Self {
        AutoPolicy {
            fps_demand: vec![(0.0, 2.0)],
            up_ratio: 0.9,
            down_ratio: 0.8,
        }
    }
}

/// Deliberate faults for negative tests.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Faults {
    /// `(frame_id, chunk_index)` never reaches the receiver.
    pub drop_chunk: Option<(u64, u64)>,
    /// Switch immediately, mid-frame, instead of at the frame boundary.
    pub disable_boundary_sync: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    pub duration_ms: f64,
    pub image_size_bytes: u64,
    pub depth_profile: DepthProfile,
    pub initial_protocol: Protocol,
    pub ble: BleConfig,
    pub wifi: WifiConfig,
    pub calibration: CalibrationSet,
    pub library: LinkLibrary,
    pub switch_schedule: Vec<SwitchCommand>,
    pub auto: Option<AutoPolicy>,
    /// Overrides the noise of every channel profile when set.
    pub noise_sigma_db: Option<f64>,
    /// Periodic trace rows; 0 records state changes only.
    pub sample_period_ms: f64,
    pub fps_window_ms: f64,
    pub faults: Faults,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            seed: 1,
            duration_ms: 5_000.0,
            image_size_bytes: DEFAULT_FRAME_BYTES,
            depth_profile: DepthProfile::constant(0.0),
            initial_protocol: Protocol::Ble,
            ble: BleConfig::default(),
            wifi: WifiConfig::default(),
            calibration: CalibrationSet::default(),
            library: LinkLibrary::default(),
            switch_schedule: Vec::new(),
            auto: None,
            noise_sigma_db: None,
            sample_period_ms: 1.0,
            fps_window_ms: 1_000.0,
            faults: Faults::default(),
        }
    }
}

fn finite_nonneg(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(field, format!("{v} must be finite and >= 0")))
    }
}

impl Scenario {
    /// The BLE->Wi-Fi->BLE sequence with commands at frame starts.
    pub fn two_switch(size_bytes: u64) -> Self {
        Scenario {
            image_size_bytes: size_bytes,
            duration_ms: 4_000.0,
            switch_schedule: vec![
                SwitchCommand {
                    t_ms: 1_000.0,
                    target: Protocol::Wifi,
                    align: Align::FrameStart,
                },
                SwitchCommand {
                    t_ms: 2_500.0,
                    target: Protocol::Ble,
                    align: Align::FrameStart,
                },
            ],
            ..Scenario::default()
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::config("<json>", e.to_string()))?;
        Self::from_value(v)
    }

    pub fn from_value(v: Value) -> Result<Self> {
        let sc: Scenario = serde_path_to_error::deserialize(v).map_err(|e| {
            let path = e.path().to_string();
            Error::config(
                if path == "." { "<root>".to_string() } else { path },
                e.into_inner().to_string(),
            )
        })?;
        sc.validate()?;
        Ok(sc)
    }

    /// Reads a config file and applies `key=value` overrides before validating.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut v = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                serde_json::from_str(&text).map_err(|e| Error::config(p.display().to_string(), e.to_string()))?
            }
            None => serde_json::to_value(Scenario::default()).expect("default scenario serializes"),
        };
        for o in overrides {
            apply_override(&mut v, o)?;
        }
        Self::from_value(v)
    }

    /// Applies one `key=value` override and re-validates; on error `self` is
    /// left unchanged.
    pub fn set(&mut self, spec: &str) -> Result<()> {
        let mut v = serde_json::to_value(&*self).expect("scenario serializes");
        apply_override(&mut v, spec)?;
        *self = Self::from_value(v)?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn duration(&self) -> SimTime {
        SimTime::from_millis_f64(self.duration_ms)
    }

    pub fn ble_mode(&self) -> RadioMode {
        self.ble.mode()
    }

    pub fn wifi_mode(&self) -> RadioMode {
        self.wifi.mode()
    }

    /// Library with the scenario-wide noise override applied.
    pub fn effective_library(&self) -> LinkLibrary {
        let mut lib = self.library.clone();
        if let Some(s) = self.noise_sigma_db {
            for ch in [
                &mut lib.channels.ble,
                &mut lib.channels.ble_fem,
                &mut lib.channels.wifi_2g4,
                &mut lib.channels.wifi_5g,
            ] {
                ch.noise_sigma_db = s;
            }
        }
        lib
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_ms.is_finite() && self.duration_ms > 0.0) {
            return Err(Error::config("duration_ms", "must be finite and > 0"));
        }
        if !(1..=MAX_IMAGE_BYTES).contains(&self.image_size_bytes) {
            return Err(Error::config(
                "image_size_bytes",
                format!("{} outside [1, {MAX_IMAGE_BYTES}]", self.image_size_bytes),
            ));
        }
        finite_nonneg("sample_period_ms", self.sample_period_ms)?;
        if self.sample_period_ms > 0.0 && self.sample_period_ms < 0.001 {
            return Err(Error::config("sample_period_ms", "must be 0 or >= 0.001"));
        }
        if !(self.fps_window_ms.is_finite() && self.fps_window_ms >= 1.0) {
            return Err(Error::config("fps_window_ms", "must be >= 1"));
        }
        if let Some(s) = self.noise_sigma_db {
            finite_nonneg("noise_sigma_db", s)?;
        }
        let ceiling = if self.ble_mode_has_fem() {
            BLE_FEM_MAX_TXP_DBM
        } else {
            BLE_SOC_MAX_TXP_DBM
        };
        match self.ble.policy {
            PolicyKind::Fixed => {
                if !(BLE_MIN_TXP_DBM..=ceiling).contains(&self.ble.txp_dbm) {
                    return Err(Error::config(
                        "ble.txp_dbm",
                        format!("{} outside [{BLE_MIN_TXP_DBM}, {ceiling}]", self.ble.txp_dbm),
                    ));
                }
            }
            PolicyKind::Adaptive => {
                self.ble.adaptive.validate()?;
                if self.ble.adaptive.txp_max_dbm > ceiling {
                    return Err(Error::config(
                        "ble.adaptive.txp_max_dbm",
                        format!("exceeds the {ceiling} dBm ceiling of this radio"),
                    ));
                }
            }
        }
        self.calibration.validate()?;
        self.effective_library().validate()?;
        for (i, c) in self.switch_schedule.iter().enumerate() {
            finite_nonneg(&format!("switch_schedule[{i}].t_ms"), c.t_ms)?;
        }
        if let Some(a) = &self.auto {
            if !self.switch_schedule.is_empty() {
                return Err(Error::config("auto", "use either switch_schedule or auto, not both"));
            }
            if a.fps_demand.is_empty() {
                return Err(Error::config("auto.fps_demand", "must not be empty"));
            }
            for (i, w) in a.fps_demand.iter().enumerate() {
                finite_nonneg(&format!("auto.fps_demand[{i}][0]"), w.0)?;
                finite_nonneg(&format!("auto.fps_demand[{i}][1]"), w.1)?;
            }
            if a.fps_demand.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(Error::config("auto.fps_demand", "times must be strictly increasing"));
            }
            if !(a.down_ratio > 0.0 && a.down_ratio < a.up_ratio) {
                return Err(Error::config(
                    "auto.down_ratio",
                    "must satisfy 0 < down_ratio < up_ratio",
                ));
            }
        }
        Ok(())
    }

    fn ble_mode_has_fem(&self) -> bool {
        matches!(self.ble_mode(), RadioMode::Ble { fem: true, .. })
    }
}

/// Applies one `dotted.path=value` override. The value is parsed as JSON and
/// falls back to a plain string.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(spec, "override must look like key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::config(spec, "empty key"));
    }
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts {
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
        node = match node {
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| Error::config(key, format!("`{part}` is not an array index")))?;
                let len = items.len();
                items
                    .get_mut(idx)
                    .ok_or_else(|| Error::config(key, format!("index {idx} out of range (len {len})")))?
            }
            Value::Object(map) => map.entry(part.to_string()).or_insert(Value::Null),
            _ => return Err(Error::config(key, format!("`{part}` is not inside an object"))),
        };
    }
    *node = value;
    Ok(())
}
