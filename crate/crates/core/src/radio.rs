//! Link models for BLE and Wi-Fi: throughput-vs-RSSI curves, goodput,
//! duty cycle, dual-chip power and the handover drain calibration.
//!
//! All active-power numbers here are calibration constants chosen to satisfy
//! the measured ratios (BLE ~1/10 of Wi-Fi, FEM roughly doubling BLE power at
//! 6 cm). Only the Wi-Fi standby powers and the 3.3 mW companion idle draw
//! are measured values.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelProfile;
use crate::error::{Error, Result};

/// Bytes per "KB" of image payload.
pub const KB_BYTES: f64 = 1024.0;

/// Bare-SoC BLE TXP ceiling; FEM cost applies above it.
pub const BLE_SOC_MAX_TXP_DBM: f64 = 3.0;
pub const BLE_FEM_MAX_TXP_DBM: f64 = 20.0;
pub const BLE_MIN_TXP_DBM: f64 = -20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Ble,
    Wifi,
}

impl Protocol {
    pub fn other(self) -> Protocol {
        match self {
            Protocol::Ble => Protocol::Wifi,
            Protocol::Wifi => Protocol::Ble,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Ble => "ble",
            Protocol::Wifi => "wifi",
        }
    }

    pub fn parse(s: &str) -> Option<Protocol> {
        match s {
            "ble" => Some(Protocol::Ble),
            "wifi" => Some(Protocol::Wifi),
            _ => None,
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Handover direction, named by departing then arriving protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    BleToWifi,
    WifiToBle,
}

impl Direction {
    pub fn new(from: Protocol, to: Protocol) -> Option<Direction> {
        match (from, to) {
            (Protocol::Ble, Protocol::Wifi) => Some(Direction::BleToWifi),
            (Protocol::Wifi, Protocol::Ble) => Some(Direction::WifiToBle),
            _ => None,
        }
    }

    pub fn from_protocol(self) -> Protocol {
        match self {
            Direction::BleToWifi => Protocol::Ble,
            Direction::WifiToBle => Protocol::Wifi,
        }
    }

    pub fn to_protocol(self) -> Protocol {
        self.from_protocol().other()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::BleToWifi => "ble_to_wifi",
            Direction::WifiToBle => "wifi_to_ble",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "BandRepr")]
pub enum Band {
    #[serde(rename = "2.4")]
    Ghz2_4,
    #[serde(rename = "5")]
    Ghz5,
}

/// Accepts `"2.4"`, `"5"`, `2.4` or `5`.
#[derive(Deserialize)]
#[serde(untagged)]
enum BandRepr {
    Num(f64),
    Text(String),
}

impl TryFrom<BandRepr> for Band {
    type Error = String;

    fn try_from(r: BandRepr) -> Result<Self, String> {
        match r {
            BandRepr::Num(2.4) => Ok(Band::Ghz2_4),
            BandRepr::Num(5.0) => Ok(Band::Ghz5),
            BandRepr::Text(t) => match t.as_str() {
                "2.4" => Ok(Band::Ghz2_4),
                "5" => Ok(Band::Ghz5),
                _ => Err("band must be \"2.4\" or \"5\"".into()),
            },
            _ => Err("band must be \"2.4\" or \"5\"".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Sta,
    Ap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum BlePolicy {
    Fixed { txp_dbm: f64 },
    Adaptive,
}

/// One radio configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadioMode {
    Ble { policy: BlePolicy, fem: bool },
    Wifi { band: Band, role: Role },
}

impl RadioMode {
    pub const BLE_FIXED_3DBM: RadioMode = RadioMode::Ble {
        policy: BlePolicy::Fixed { txp_dbm: 3.0 },
        fem: false,
    };
    pub const BLE_ADAPTIVE: RadioMode = RadioMode::Ble {
        policy: BlePolicy::Adaptive,
        fem: true,
    };
    pub const WIFI_2G4_STA: RadioMode = RadioMode::Wifi {
        band: Band::Ghz2_4,
        role: Role::Sta,
    };

    /// The six configurations of the depth characterisation.
    pub fn sweep_modes() -> [RadioMode; 6] {
        [
            Self::BLE_FIXED_3DBM,
            Self::BLE_ADAPTIVE,
            RadioMode::Wifi {
                band: Band::Ghz2_4,
                role: Role::Sta,
            },
            RadioMode::Wifi {
                band: Band::Ghz2_4,
                role: Role::Ap,
            },
            RadioMode::Wifi {
                band: Band::Ghz5,
                role: Role::Sta,
            },
            RadioMode::Wifi {
                band: Band::Ghz5,
                role: Role::Ap,
            },
        ]
    }

    pub fn protocol(&self) -> Protocol {
        match self {
            RadioMode::Ble { .. } => Protocol::Ble,
            RadioMode::Wifi { .. } => Protocol::Wifi,
        }
    }

    pub fn label(&self) -> String {
        match self {
            RadioMode::Ble {
                policy: BlePolicy::Fixed { txp_dbm },
                ..
            } => {
                format!("ble_fixed_{txp_dbm}dbm")
            }
            RadioMode::Ble {
                policy: BlePolicy::Adaptive,
                ..
            } => "ble_adaptive".into(),
            RadioMode::Wifi { band, role } => format!(
                "wifi_{}_{}",
                match band {
                    Band::Ghz2_4 => "2g4",
                    Band::Ghz5 => "5g",
                },
                match role {
                    Role::Sta => "sta",
                    Role::Ap => "ap",
                }
            ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let RadioMode::Ble {
            policy: BlePolicy::Fixed { txp_dbm },
            fem,
        } = *self
        {
            let max = if fem { BLE_FEM_MAX_TXP_DBM } else { BLE_SOC_MAX_TXP_DBM };
            if !(BLE_MIN_TXP_DBM..=max).contains(&txp_dbm) {
                return Err(Error::config(
                    "ble.txp_dbm",
                    format!("{txp_dbm} dBm outside [{BLE_MIN_TXP_DBM}, {max}] (fem={fem})"),
                ));
            }
        }
        Ok(())
    }
}

/// Logistic throughput curve `t_max / (1 + exp(-(rssi - r0) / k))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputCurve {
    pub t_max_kbps: f64,
    pub r0_dbm: f64,
    pub k_db: f64,
}

impl ThroughputCurve {
    /// Fitted through (-55 dBm, 800 kbps) and (-58.9 dBm, 16 kbps), t_max 1000.
    pub fn ble() -> Self {
        ThroughputCurve::fit_two_points(1000.0, (-55.0, 800.0), (-58.9, 16.0)).expect("anchors are consistent")
    }

    pub fn wifi() -> Self {
        ThroughputCurve {
            t_max_kbps: 8000.0,
            r0_dbm: -80.0,
            k_db: Self::ble().k_db,
        }
    }

    /// Solves for `r0`, `k` so the curve passes through two `(rssi, kbps)` points.
    pub fn fit_two_points(t_max_kbps: f64, a: (f64, f64), b: (f64, f64)) -> Result<Self> {
        for &(_, t) in [&a, &b] {
            if !(t > 0.0 && t < t_max_kbps) {
                return Err(Error::param("anchor", format!("{t} kbps outside (0, t_max)")));
            }
        }
        // logit(T / t_max) = (r - r0) / k
        let la = (a.1 / (t_max_kbps - a.1)).ln();
        let lb = (b.1 / (t_max_kbps - b.1)).ln();
        if a.0 == b.0 || (la - lb) * (a.0 - b.0) <= 0.0 {
            return Err(Error::param("anchor", "anchors must be strictly increasing"));
        }
        let k_db = (a.0 - b.0) / (la - lb);
        Ok(ThroughputCurve {
            t_max_kbps,
            r0_dbm: a.0 - la * k_db,
            k_db,
        })
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if !(self.t_max_kbps > 0.0) || !(self.k_db > 0.0) || !self.r0_dbm.is_finite() {
            return Err(Error::config(field, "requires t_max_kbps > 0, k_db > 0, finite r0_dbm"));
        }
        Ok(())
    }

    /// RSSI at which the curve delivers `kbps`.
    pub fn rssi_for(&self, kbps: f64) -> Option<f64> {
        if !(kbps > 0.0 && kbps < self.t_max_kbps) {
            return None;
        }
        Some(self.r0_dbm + self.k_db * (kbps / (self.t_max_kbps - kbps)).ln())
    }
}

/// Achieved throughput at `rssi_dbm`; strictly increasing, bounded by t_max.
pub fn throughput_from_rssi(curve: &ThroughputCurve, rssi_dbm: f64) -> f64 {
    curve.t_max_kbps / (1.0 + (-(rssi_dbm - curve.r0_dbm) / curve.k_db).exp())
}

/// Flow-level goodput in bytes per second, capped at the curve maximum.
pub fn steady_goodput(curve: &ThroughputCurve, kbps: f64) -> f64 {
    kbps.clamp(0.0, curve.t_max_kbps) * 1000.0 / 8.0
}

/// Radio activity fraction.
pub fn duty_cycle(achieved_kbps: f64, t_max_kbps: f64) -> Result<f64> {
    if !(t_max_kbps > 0.0) {
        return Err(Error::param("t_max_kbps", "must be positive"));
    }
    if !(0.0..=t_max_kbps).contains(&achieved_kbps) {
        return Err(Error::param(
            "achieved_kbps",
            format!("{achieved_kbps} outside [0, {t_max_kbps}]"),
        ));
    }
    Ok(achieved_kbps / t_max_kbps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerState {
    Standby,
    Streaming,
}

/// Power parameters of one radio mode, in mW.
///
/// `power_draw` gives the draw of the chip that owns the radio (SoC for BLE,
/// companion for Wi-Fi). While the mode streams, the other chip draws
/// `companion_idle_mw` (BLE: idle Wi-Fi companion) or `host_mw` (Wi-Fi: SoC
/// driving the companion over QSPI).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub standby_mw: f64,
    #[serde(default)]
    pub companion_idle_mw: f64,
    #[serde(default)]
    pub host_mw: f64,
    pub active_base_mw: f64,
    pub active_tx_delta_mw: f64,
    #[serde(default)]
    pub fem_mw_per_dbm: f64,
    #[serde(default)]
    pub tpc_mw_per_db: f64,
}

impl PowerModel {
    pub fn ble() -> Self {
        PowerModel {
            standby_mw: 2.0,
            companion_idle_mw: 3.3,
            host_mw: 0.0,
            active_base_mw: 12.0,
            active_tx_delta_mw: 15.0,
            fem_mw_per_dbm: 4.5,
            tpc_mw_per_db: 0.0,
        }
    }

    /// Wi-Fi mode with the given standby draw.
    pub fn wifi(standby_mw: f64) -> Self {
        PowerModel {
            standby_mw,
            companion_idle_mw: 0.0,
            host_mw: 24.0,
            active_base_mw: 250.0,
            active_tx_delta_mw: 26.0,
            fem_mw_per_dbm: 0.0,
            tpc_mw_per_db: 2.5,
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        let all = [
            self.standby_mw,
            self.companion_idle_mw,
            self.host_mw,
            self.active_base_mw,
            self.active_tx_delta_mw,
            self.fem_mw_per_dbm,
            self.tpc_mw_per_db,
        ];
        if all.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::config(field, "all power fields must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Draw of the radio-owning chip.
pub fn power_draw(model: &PowerModel, state: PowerState, duty: f64, txp_dbm: f64, compensated_db: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&duty) {
        return Err(Error::param("duty", format!("{duty} outside [0, 1]")));
    }
    Ok(match state {
        PowerState::Standby => model.standby_mw,
        PowerState::Streaming => {
            model.active_base_mw
                + duty * model.active_tx_delta_mw
                + model.fem_mw_per_dbm * (txp_dbm - BLE_SOC_MAX_TXP_DBM).max(0.0)
                + model.tpc_mw_per_db * compensated_db.max(0.0)
        }
    })
}

/// Handover drain rates and per-direction switch overheads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationSet {
    pub drain_rate_ble_kbps: f64,
    pub drain_rate_wifi_kbps: f64,
    pub switch_overhead_ble_to_wifi_ms: f64,
    pub switch_overhead_wifi_to_ble_ms: f64,
}

impl Default for CalibrationSet {
    fn default() -> Self {
        // rates chosen so a 1024-byte KB drains in 9.29 ms (BLE) and 0.91 ms (Wi-Fi)
        CalibrationSet {
            drain_rate_ble_kbps: KB_BYTES * 8.0 / 9.29,
            drain_rate_wifi_kbps: KB_BYTES * 8.0 / 0.91,
            switch_overhead_ble_to_wifi_ms: 0.0,
            switch_overhead_wifi_to_ble_ms: 5.0,
        }
    }
}

impl CalibrationSet {
    pub fn validate(&self) -> Result<()> {
        if !(self.drain_rate_ble_kbps > 0.0) {
            return Err(Error::config("calibration.drain_rate_ble_kbps", "must be > 0"));
        }
        if !(self.drain_rate_wifi_kbps > 0.0) {
            return Err(Error::config("calibration.drain_rate_wifi_kbps", "must be > 0"));
        }
        if !(self.switch_overhead_ble_to_wifi_ms >= 0.0) {
            return Err(Error::config(
                "calibration.switch_overhead_ble_to_wifi_ms",
                "must be >= 0",
            ));
        }
        if !(self.switch_overhead_wifi_to_ble_ms >= 0.0) {
            return Err(Error::config(
                "calibration.switch_overhead_wifi_to_ble_ms",
                "must be >= 0",
            ));
        }
        Ok(())
    }

    /// Drain rate of the protocol that finishes the in-flight frame.
    pub fn drain_rate_kbps(&self, departing: Protocol) -> f64 {
        match departing {
            Protocol::Ble => self.drain_rate_ble_kbps,
            Protocol::Wifi => self.drain_rate_wifi_kbps,
        }
    }

    pub fn drain_bytes_per_sec(&self, departing: Protocol) -> f64 {
        self.drain_rate_kbps(departing) * 1000.0 / 8.0
    }

    pub fn overhead_ms(&self, dir: Direction) -> f64 {
        match dir {
            Direction::BleToWifi => self.switch_overhead_ble_to_wifi_ms,
            Direction::WifiToBle => self.switch_overhead_wifi_to_ble_ms,
        }
    }

    /// Milliseconds to drain one KB over the departing protocol.
    pub fn ms_per_kb(&self, departing: Protocol) -> f64 {
        KB_BYTES * 8.0 / self.drain_rate_kbps(departing)
    }
}

/// Named channel profiles for every radio configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelSet {
    pub ble: ChannelProfile,
    pub ble_fem: ChannelProfile,
    pub wifi_2g4: ChannelProfile,
    pub wifi_5g: ChannelProfile,
}

impl Default for ChannelSet {
    fn default() -> Self {
        ChannelSet {
            ble: ChannelProfile::ble(),
            ble_fem: ChannelProfile::ble_fem(),
            wifi_2g4: ChannelProfile::wifi_2g4(),
            wifi_5g: ChannelProfile::wifi_5g(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurveSet {
    pub ble: ThroughputCurve,
    pub wifi_2g4: ThroughputCurve,
    pub wifi_5g: ThroughputCurve,
}

impl Default for CurveSet {
    fn default() -> Self {
        CurveSet {
            ble: ThroughputCurve::ble(),
            wifi_2g4: ThroughputCurve::wifi(),
            wifi_5g: ThroughputCurve::wifi(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerSet {
    pub ble: PowerModel,
    pub wifi_2g4_sta: PowerModel,
    pub wifi_5g_sta: PowerModel,
    pub wifi_2g4_ap: PowerModel,
    pub wifi_5g_ap: PowerModel,
}

impl Default for PowerSet {
    fn default() -> Self {
        // standby values are the measured per-mode averages
        PowerSet {
            ble: PowerModel::ble(),
            wifi_2g4_sta: PowerModel::wifi(25.01),
            wifi_5g_sta: PowerModel::wifi(23.03),
            wifi_2g4_ap: PowerModel::wifi(218.10),
            wifi_5g_ap: PowerModel::wifi(221.36),
        }
    }
}

/// The `calibration.default` profile: every model a simulation resolves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkLibrary {
    pub channels: ChannelSet,
    pub curves: CurveSet,
    pub power: PowerSet,
    /// Wi-Fi TXP is stack-controlled; this is the nominal level used for RSSI.
    pub wifi_txp_dbm: f64,
}

impl Default for LinkLibrary {
    fn default() -> Self {
        LinkLibrary {
            channels: ChannelSet::default(),
            curves: CurveSet::default(),
            power: PowerSet::default(),
            wifi_txp_dbm: 15.0,
        }
    }
}

/// Instantaneous draw of both chips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChipPower {
    pub soc_mw: f64,
    pub companion_mw: f64,
}

impl ChipPower {
    pub fn total(&self) -> f64 {
        self.soc_mw + self.companion_mw
    }
}

/// Steady state of one mode at a fixed depth and TXP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    pub rssi_dbm: f64,
    pub throughput_kbps: f64,
    pub power: ChipPower,
}

/// Allowed ratio band of Wi-Fi to BLE streaming power at depth 0.
pub const WIFI_BLE_POWER_RATIO_BAND: (f64, f64) = (8.0, 12.0);

impl LinkLibrary {
    pub fn channel(&self, mode: &RadioMode) -> &ChannelProfile {
        match mode {
            RadioMode::Ble { fem: false, .. } => &self.channels.ble,
            RadioMode::Ble { fem: true, .. } => &self.channels.ble_fem,
            RadioMode::Wifi { band: Band::Ghz2_4, .. } => &self.channels.wifi_2g4,
            RadioMode::Wifi { band: Band::Ghz5, .. } => &self.channels.wifi_5g,
        }
    }

    pub fn curve(&self, mode: &RadioMode) -> &ThroughputCurve {
        match mode {
            RadioMode::Ble { .. } => &self.curves.ble,
            RadioMode::Wifi { band: Band::Ghz2_4, .. } => &self.curves.wifi_2g4,
            RadioMode::Wifi { band: Band::Ghz5, .. } => &self.curves.wifi_5g,
        }
    }

    pub fn power(&self, mode: &RadioMode) -> &PowerModel {
        match mode {
            RadioMode::Ble { .. } => &self.power.ble,
            RadioMode::Wifi {
                band: Band::Ghz2_4,
                role: Role::Sta,
            } => &self.power.wifi_2g4_sta,
            RadioMode::Wifi {
                band: Band::Ghz5,
                role: Role::Sta,
            } => &self.power.wifi_5g_sta,
            RadioMode::Wifi {
                band: Band::Ghz2_4,
                role: Role::Ap,
            } => &self.power.wifi_2g4_ap,
            RadioMode::Wifi {
                band: Band::Ghz5,
                role: Role::Ap,
            } => &self.power.wifi_5g_ap,
        }
    }

    /// Draw of both chips while `mode` streams at `transfer_kbps` (the actual
    /// byte rate on air, which sets the duty cycle).
    pub fn streaming_power(
        &self,
        ble: &RadioMode,
        wifi: &RadioMode,
        active: Protocol,
        txp_dbm: f64,
        depth_cm: f64,
        transfer_kbps: f64,
    ) -> Result<ChipPower> {
        let mode = match active {
            Protocol::Ble => ble,
            Protocol::Wifi => wifi,
        };
        let curve = self.curve(mode);
        let duty = duty_cycle(transfer_kbps.clamp(0.0, curve.t_max_kbps), curve.t_max_kbps)?;
        let model = self.power(mode);
        match active {
            Protocol::Ble => {
                let soc = power_draw(model, PowerState::Streaming, duty, txp_dbm, 0.0)?;
                Ok(ChipPower {
                    soc_mw: soc,
                    companion_mw: model.companion_idle_mw,
                })
            }
            Protocol::Wifi => {
                let comp = self.channel(mode).depth_loss_db(depth_cm);
                let companion = power_draw(model, PowerState::Streaming, duty, txp_dbm, comp)?;
                Ok(ChipPower {
                    soc_mw: model.host_mw,
                    companion_mw: companion,
                })
            }
        }
    }

    /// Both stacks initialised, neither streaming.
    pub fn standby_power(&self, ble: &RadioMode, wifi: &RadioMode) -> ChipPower {
        ChipPower {
            soc_mw: self.power(ble).standby_mw,
            companion_mw: self.power(wifi).standby_mw,
        }
    }

    /// Noise-free steady state of a mode at `depth_cm` with `txp_dbm`.
    pub fn steady_state(
        &self,
        mode: &RadioMode,
        partner: &RadioMode,
        txp_dbm: f64,
        depth_cm: f64,
    ) -> Result<LinkState> {
        let rssi = self.channel(mode).mean_rssi(txp_dbm, depth_cm);
        let kbps = throughput_from_rssi(self.curve(mode), rssi);
        let (ble, wifi) = match mode.protocol() {
            Protocol::Ble => (mode, partner),
            Protocol::Wifi => (partner, mode),
        };
        let power = self.streaming_power(ble, wifi, mode.protocol(), txp_dbm, depth_cm, kbps)?;
        Ok(LinkState {
            rssi_dbm: rssi,
            throughput_kbps: kbps,
            power,
        })
    }

    /// Streaming-power ratio Wi-Fi 2.4 GHz STA / BLE fixed 3 dBm at depth 0.
    pub fn wifi_ble_power_ratio(&self) -> Result<f64> {
        let wifi = RadioMode::WIFI_2G4_STA;
        let ble = RadioMode::BLE_FIXED_3DBM;
        let w = self.steady_state(&wifi, &ble, self.wifi_txp_dbm, 0.0)?;
        let b = self.steady_state(&ble, &wifi, 3.0, 0.0)?;
        Ok(w.power.total() / b.power.total())
    }

    pub fn validate(&self) -> Result<()> {
        for ch in [
            &self.channels.ble,
            &self.channels.ble_fem,
            &self.channels.wifi_2g4,
            &self.channels.wifi_5g,
        ] {
            ch.validate()?;
        }
        self.curves.ble.validate("library.curves.ble")?;
        self.curves.wifi_2g4.validate("library.curves.wifi_2g4")?;
        self.curves.wifi_5g.validate("library.curves.wifi_5g")?;
        self.power.ble.validate("library.power.ble")?;
        self.power.wifi_2g4_sta.validate("library.power.wifi_2g4_sta")?;
        self.power.wifi_5g_sta.validate("library.power.wifi_5g_sta")?;
        self.power.wifi_2g4_ap.validate("library.power.wifi_2g4_ap")?;
        self.power.wifi_5g_ap.validate("library.power.wifi_5g_ap")?;
        let ratio = self.wifi_ble_power_ratio()?;
        let (lo, hi) = WIFI_BLE_POWER_RATIO_BAND;
        if !(lo..=hi).contains(&ratio) {
            return Err(Error::config(
                "library.power",
                format!("Wi-Fi/BLE streaming power ratio at depth 0 is {ratio:.2}, expected [{lo}, {hi}]"),
            ));
        }
        Ok(())
    }
}
