//! Closed-loop BLE transmit-power control.
//!
//! A dead-band step controller: RSSI below the band raises TXP by one step,
//! above the band lowers it, inside the band holds. TXP is clamped to
//! `[txp_min_dbm, txp_max_dbm]`; `saturated` records a clamp while the RSSI
//! is still outside the band.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radio::{BLE_FEM_MAX_TXP_DBM, BLE_MIN_TXP_DBM};
use crate::sim::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TxpController {
    /// Current TXP; the configured value is the starting point.
    pub txp_dbm: f64,
    pub txp_min_dbm: f64,
    pub txp_max_dbm: f64,
    pub step_db: f64,
    pub rssi_lo_dbm: f64,
    pub rssi_hi_dbm: f64,
    pub target_kbps: f64,
    pub update_period_ms: f64,
    #[serde(skip)]
    pub saturated: bool,
}

impl Default for TxpController {
    fn default() -> Self {
        // The band sits inside the 720–880 kbps RSSI window of the BLE curve
        // and is wider than one step, so the loop cannot limit-cycle.
        TxpController {
            txp_dbm: 3.0,
            txp_min_dbm: BLE_MIN_TXP_DBM,
            txp_max_dbm: BLE_FEM_MAX_TXP_DBM,
            step_db: 0.5,
            rssi_lo_dbm: -55.25,
            rssi_hi_dbm: -54.65,
            target_kbps: 800.0,
            update_period_ms: 100.0,
            saturated: false,
        }
    }
}

impl TxpController {
    pub fn validate(&self) -> Result<()> {
        let field = |f: &str| format!("ble.adaptive.{f}");
        if !(self.txp_min_dbm <= self.txp_max_dbm) {
            return Err(Error::config(field("txp_min_dbm"), "must be <= txp_max_dbm"));
        }
        if !(self.txp_min_dbm..=self.txp_max_dbm).contains(&self.txp_dbm) {
            return Err(Error::config(
                field("txp_dbm"),
                "initial TXP outside [txp_min, txp_max]",
            ));
        }
        if !(self.step_db > 0.0) {
            return Err(Error::config(field("step_db"), "must be > 0"));
        }
        if !(self.rssi_lo_dbm < self.rssi_hi_dbm) {
            return Err(Error::config(field("rssi_lo_dbm"), "must be < rssi_hi_dbm"));
        }
        if !(self.update_period_ms >= 0.001) {
            return Err(Error::config(field("update_period_ms"), "must be >= 1 us"));
        }
        if !(self.target_kbps > 0.0) {
            return Err(Error::config(field("target_kbps"), "must be > 0"));
        }
        Ok(())
    }

    pub fn update_period(&self) -> SimTime {
        SimTime::from_millis_f64(self.update_period_ms)
    }

    /// One control step; returns the new TXP.
    pub fn update(&mut self, measured_rssi_dbm: f64) -> f64 {
        let wanted = if measured_rssi_dbm < self.rssi_lo_dbm {
            self.txp_dbm + self.step_db
        } else if measured_rssi_dbm > self.rssi_hi_dbm {
            self.txp_dbm - self.step_db
        } else {
            self.saturated = false;
            return self.txp_dbm;
        };
        let clamped = wanted.clamp(self.txp_min_dbm, self.txp_max_dbm);
        self.saturated = clamped != wanted;
        self.txp_dbm = clamped;
        self.txp_dbm
    }

    pub fn in_band(&self, rssi_dbm: f64) -> bool {
        (self.rssi_lo_dbm..=self.rssi_hi_dbm).contains(&rssi_dbm)
    }
}

/// One observation of a closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettleSample {
    pub t: SimTime,
    pub depth_cm: f64,
    pub achieved_kbps: f64,
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DwellVerdict {
    pub depth_cm: f64,
    pub mean_kbps: f64,
    pub saturated: bool,
    pub pass: bool,
}

/// Excluded start of each dwell.
pub const SETTLING_WINDOW: SimTime = SimTime::from_secs(1);

/// Checks that every depth dwell holds `target ± tolerance` once settled.
///
/// Samples are grouped into dwells of consecutive equal depth; the first
/// `SETTLING_WINDOW` of each dwell is ignored. A dwell fails when its settled
/// mean is out of tolerance or it has no settled samples.
pub fn settle_check(samples: &[SettleSample], target_kbps: f64, tolerance: f64) -> Vec<DwellVerdict> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < samples.len() {
        let depth = samples[i].depth_cm;
        let start = samples[i].t;
        let mut j = i;
        let (mut sum, mut n, mut sat) = (0.0, 0usize, false);
        while j < samples.len() && samples[j].depth_cm == depth {
            let s = &samples[j];
            if s.t >= start + SETTLING_WINDOW {
                sum += s.achieved_kbps;
                n += 1;
                sat |= s.saturated;
            }
            j += 1;
        }
        let mean = if n > 0 { sum / n as f64 } else { f64::NAN };
        out.push(DwellVerdict {
            depth_cm: depth,
            mean_kbps: mean,
            saturated: sat,
            pass: n > 0 && (mean - target_kbps).abs() <= tolerance * target_kbps,
        });
        i = j;
    }
    out
}
