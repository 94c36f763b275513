//! Tissue-attenuation channel: linear RSSI loss with immersion depth.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::SimTime;

/// Deepest calibrated immersion depth; deeper values are extrapolation.
pub const CALIBRATED_MAX_DEPTH_CM: f64 = 10.0;

/// Linear attenuation model for one protocol/band.
///
/// `rssi = txp - baseline_loss_db + slope_db_per_cm * depth (+ noise)`.
/// `baseline_loss_db` is a calibration constant: it folds the 1 m air gap
/// and antenna/front-end losses into the depth-0 loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    pub label: String,
    pub slope_db_per_cm: f64,
    pub baseline_loss_db: f64,
    #[serde(default)]
    pub noise_sigma_db: f64,
}

impl ChannelProfile {
    pub fn new(label: impl Into<String>, slope_db_per_cm: f64, baseline_loss_db: f64) -> Self {
        ChannelProfile {
            label: label.into(),
            slope_db_per_cm,
            baseline_loss_db,
            noise_sigma_db: 0.0,
        }
    }

    /// BLE with the bare SoC at fixed TXP.
    pub fn ble() -> Self {
        Self::new("ble", -1.89, 43.0)
    }

    /// BLE through the external front-end module (adaptive TXP runs).
    pub fn ble_fem() -> Self {
        Self::new("ble_fem", -1.89, 54.0)
    }

    pub fn wifi_2g4() -> Self {
        Self::new("wifi_2g4", -2.8, 60.0)
    }

    pub fn wifi_5g() -> Self {
        Self::new("wifi_5g", -4.1, 60.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.slope_db_per_cm < 0.0) {
            return Err(Error::config(
                format!("channel.{}.slope_db_per_cm", self.label),
                "must be negative",
            ));
        }
        if !(self.baseline_loss_db > 0.0) {
            return Err(Error::config(
                format!("channel.{}.baseline_loss_db", self.label),
                "must be positive",
            ));
        }
        if !(self.noise_sigma_db >= 0.0) {
            return Err(Error::config(
                format!("channel.{}.noise_sigma_db", self.label),
                "must be >= 0",
            ));
        }
        Ok(())
    }

    /// Noise-free RSSI.
    pub fn mean_rssi(&self, txp_dbm: f64, depth_cm: f64) -> f64 {
        txp_dbm - self.baseline_loss_db + self.slope_db_per_cm * depth_cm
    }

    /// Attenuation relative to depth 0, in dB (positive).
    pub fn depth_loss_db(&self, depth_cm: f64) -> f64 {
        (-self.slope_db_per_cm * depth_cm).max(0.0)
    }
}

/// Received signal strength for a transmitter at `txp_dbm` immersed `depth_cm`.
///
/// The random stream is only drawn from when `noise_sigma_db > 0`.
pub fn rssi_at<R: Rng + ?Sized>(txp_dbm: f64, depth_cm: f64, profile: &ChannelProfile, rng: &mut R) -> Result<f64> {
    if !(depth_cm >= 0.0) {
        return Err(Error::param("depth_cm", format!("{depth_cm} is negative")));
    }
    let mean = profile.mean_rssi(txp_dbm, depth_cm);
    if profile.noise_sigma_db > 0.0 {
        let n = Normal::new(0.0, profile.noise_sigma_db).map_err(|e| Error::param("noise_sigma_db", e.to_string()))?;
        Ok(mean + n.sample(rng))
    } else {
        Ok(mean)
    }
}

/// Piecewise-constant immersion depth over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct DepthProfile {
    segments: Vec<(SimTime, f64)>,
}

impl DepthProfile {
    pub fn new(segments: Vec<(SimTime, f64)>) -> Result<Self> {
        let Some(first) = segments.first() else {
            return Err(Error::config("depth_profile", "must not be empty"));
        };
        if first.0 != SimTime::ZERO {
            return Err(Error::config("depth_profile", "first segment must start at t=0"));
        }
        for w in segments.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::config(
                    "depth_profile",
                    "segment starts must be strictly increasing",
                ));
            }
        }
        if let Some((_, d)) = segments.iter().find(|(_, d)| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::config(
                "depth_profile",
                format!("depth {d} cm is not a finite non-negative value"),
            ));
        }
        Ok(DepthProfile { segments })
    }

    pub fn constant(depth_cm: f64) -> Self {
        DepthProfile::new(vec![(SimTime::ZERO, depth_cm)]).expect("valid constant profile")
    }

    /// Equal-dwell staircase over `depths`.
    pub fn staircase(depths: &[f64], dwell: SimTime) -> Result<Self> {
        DepthProfile::new(
            depths
                .iter()
                .enumerate()
                .map(|(i, &d)| (SimTime(dwell.0 * i as u64), d))
                .collect(),
        )
    }

    pub fn segments(&self) -> &[(SimTime, f64)] {
        &self.segments
    }

    /// True when some segment lies outside the calibrated 0–10 cm range.
    pub fn is_extrapolated(&self) -> bool {
        self.segments.iter().any(|&(_, d)| d > CALIBRATED_MAX_DEPTH_CM)
    }
}

impl TryFrom<Vec<(f64, f64)>> for DepthProfile {
    type Error = Error;

    /// From `[t_ms, depth_cm]` pairs.
    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        let mut segs = Vec::with_capacity(v.len());
        for (t_ms, d) in v {
            if !(t_ms >= 0.0) {
                return Err(Error::config("depth_profile", "segment start must be >= 0"));
            }
            segs.push((SimTime::from_millis_f64(t_ms), d));
        }
        DepthProfile::new(segs)
    }
}

impl From<DepthProfile> for Vec<(f64, f64)> {
    fn from(p: DepthProfile) -> Self {
        p.segments.into_iter().map(|(t, d)| (t.as_millis_f64(), d)).collect()
    }
}

/// Depth of the last segment starting at or before `t`.
pub fn depth_at(t: SimTime, profile: &DepthProfile) -> f64 {
    let idx = profile.segments.partition_point(|&(start, _)| start <= t);
    // first segment starts at 0, so idx >= 1
    profile.segments[idx.saturating_sub(1)].1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::seeded_rng;
    use crate::stats::fit_line;

    #[test]
    fn ble_depth_zero_and_ten() {
        let p = ChannelProfile::ble();
        let mut rng = seeded_rng(0);
        assert_eq!(rssi_at(3.0, 0.0, &p, &mut rng).unwrap(), -40.0);
        let r10 = rssi_at(3.0, 10.0, &p, &mut rng).unwrap();
        assert!((r10 - -58.9).abs() < 1e-12);
    }

    #[test]
    fn five_ghz_is_13_db_below_2g4_at_10cm() {
        let mut rng = seeded_rng(0);
        let a = rssi_at(15.0, 10.0, &ChannelProfile::wifi_2g4(), &mut rng).unwrap();
        let b = rssi_at(15.0, 10.0, &ChannelProfile::wifi_5g(), &mut rng).unwrap();
        assert!(((a - b) - 13.0).abs() < 1e-9);
    }

    #[test]
    fn negative_depth_rejected() {
        let mut rng = seeded_rng(0);
        assert!(rssi_at(0.0, -0.1, &ChannelProfile::ble(), &mut rng).is_err());
    }

    #[test]
    fn noiseless_rssi_does_not_touch_rng() {
        use rand::RngCore;
        let mut a = seeded_rng(9);
        let mut b = seeded_rng(9);
        rssi_at(3.0, 4.0, &ChannelProfile::ble(), &mut a).unwrap();
        assert_eq!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn noisy_rssi_is_seeded() {
        let mut p = ChannelProfile::ble();
        p.noise_sigma_db = 1.0;
        let draw = |seed| {
            let mut r = seeded_rng(seed);
            (0..10)
                .map(|_| rssi_at(3.0, 2.0, &p, &mut r).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }

    #[test]
    fn profile_invariants() {
        assert!(ChannelProfile::new("x", 0.5, 40.0).validate().is_err());
        assert!(ChannelProfile::new("x", -1.0, 0.0).validate().is_err());
        assert!(ChannelProfile::ble().validate().is_ok());
    }

    #[test]
    fn depth_hold_semantics() {
        let p = DepthProfile::new(vec![(SimTime::ZERO, 0.0), (SimTime::from_secs(10), 6.0)]).unwrap();
        assert_eq!(depth_at(SimTime::from_secs(5), &p), 0.0);
        assert_eq!(depth_at(SimTime::from_secs(10), &p), 6.0);
        assert_eq!(depth_at(SimTime::from_secs(1000), &p), 6.0);
    }

    #[test]
    fn depth_profile_validation() {
        assert!(DepthProfile::new(vec![]).is_err());
        assert!(DepthProfile::new(vec![(SimTime(5), 1.0)]).is_err());
        assert!(DepthProfile::new(vec![(SimTime(0), 1.0), (SimTime(0), 2.0)]).is_err());
        assert!(DepthProfile::new(vec![(SimTime(0), -1.0)]).is_err());
        assert!(DepthProfile::constant(12.0).is_extrapolated());
        assert!(!DepthProfile::constant(10.0).is_extrapolated());
    }

    #[test]
    fn depth_profile_json_is_ms_pairs() {
        let p: DepthProfile = serde_json::from_str("[[0, 0.0], [10000, 6.0]]").unwrap();
        assert_eq!(p.segments()[1], (SimTime::from_secs(10), 6.0));
        assert_eq!(serde_json::to_string(&p).unwrap(), "[[0.0,0.0],[10000.0,6.0]]");
    }

    #[test]
    fn regression_recovers_configured_slopes() {
        let mut rng = seeded_rng(0);
        for p in [
            ChannelProfile::ble(),
            ChannelProfile::wifi_2g4(),
            ChannelProfile::wifi_5g(),
        ] {
            let pts: Vec<(f64, f64)> = [0.0, 2.0, 4.0, 6.0, 8.0, 10.0]
                .iter()
                .map(|&d| (d, rssi_at(10.0, d, &p, &mut rng).unwrap()))
                .collect();
            let fit = fit_line(&pts).unwrap();
            assert!((fit.slope - p.slope_db_per_cm).abs() < 1e-6, "{}", p.label);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn linear_in_depth(d1 in 0.0f64..20.0, d2 in 0.0f64..20.0, txp in -20.0f64..20.0) {
                let p = ChannelProfile::ble();
                let mut rng = seeded_rng(0);
                let r1 = rssi_at(txp, d1, &p, &mut rng).unwrap();
                let r2 = rssi_at(txp, d2, &p, &mut rng).unwrap();
                prop_assert!(((r2 - r1) - p.slope_db_per_cm * (d2 - d1)).abs() < 1e-9);
            }

            #[test]
            fn unit_slope_in_txp(t1 in -20.0f64..20.0, t2 in -20.0f64..20.0, d in 0.0f64..10.0) {
                let p = ChannelProfile::wifi_5g();
                let mut rng = seeded_rng(0);
                let r1 = rssi_at(t1, d, &p, &mut rng).unwrap();
                let r2 = rssi_at(t2, d, &p, &mut rng).unwrap();
                prop_assert!(((r2 - r1) - (t2 - t1)).abs() < 1e-9);
            }
        }
    }
}
