//! Dual-chip power trace and energy integration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    BleStreaming,
    WifiStreaming,
    Pending,
    SwitchGap,
}

impl Phase {
    pub const ALL: [Phase; 4] = [
        Phase::BleStreaming,
        Phase::WifiStreaming,
        Phase::Pending,
        Phase::SwitchGap,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSample {
    pub t: SimTime,
    pub soc_mw: f64,
    pub companion_mw: f64,
    pub phase: Phase,
}

/// Append-only, strictly time-ordered power samples. Each sample holds until
/// the next one.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PowerTrace {
    samples: Vec<PowerSample>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ChipEnergy {
    pub soc_mj: f64,
    pub companion_mj: f64,
}

impl ChipEnergy {
    pub fn total(&self) -> f64 {
        self.soc_mj + self.companion_mj
    }
}

impl PowerTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn samples(&self) -> &[PowerSample] {
        &self.samples
    }

    /// Appends a sample. A sample at the same instant as the last one
    /// replaces it, so a state change sampled twice keeps the later value.
    pub fn push(&mut self, s: PowerSample) -> Result<()> {
        if !(s.soc_mw >= 0.0 && s.companion_mw >= 0.0) {
            return Err(Error::param("power", "sample power must be >= 0"));
        }
        match self.samples.last_mut() {
            Some(last) if last.t == s.t => *last = s,
            Some(last) if last.t > s.t => {
                return Err(Error::param("t", format!("sample at {} precedes {}", s.t, last.t)))
            }
            _ => self.samples.push(s),
        }
        Ok(())
    }

    pub fn span(&self) -> Option<(SimTime, SimTime)> {
        Some((self.samples.first()?.t, self.samples.last()?.t))
    }
}

/// Energy per chip over `[t0, t1]`, in mJ.
pub fn integrate(trace: &PowerTrace, t0: SimTime, t1: SimTime) -> Result<ChipEnergy> {
    integrate_where(trace, t0, t1, |_| true)
}

fn integrate_where(
    trace: &PowerTrace,
    t0: SimTime,
    t1: SimTime,
    keep: impl Fn(&PowerSample) -> bool,
) -> Result<ChipEnergy> {
    let (lo, hi) = trace.span().ok_or_else(|| Error::param("trace", "empty power trace"))?;
    if t0 > t1 || t0 < lo || t1 > hi {
        return Err(Error::param(
            "window",
            format!("[{t0}, {t1}] outside trace bounds [{lo}, {hi}]"),
        ));
    }
    let s = trace.samples();
    let mut e = ChipEnergy::default();
    for (a, b) in s.iter().zip(s.iter().skip(1)) {
        let start = a.t.max(t0);
        let end = b.t.min(t1);
        if end <= start || !keep(a) {
            continue;
        }
        // mW * us = nJ
        let dt = (end - start).as_micros() as f64 * 1e-6;
        e.soc_mj += a.soc_mw * dt;
        e.companion_mj += a.companion_mw * dt;
    }
    Ok(e)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub ble_streaming: f64,
    pub wifi_streaming: f64,
    pub pending: f64,
    pub switch_gap: f64,
    pub soc_total: f64,
    pub companion_total: f64,
    pub total: f64,
}

impl EnergyReport {
    pub fn phase(&self, p: Phase) -> f64 {
        match p {
            Phase::BleStreaming => self.ble_streaming,
            Phase::WifiStreaming => self.wifi_streaming,
            Phase::Pending => self.pending,
            Phase::SwitchGap => self.switch_gap,
        }
    }
}

/// Whole-trace energy split by phase, in mJ.
pub fn energy_report(trace: &PowerTrace) -> Result<EnergyReport> {
    let Some((lo, hi)) = trace.span() else {
        return Ok(EnergyReport::default());
    };
    let by = |p: Phase| integrate_where(trace, lo, hi, |s| s.phase == p).map(|e| e.total());
    let chips = integrate(trace, lo, hi)?;
    Ok(EnergyReport {
        ble_streaming: by(Phase::BleStreaming)?,
        wifi_streaming: by(Phase::WifiStreaming)?,
        pending: by(Phase::Pending)?,
        switch_gap: by(Phase::SwitchGap)?,
        soc_total: chips.soc_mj,
        companion_total: chips.companion_mj,
        total: chips.total(),
    })
}
