//! Run summary, derived from trace rows alone so that it can be re-checked
//! from the CSV.

use serde::{Deserialize, Serialize};

use crate::energy::{energy_report, EnergyReport, PowerSample, PowerTrace};
use crate::error::{Error, Result};
use crate::radio::Protocol;
use crate::trace::{TraceEvent, TraceRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchRecord {
    pub from: Protocol,
    pub to: Protocol,
    pub requested_at_ms: f64,
    pub completed_at_ms: f64,
    pub latency_ms: f64,
    pub residual_bytes: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FpsSummary {
    pub ble: Option<f64>,
    pub wifi: Option<f64>,
}

impl FpsSummary {
    pub fn get(&self, p: Protocol) -> Option<f64> {
        match p {
            Protocol::Ble => self.ble,
            Protocol::Wifi => self.wifi,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Slopes {
    pub ble_to_wifi: Option<f64>,
    pub wifi_to_ble: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameCounts {
    pub emitted: u64,
    pub delivered: u64,
    pub integrity_errors: u64,
    pub mid_frame_switches: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub duration_ms: f64,
    pub switch_events: Vec<SwitchRecord>,
    pub fps: FpsSummary,
    pub energy_mj: EnergyReport,
    pub slopes_ms_per_kb: Slopes,
    pub frames: FrameCounts,
    pub integrity: Verdict,
}

impl RunSummary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Trace(format!("summary: {e}")))
    }

    pub fn passed(&self) -> bool {
        self.integrity == Verdict::Pass
    }
}

/// Recomputes the summary from trace rows.
pub fn summarize(rows: &[TraceRow]) -> Result<RunSummary> {
    let mut power = PowerTrace::new();
    let mut counts = FrameCounts::default();
    let mut switches = Vec::new();
    let mut pending: Option<(Protocol, Protocol, f64, u64)> = None;
    let mut in_flight: Option<u64> = None;
    // last completion and whether nothing switch-related happened since
    let mut last_done: Option<(f64, Protocol, bool)> = None;
    let mut intervals = [(0u64, 0.0f64); 2];

    for row in rows {
        power
            .push(PowerSample {
                t: row.time(),
                soc_mw: row.soc_mw,
                companion_mw: row.companion_mw,
                phase: row.phase(),
            })
            .map_err(|e| Error::Trace(e.to_string()))?;
        for ev in row.events()? {
            if ev.is_switch_activity() {
                if let Some(d) = last_done.as_mut() {
                    d.2 = false;
                }
            }
            match ev {
                TraceEvent::FrameStart { id } => {
                    counts.emitted += 1;
                    in_flight = Some(id);
                }
                TraceEvent::FrameComplete { id, protocol } => {
                    counts.delivered += 1;
                    if in_flight == Some(id) {
                        in_flight = None;
                    }
                    if let Some((t0, p0, true)) = last_done {
                        if p0 == protocol {
                            let slot = &mut intervals[protocol as usize];
                            slot.0 += 1;
                            slot.1 += row.t_ms - t0;
                        }
                    }
                    last_done = Some((row.t_ms, protocol, true));
                }
                TraceEvent::IntegrityError { id } => {
                    counts.integrity_errors += 1;
                    if in_flight == Some(id) {
                        in_flight = None;
                    }
                    last_done = None;
                }
                TraceEvent::SwitchRequest { from, to, residual } => {
                    pending = Some((from, to, row.t_ms, residual));
                }
                TraceEvent::SwitchCancel => pending = None,
                TraceEvent::SwitchComplete { from, to } => {
                    let (pf, pt, req, residual) = pending.take().ok_or_else(|| {
                        Error::Trace(format!("switch completes at {} ms without a request", row.t_ms))
                    })?;
                    if (pf, pt) != (from, to) {
                        return Err(Error::Trace(format!(
                            "switch at {} ms does not match its request",
                            row.t_ms
                        )));
                    }
                    if in_flight.is_some() {
                        counts.mid_frame_switches += 1;
                    }
                    switches.push(SwitchRecord {
                        from,
                        to,
                        requested_at_ms: req,
                        completed_at_ms: row.t_ms,
                        latency_ms: (row.time() - crate::sim::SimTime::from_millis_f64(req)).as_millis_f64(),
                        residual_bytes: residual,
                    });
                }
                _ => {}
            }
        }
    }

    let fps_of = |p: Protocol| {
        let (n, total_ms) = intervals[p as usize];
        (n > 0 && total_ms > 0.0).then(|| n as f64 * 1000.0 / total_ms)
    };
    let lossless = counts.delivered == counts.emitted;
    let clean = counts.integrity_errors == 0 && counts.mid_frame_switches == 0;
    Ok(RunSummary {
        duration_ms: rows.last().map_or(0.0, |r| r.t_ms),
        switch_events: switches,
        fps: FpsSummary {
            ble: fps_of(Protocol::Ble),
            wifi: fps_of(Protocol::Wifi),
        },
        energy_mj: energy_report(&power)?,
        slopes_ms_per_kb: Slopes::default(),
        frames: counts,
        integrity: if lossless && clean {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    })
}

/// Checks that `summary_json` is exactly what the rows imply.
pub fn verify(rows: &[TraceRow], summary_json: &str) -> Result<()> {
    let recomputed = summarize(rows)?;
    let stored = RunSummary::from_json(summary_json)?;
    if recomputed != stored {
        let a = recomputed.to_json();
        let b = stored.to_json();
        let line = a
            .lines()
            .zip(b.lines())
            .find(|(x, y)| x != y)
            .map(|(x, y)| format!("trace gives `{}`, summary has `{}`", x.trim(), y.trim()))
            .unwrap_or_else(|| "summaries differ in length".into());
        return Err(Error::Verify(format!("summary does not match trace: {line}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{join_events, ActiveColumn, StateColumn};

    fn row(t_ms: f64, active: ActiveColumn, state: StateColumn, soc: f64, comp: f64, evs: &[TraceEvent]) -> TraceRow {
        TraceRow {
            t_ms,
            active_protocol: active,
            handover_state: state,
            depth_cm: 0.0,
            rssi_dbm: -40.0,
            txp_dbm: 3.0,
            throughput_kbps: 0.0,
            fps: 0.0,
            soc_mw: soc,
            companion_mw: comp,
            frame_id: None,
            event: join_events(evs),
        }
    }

    use ActiveColumn as A;
    use StateColumn as S;
    use TraceEvent as E;

    fn scripted() -> Vec<TraceRow> {
        let b = Protocol::Ble;
        let w = Protocol::Wifi;
        vec![
            row(0.0, A::Ble, S::Active, 27.0, 3.3, &[E::Start, E::FrameStart { id: 0 }]),
            row(
                100.0,
                A::Ble,
                S::Active,
                27.0,
                3.3,
                &[E::FrameComplete { id: 0, protocol: b }, E::FrameStart { id: 1 }],
            ),
            row(
                200.0,
                A::Ble,
                S::Active,
                27.0,
                3.3,
                &[E::FrameComplete { id: 1, protocol: b }, E::FrameStart { id: 2 }],
            ),
            row(
                200.0,
                A::Ble,
                S::Pending,
                25.0,
                3.3,
                &[E::SwitchRequest {
                    from: b,
                    to: w,
                    residual: 1000,
                }],
            ),
            row(
                300.0,
                A::Wifi,
                S::Active,
                24.0,
                270.0,
                &[
                    E::FrameComplete { id: 2, protocol: b },
                    E::SwitchBoundary,
                    E::SwitchComplete { from: b, to: w },
                    E::FrameStart { id: 3 },
                ],
            ),
            row(
                310.0,
                A::Wifi,
                S::Active,
                24.0,
                270.0,
                &[E::FrameComplete { id: 3, protocol: w }, E::FrameStart { id: 4 }],
            ),
            row(
                320.0,
                A::Wifi,
                S::Active,
                24.0,
                270.0,
                &[E::FrameComplete { id: 4, protocol: w }, E::End],
            ),
        ]
    }

    #[test]
    fn scripted_run() {
        let s = summarize(&scripted()).unwrap();
        assert_eq!(
            s.frames,
            FrameCounts {
                emitted: 5,
                delivered: 5,
                integrity_errors: 0,
                mid_frame_switches: 0
            }
        );
        assert_eq!(s.integrity, Verdict::Pass);
        assert_eq!(s.switch_events.len(), 1);
        let sw = &s.switch_events[0];
        assert_eq!((sw.latency_ms, sw.residual_bytes), (100.0, 1000));
        // BLE: one clean 100 ms interval; the drained frame is excluded
        assert_eq!(s.fps.ble, Some(10.0));
        // Wi-Fi: 300->310 is the first Wi-Fi completion after a switch, 310->320 is clean
        assert_eq!(s.fps.wifi, Some(100.0));
        // energy: 200 ms at 30.3, 100 ms pending at 28.3, 20 ms at 294
        let want = 0.2 * 30.3 + 0.1 * 28.3 + 0.02 * 294.0;
        assert!((s.energy_mj.total - want).abs() < 1e-9);
        assert!((s.energy_mj.pending - 0.1 * 28.3).abs() < 1e-9);
    }

    #[test]
    fn lost_frame_fails() {
        let mut rows = scripted();
        rows.pop();
        rows.push(row(
            320.0,
            A::Wifi,
            S::Active,
            24.0,
            270.0,
            &[E::IntegrityError { id: 4 }, E::End],
        ));
        let s = summarize(&rows).unwrap();
        assert_eq!(s.integrity, Verdict::Fail);
        assert_eq!(s.frames.integrity_errors, 1);
    }

    #[test]
    fn complete_without_request_is_malformed() {
        let rows = vec![row(
            0.0,
            A::Wifi,
            S::Active,
            1.0,
            1.0,
            &[E::SwitchComplete {
                from: Protocol::Ble,
                to: Protocol::Wifi,
            }],
        )];
        assert!(summarize(&rows).is_err());
    }

    #[test]
    fn verify_detects_tampering() {
        let rows = scripted();
        let json = summarize(&rows).unwrap().to_json();
        verify(&rows, &json).unwrap();
        let tampered = json.replace("\"latency_ms\": 100.0", "\"latency_ms\": 99.0");
        assert_ne!(tampered, json);
        assert!(verify(&rows, &tampered).is_err());
    }
}
