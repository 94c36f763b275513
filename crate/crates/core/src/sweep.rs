//! Experiment runners: switching latency against image size, and steady-state
//! link metrics against depth.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::DepthProfile;
use crate::engine::run_scenario;
use crate::error::{Error, Result};
use crate::radio::{steady_goodput, Direction, Protocol, RadioMode, KB_BYTES};
use crate::scenario::{Align, BleConfig, Scenario, SwitchCommand, WifiConfig};
use crate::sim::{seeded_rng, SimTime};
use crate::stats::{fit_line, mean, std_dev};
use crate::summary::Slopes;
use crate::trace::TraceRow;

pub const DEFAULT_SIZES_KB: [f64; 4] = [10.0, 20.0, 30.0, 40.0];
pub const DEFAULT_REPEATS: usize = 20;

const WARMUP_MS: f64 = 1_000.0;
const LEG_MS: f64 = 1_500.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizePoint {
    pub size_kb: f64,
    pub direction: Direction,
    pub frame_start_ms: f64,
    pub mean_ms: f64,
    pub std_ms: f64,
    /// Frame-start run first, then the randomized-phase repeats.
    pub samples_ms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSweep {
    pub repeats: usize,
    pub points: Vec<SizePoint>,
    /// Least-squares slopes through the frame-start latencies.
    pub slopes_ms_per_kb: Slopes,
    /// Least-squares slopes through the per-size means.
    pub mean_slopes_ms_per_kb: Slopes,
}

impl SizeSweep {
    pub fn point(&self, size_kb: f64, dir: Direction) -> Option<&SizePoint> {
        self.points.iter().find(|p| p.size_kb == size_kb && p.direction == dir)
    }
}

/// Two commands per run: to Wi-Fi after the warm-up, back to BLE one leg later.
fn size_run(base: &Scenario, size_bytes: u64, offsets_ms: Option<(f64, f64)>) -> Scenario {
    let t1 = WARMUP_MS;
    let t2 = WARMUP_MS + LEG_MS;
    let (align, (o1, o2)) = match offsets_ms {
        None => (Align::FrameStart, (0.0, 0.0)),
        Some(o) => (Align::Exact, o),
    };
    Scenario {
        image_size_bytes: size_bytes,
        initial_protocol: Protocol::Ble,
        switch_schedule: vec![
            SwitchCommand {
                t_ms: t1 + o1,
                target: Protocol::Wifi,
                align,
            },
            SwitchCommand {
                t_ms: t2 + o2,
                target: Protocol::Ble,
                align,
            },
        ],
        auto: None,
        duration_ms: t2 + LEG_MS,
        sample_period_ms: 0.0,
        ..base.clone()
    }
}

/// Steady frame time of `p` at the scenario's initial depth, in ms.
fn frame_time_ms(sc: &Scenario, p: Protocol, size_bytes: u64) -> f64 {
    let lib = sc.effective_library();
    let (mode, partner) = match p {
        Protocol::Ble => (sc.ble_mode(), sc.wifi_mode()),
        Protocol::Wifi => (sc.wifi_mode(), sc.ble_mode()),
    };
    let txp = match (p, sc.ble_mode()) {
        (Protocol::Wifi, _) => lib.wifi_txp_dbm,
        (
            Protocol::Ble,
            RadioMode::Ble {
                policy: crate::radio::BlePolicy::Fixed { txp_dbm },
                ..
            },
        ) => txp_dbm,
        _ => sc.ble.adaptive.txp_dbm,
    };
    let depth = sc.depth_profile.segments()[0].1;
    let kbps = lib
        .steady_state(&mode, &partner, txp, depth)
        .map(|s| s.throughput_kbps)
        .unwrap_or(0.0);
    let bps = steady_goodput(lib.curve(&mode), kbps);
    if bps > 0.0 {
        size_bytes as f64 / bps * 1000.0
    } else {
        0.0
    }
}

fn latencies(sc: &Scenario) -> Result<(f64, f64)> {
    let out = run_scenario(sc)?;
    if !out.integrity_pass() {
        return Err(Error::Integrity {
            frame_id: out.deliveries.len() as u64,
            reason: format!("size sweep run failed integrity: {:?}", out.integrity_errors),
        });
    }
    let pick = |dir: Direction| {
        out.switches
            .iter()
            .find(|s| s.direction() == dir)
            .map(|s| s.latency_ms)
            .ok_or_else(|| Error::config("switch_schedule", format!("no {} switch completed", dir.as_str())))
    };
    Ok((pick(Direction::BleToWifi)?, pick(Direction::WifiToBle)?))
}

/// Latency per size and direction: one frame-start run plus `repeats`
/// randomized-phase runs each. Runs execute in parallel; results are merged
/// in job order so output does not depend on scheduling.
pub fn sweep_image_size(base: &Scenario, sizes_kb: &[f64], repeats: usize) -> Result<SizeSweep> {
    if sizes_kb.is_empty() {
        return Err(Error::config("sizes", "must not be empty"));
    }
    if let Some(s) = sizes_kb.iter().find(|s| !(**s > 0.0)) {
        return Err(Error::config("sizes", format!("size {s} KB must be > 0")));
    }
    let mut jobs = Vec::new();
    let mut rng = seeded_rng(base.seed);
    for &kb in sizes_kb {
        let bytes = (kb * KB_BYTES).round() as u64;
        jobs.push(size_run(base, bytes, None));
        let ble_ft = frame_time_ms(base, Protocol::Ble, bytes);
        let wifi_ft = frame_time_ms(base, Protocol::Wifi, bytes);
        for r in 0..repeats {
            let o1 = rng.gen_range(0.0..ble_ft.max(1e-3));
            let o2 = rng.gen_range(0.0..wifi_ft.max(1e-3));
            let mut sc = size_run(base, bytes, Some((o1, o2)));
            sc.seed = base.seed.wrapping_add(1 + r as u64);
            jobs.push(sc);
        }
    }
    let results: Vec<(f64, f64)> = jobs.par_iter().map(latencies).collect::<Result<_>>()?;

    let mut points = Vec::new();
    for (i, &kb) in sizes_kb.iter().enumerate() {
        let chunk = &results[i * (repeats + 1)..(i + 1) * (repeats + 1)];
        for dir in [Direction::BleToWifi, Direction::WifiToBle] {
            let samples: Vec<f64> = chunk
                .iter()
                .map(|&(up, down)| if dir == Direction::BleToWifi { up } else { down })
                .collect();
            points.push(SizePoint {
                size_kb: kb,
                direction: dir,
                frame_start_ms: samples[0],
                mean_ms: mean(&samples),
                std_ms: std_dev(&samples),
                samples_ms: samples,
            });
        }
    }
    let slope = |dir: Direction, f: fn(&SizePoint) -> f64| {
        let pts: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| p.direction == dir)
            .map(|p| (p.size_kb, f(p)))
            .collect();
        fit_line(&pts).map(|l| l.slope)
    };
    Ok(SizeSweep {
        repeats,
        slopes_ms_per_kb: Slopes {
            ble_to_wifi: slope(Direction::BleToWifi, |p| p.frame_start_ms),
            wifi_to_ble: slope(Direction::WifiToBle, |p| p.frame_start_ms),
        },
        mean_slopes_ms_per_kb: Slopes {
            ble_to_wifi: slope(Direction::BleToWifi, |p| p.mean_ms),
            wifi_to_ble: slope(Direction::WifiToBle, |p| p.mean_ms),
        },
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthPoint {
    pub mode: String,
    pub depth_cm: f64,
    pub throughput_kbps: f64,
    pub rssi_dbm: f64,
    pub txp_dbm: f64,
    pub power_mw: f64,
    pub soc_mw: f64,
    pub companion_mw: f64,
    pub standby_mw: f64,
    pub extrapolated: bool,
}

pub const DEPTH_RUN: SimTime = SimTime::from_secs(10);
pub const DEPTH_MEASURE_FROM: SimTime = SimTime::from_secs(5);

pub fn default_depths() -> Vec<f64> {
    (0..=10).map(f64::from).collect()
}

/// Time average of `f` over `[t0, t1]`, holding each row until the next.
pub fn time_average(rows: &[TraceRow], t0: SimTime, t1: SimTime, f: impl Fn(&TraceRow) -> f64) -> f64 {
    let mut acc = 0.0;
    let mut span = 0u64;
    for (i, r) in rows.iter().enumerate() {
        let start = r.time().max(t0);
        let end = rows.get(i + 1).map_or(t1, |n| n.time()).min(t1);
        if end > start {
            let dt = (end - start).as_micros();
            acc += f(r) * dt as f64;
            span += dt;
        }
    }
    if span == 0 {
        rows.iter().rev().find(|r| r.time() <= t1).map_or(f64::NAN, f)
    } else {
        acc / span as f64
    }
}

fn depth_run(base: &Scenario, mode: &RadioMode, depth: f64) -> Result<DepthPoint> {
    let mut sc = Scenario {
        depth_profile: DepthProfile::constant(depth),
        initial_protocol: mode.protocol(),
        switch_schedule: Vec::new(),
        auto: None,
        duration_ms: DEPTH_RUN.as_millis_f64(),
        sample_period_ms: 0.0,
        ..base.clone()
    };
    match mode {
        RadioMode::Ble { .. } => {
            sc.ble = BleConfig {
                adaptive: base.ble.adaptive,
                ..BleConfig::from_mode(mode).expect("BLE mode")
            };
        }
        RadioMode::Wifi { band, role } => {
            sc.wifi = WifiConfig {
                band: *band,
                role: *role,
            }
        }
    }
    let out = run_scenario(&sc)?;
    let rows = &out.rows;
    let avg = |f: fn(&TraceRow) -> f64| time_average(rows, DEPTH_MEASURE_FROM, DEPTH_RUN, f);
    let lib = sc.effective_library();
    Ok(DepthPoint {
        mode: mode.label(),
        depth_cm: depth,
        throughput_kbps: avg(|r| r.throughput_kbps),
        rssi_dbm: avg(|r| r.rssi_dbm),
        txp_dbm: avg(|r| r.txp_dbm),
        power_mw: avg(|r| r.soc_mw + r.companion_mw),
        soc_mw: avg(|r| r.soc_mw),
        companion_mw: avg(|r| r.companion_mw),
        standby_mw: lib.power(mode).standby_mw,
        extrapolated: sc.depth_profile.is_extrapolated(),
    })
}

/// Steady-state metrics per mode per depth, measured over the second half of
/// a 10 s run.
pub fn sweep_depth(base: &Scenario, depths: &[f64], modes: &[RadioMode]) -> Result<Vec<DepthPoint>> {
    if depths.is_empty() {
        return Err(Error::config("depths", "must not be empty"));
    }
    if let Some(d) = depths.iter().find(|d| !(**d >= 0.0) || !d.is_finite()) {
        return Err(Error::config("depths", format!("depth {d} cm must be finite and >= 0")));
    }
    let jobs: Vec<(RadioMode, f64)> = modes
        .iter()
        .flat_map(|m| depths.iter().map(move |&d| (*m, d)))
        .collect();
    jobs.par_iter().map(|(m, d)| depth_run(base, m, *d)).collect()
}
