//! Shared scenario generators and independent checks for the integration
//! suites.

#![allow(dead_code)]

use hybridlink::channel::DepthProfile;
use hybridlink::scenario::{Align, AutoPolicy, BleConfig, PolicyKind, SwitchCommand};
use hybridlink::sim::seeded_rng;
use hybridlink::{Protocol, RunOutput, Scenario, SimTime};
use rand::seq::SliceRandom;
use rand::Rng;

/// Milliseconds per KB drained by the departing protocol, and the fixed
/// direction overheads, restated here so the oracle does not read them back
/// from the model under test.
pub const BLE_MS_PER_KB: f64 = 9.29;
pub const WIFI_MS_PER_KB: f64 = 0.91;
pub const OVERHEAD_BLE_TO_WIFI_MS: f64 = 0.0;
pub const OVERHEAD_WIFI_TO_BLE_MS: f64 = 5.0;

pub fn expected_latency_ms(from: Protocol, residual_bytes: u64) -> f64 {
    let kb = residual_bytes as f64 / 1024.0;
    match from {
        Protocol::Ble => kb * BLE_MS_PER_KB + OVERHEAD_BLE_TO_WIFI_MS,
        Protocol::Wifi => kb * WIFI_MS_PER_KB + OVERHEAD_WIFI_TO_BLE_MS,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GenOptions {
    pub noise: bool,
    pub allow_auto: bool,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            noise: false,
            allow_auto: true,
        }
    }
}

/// A random scenario: 1-64 KB frames, a random depth staircase, random BLE
/// policy, and either a switch-request storm or a demand-driven policy.
pub fn random_scenario(seed: u64, opts: GenOptions) -> Scenario {
    let mut rng = seeded_rng(seed ^ 0x7e57_0000);
    let duration_ms = rng.gen_range(800.0..2500.0f64).round();
    let protocols = [Protocol::Ble, Protocol::Wifi];

    let n_seg = rng.gen_range(1..=4);
    let mut starts: Vec<f64> = (1..n_seg).map(|_| rng.gen_range(1.0..duration_ms).round()).collect();
    starts.sort_by(f64::total_cmp);
    starts.dedup();
    let segs: Vec<(f64, f64)> = std::iter::once(0.0)
        .chain(starts)
        .map(|t| (t, rng.gen_range(0.0..10.0f64)))
        .collect();
    let depth_profile = DepthProfile::try_from(segs).expect("generated profile is valid");

    let ble = if rng.gen_bool(0.5) {
        BleConfig {
            policy: PolicyKind::Adaptive,
            ..BleConfig::default()
        }
    } else {
        BleConfig::default()
    };

    let mut sc = Scenario {
        seed,
        duration_ms,
        image_size_bytes: rng.gen_range(1024..=64 * 1024),
        depth_profile,
        initial_protocol: *protocols.choose(&mut rng).unwrap(),
        ble,
        sample_period_ms: 0.0,
        noise_sigma_db: opts.noise.then(|| rng.gen_range(0.5..3.0)),
        ..Scenario::default()
    };

    if opts.allow_auto && rng.gen_bool(0.15) {
        let steps = rng.gen_range(1..=4);
        let mut demand: Vec<(f64, f64)> = (0..steps)
            .map(|i| {
                let t = if i == 0 {
                    0.0
                } else {
                    rng.gen_range(1.0..duration_ms).round()
                };
                (t, *[1.0, 2.0, 5.0, 20.0, 30.0].choose(&mut rng).unwrap())
            })
            .collect();
        demand.sort_by(|a, b| a.0.total_cmp(&b.0));
        demand.dedup_by(|a, b| a.0 == b.0);
        sc.auto = Some(AutoPolicy {
            fps_demand: demand,
            ..AutoPolicy::default()
        });
        return sc;
    }

    // bursts of requests a few ms apart hit the pending and gap states,
    // and repeat or reverse the previous target
    let bursts = rng.gen_range(1..=5);
    for _ in 0..bursts {
        let mut t = rng.gen_range(0.0..duration_ms);
        for _ in 0..rng.gen_range(1..=4) {
            let align = if rng.gen_bool(0.2) {
                Align::FrameStart
            } else {
                Align::Exact
            };
            sc.switch_schedule.push(SwitchCommand {
                t_ms: (t * 1000.0).round() / 1000.0,
                target: *protocols.choose(&mut rng).unwrap(),
                align,
            });
            t += rng.gen_range(0.0..60.0);
        }
    }
    sc.switch_schedule.sort_by(|a, b| a.t_ms.total_cmp(&b.t_ms));
    sc
}

/// Every emitted frame delivered once, verified, over a single protocol, and
/// never crossed by a protocol change.
pub fn check_lossless(out: &RunOutput) -> Result<(), String> {
    if !out.integrity_errors.is_empty() {
        return Err(format!("integrity errors: {:?}", out.integrity_errors));
    }
    if out.deliveries.len() as u64 != out.emitted {
        return Err(format!("{} emitted, {} delivered", out.emitted, out.deliveries.len()));
    }
    for (i, d) in out.deliveries.iter().enumerate() {
        if d.frame_id != i as u64 {
            return Err(format!("delivery {i} carries frame {}", d.frame_id));
        }
        if !d.verified {
            return Err(format!("frame {} not verified", d.frame_id));
        }
    }

    let mut next = vec![0u64; out.deliveries.len()];
    for c in &out.chunks {
        let Some(d) = out.deliveries.get(c.frame_id as usize) else {
            return Err(format!("chunk for unknown frame {}", c.frame_id));
        };
        if c.protocol != d.protocol {
            return Err(format!(
                "frame {} has a {} chunk but was delivered over {}",
                c.frame_id, c.protocol, d.protocol
            ));
        }
        let expect = &mut next[c.frame_id as usize];
        if c.offset_bytes != *expect {
            return Err(format!(
                "frame {} chunk at {} expected {}",
                c.frame_id, c.offset_bytes, expect
            ));
        }
        *expect += c.len_bytes;
    }
    if let Some((id, (got, d))) = next
        .iter()
        .zip(&out.deliveries)
        .enumerate()
        .find(|(_, (got, d))| **got != d.size_bytes)
    {
        return Err(format!("frame {id} received {got} of {} bytes", d.size_bytes));
    }

    let active_at = |t: SimTime| out.switches.iter().rev().find(|s| s.completed_at <= t).map(|s| s.to);
    let initial = out
        .switches
        .first()
        .map(|s| s.from)
        .or_else(|| out.deliveries.first().map(|d| d.protocol));
    for d in &out.deliveries {
        if let Some(s) = out
            .switches
            .iter()
            .find(|s| s.completed_at > d.started_at && s.completed_at < d.completed_at)
        {
            return Err(format!("switch at {} crosses frame {}", s.completed_at, d.frame_id));
        }
        let active = active_at(d.started_at).or(initial);
        if active != Some(d.protocol) {
            return Err(format!(
                "frame {} sent over {} while {:?} was active",
                d.frame_id, d.protocol, active
            ));
        }
    }
    Ok(())
}

/// Measured latency against residual / drain rate + overhead, per switch.
pub fn check_latency_identity(out: &RunOutput, tol_ms: f64) -> Result<(), String> {
    for s in &out.switches {
        let want = expected_latency_ms(s.from, s.residual_bytes_at_request);
        if (s.latency_ms - want).abs() > tol_ms {
            return Err(format!(
                "{}>{} residual {} B: latency {:.4} ms, expected {:.4} ms",
                s.from, s.to, s.residual_bytes_at_request, s.latency_ms, want
            ));
        }
    }
    Ok(())
}
