//! Scenario runner: wires channel, radios, TXP control, streaming, handover
//! and energy accounting onto the event scheduler.

use crate::channel::{depth_at, rssi_at};
use crate::error::{Error, Result};
use crate::handover::{Handover, HandoverState, RequestOutcome, SwitchEvent};
use crate::radio::{steady_goodput, throughput_from_rssi, BlePolicy, ChipPower, LinkLibrary, Protocol, RadioMode};
use crate::scenario::{Align, Scenario};
use crate::sim::{seeded_rng, Scheduler, SimRng, SimTime};
use crate::streaming::{ChunkRecord, DeliveryRecord, FpsMeter, FrameSource, Receiver, Transfer};
use crate::summary::{summarize, RunSummary};
use crate::trace::{join_events, ActiveColumn, StateColumn, TraceEvent, TraceRow};
use crate::txp::TxpController;

/// How long past `duration` an in-flight frame or handover may take to finish.
pub const END_GRACE: SimTime = SimTime::from_secs(120);

#[derive(Debug, Clone, Copy, PartialEq)]
enum Ev {
    ChunkDone { gen: u64 },
    FrameStart { gen: u64 },
    ControlTick,
    DepthChange(f64),
    Command { target: Protocol, align: Align },
    Demand(f64),
    SwitchComplete,
    Sample,
    End,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<TraceRow>,
    pub summary: RunSummary,
    pub deliveries: Vec<DeliveryRecord>,
    pub chunks: Vec<ChunkRecord>,
    pub switches: Vec<SwitchEvent>,
    pub frame_boundaries: Vec<SimTime>,
    pub emitted: u64,
    pub integrity_errors: Vec<String>,
    pub ended_at: SimTime,
}

impl RunOutput {
    pub fn integrity_pass(&self) -> bool {
        self.summary.passed()
    }

    pub fn trace_csv(&self) -> String {
        crate::trace::to_csv_string(&self.rows)
    }

    pub fn summary_json(&self) -> String {
        self.summary.to_json()
    }
}

/// Runs `sc` to completion. Same scenario, same output, byte for byte.
pub fn run_scenario(sc: &Scenario) -> Result<RunOutput> {
    sc.validate()?;
    Sim::new(sc).run()
}

struct InFlight {
    transfer: Transfer,
    payload: Vec<u8>,
    next_chunk: u64,
}

struct Sim<'a> {
    sc: &'a Scenario,
    lib: LinkLibrary,
    ble: RadioMode,
    wifi: RadioMode,
    sched: Scheduler<Ev>,
    rng: SimRng,
    handover: Handover,
    ctrl: Option<TxpController>,
    depth: f64,
    rssi: f64,
    txp_col: f64,
    source: FrameSource,
    flight: Option<InFlight>,
    chunk_gen: u64,
    start_gen: u64,
    receiver: Receiver,
    fps: FpsMeter,
    demand: Option<f64>,
    last_start: Option<SimTime>,
    at_next_start: Vec<Protocol>,
    ending: bool,
    labels: Vec<TraceEvent>,
    rows: Vec<TraceRow>,
    deliveries: Vec<DeliveryRecord>,
    chunks: Vec<ChunkRecord>,
    switches: Vec<SwitchEvent>,
    boundaries: Vec<SimTime>,
    integrity_errors: Vec<String>,
}

impl<'a> Sim<'a> {
    fn new(sc: &'a Scenario) -> Self {
        let ctrl = match sc.ble_mode() {
            RadioMode::Ble {
                policy: BlePolicy::Adaptive,
                ..
            } => Some(sc.ble.adaptive),
            _ => None,
        };
        Sim {
            sc,
            lib: sc.effective_library(),
            ble: sc.ble_mode(),
            wifi: sc.wifi_mode(),
            sched: Scheduler::new(),
            rng: seeded_rng(sc.seed),
            handover: Handover::new(sc.initial_protocol),
            ctrl,
            depth: depth_at(SimTime::ZERO, &sc.depth_profile),
            rssi: f64::NAN,
            txp_col: f64::NAN,
            source: FrameSource::new(sc.image_size_bytes),
            flight: None,
            chunk_gen: 0,
            start_gen: 0,
            receiver: Receiver::default(),
            fps: FpsMeter::new(SimTime::from_millis_f64(sc.fps_window_ms), SimTime::ZERO),
            demand: None,
            last_start: None,
            at_next_start: Vec::new(),
            ending: false,
            labels: Vec::new(),
            rows: Vec::new(),
            deliveries: Vec::new(),
            chunks: Vec::new(),
            switches: Vec::new(),
            boundaries: Vec::new(),
            integrity_errors: Vec::new(),
        }
    }

    fn at(&mut self, t: SimTime, ev: Ev) -> Result<()> {
        self.sched.schedule(t, ev).map(|_| ())
    }

    fn mode(&self, p: Protocol) -> &RadioMode {
        match p {
            Protocol::Ble => &self.ble,
            Protocol::Wifi => &self.wifi,
        }
    }

    fn txp_for(&self, p: Protocol) -> f64 {
        match (p, self.ble) {
            (Protocol::Wifi, _) => self.lib.wifi_txp_dbm,
            (
                Protocol::Ble,
                RadioMode::Ble {
                    policy: BlePolicy::Fixed { txp_dbm },
                    ..
                },
            ) => txp_dbm,
            (Protocol::Ble, _) => self.ctrl.map_or(0.0, |c| c.txp_dbm),
        }
    }

    fn steady_rate(&self, p: Protocol) -> f64 {
        let curve = self.lib.curve(self.mode(p));
        steady_goodput(curve, throughput_from_rssi(curve, self.rssi))
    }

    /// Byte rate the in-flight frame should move at right now.
    fn target_rate(&self) -> Option<f64> {
        match self.handover.state() {
            HandoverState::Pending { from, .. } => Some(self.sc.calibration.drain_bytes_per_sec(from)),
            HandoverState::Active(p) => Some(self.steady_rate(p)),
            HandoverState::Switching { .. } => None,
        }
    }

    fn schedule_chunk(&mut self) -> Result<()> {
        let Some(due) = self.flight.as_ref().and_then(|f| f.transfer.next_chunk_due()) else {
            return Ok(());
        };
        let t = due.max(self.sched.now());
        self.at(t, Ev::ChunkDone { gen: self.chunk_gen })
    }

    fn retime(&mut self, t: SimTime) -> Result<()> {
        let Some(rate) = self.target_rate() else {
            return Ok(());
        };
        let Some(f) = self.flight.as_mut() else {
            return Ok(());
        };
        if f.transfer.rate_bps() != rate {
            f.transfer.set_rate(t, rate);
            self.chunk_gen += 1;
            self.schedule_chunk()?;
        }
        Ok(())
    }

    /// Re-measures the active link and re-times the transfer.
    fn link_update(&mut self, t: SimTime) -> Result<()> {
        let Some(p) = self.handover.state().active_protocol() else {
            return Ok(());
        };
        let txp = self.txp_for(p);
        let profile = self.lib.channel(self.mode(p)).clone();
        self.rssi = rssi_at(txp, self.depth, &profile, &mut self.rng)?;
        self.txp_col = txp;
        self.retime(t)
    }

    fn on_air_kbps(&self) -> f64 {
        self.flight
            .as_ref()
            .map_or(0.0, |f| f.transfer.rate_bps() * 8.0 / 1000.0)
    }

    fn power(&self) -> Result<ChipPower> {
        match self.handover.state().active_protocol() {
            None => Ok(self.lib.standby_power(&self.ble, &self.wifi)),
            Some(p) => self.lib.streaming_power(
                &self.ble,
                &self.wifi,
                p,
                self.txp_for(p),
                self.depth,
                self.on_air_kbps(),
            ),
        }
    }

    fn push_row(&mut self, t: SimTime) -> Result<()> {
        let state = self.handover.state();
        let power = self.power()?;
        let event = join_events(&self.labels);
        self.labels.clear();
        self.rows.push(TraceRow {
            t_ms: t.as_millis_f64(),
            active_protocol: ActiveColumn::from(state.active_protocol()),
            handover_state: match state {
                HandoverState::Active(_) => StateColumn::Active,
                HandoverState::Pending { .. } => StateColumn::Pending,
                HandoverState::Switching { .. } => StateColumn::Switching,
            },
            depth_cm: self.depth,
            rssi_dbm: self.rssi,
            txp_dbm: self.txp_col,
            throughput_kbps: self.on_air_kbps(),
            fps: self.fps.fps(t),
            soc_mw: power.soc_mw,
            companion_mw: power.companion_mw,
            frame_id: self.flight.as_ref().map(|f| f.transfer.frame.id),
            event,
        });
        Ok(())
    }

    fn maybe_start_frame(&mut self, t: SimTime) -> Result<()> {
        if self.ending || self.flight.is_some() {
            return Ok(());
        }
        let HandoverState::Active(p) = self.handover.state() else {
            return Ok(());
        };
        if let Some(d) = self.demand {
            if d <= 0.0 {
                return Ok(());
            }
            if let Some(prev) = self.last_start {
                let earliest = prev + SimTime::from_millis_f64(1000.0 / d);
                if earliest > t {
                    self.start_gen += 1;
                    return self.at(earliest, Ev::FrameStart { gen: self.start_gen });
                }
            }
        }
        let (frame, payload) = self.source.emit_frame();
        self.receiver.begin(&frame);
        let transfer = Transfer::new(frame, p, t, self.steady_rate(p));
        self.flight = Some(InFlight {
            transfer,
            payload,
            next_chunk: 0,
        });
        self.chunk_gen += 1;
        self.last_start = Some(t);
        self.labels.push(TraceEvent::FrameStart { id: frame.id });
        self.schedule_chunk()?;
        for target in std::mem::take(&mut self.at_next_start) {
            self.request(t, target)?;
        }
        Ok(())
    }

    fn on_chunk(&mut self, t: SimTime, gen: u64) -> Result<()> {
        if gen != self.chunk_gen {
            return Ok(());
        }
        let drop = self.sc.faults.drop_chunk;
        let Some(f) = self.flight.as_mut() else {
            return Ok(());
        };
        let Some(rec) = f.transfer.complete_chunk(t) else {
            return self.schedule_chunk();
        };
        let index = f.next_chunk;
        f.next_chunk += 1;
        self.chunks.push(rec);
        if drop != Some((rec.frame_id, index)) {
            let range = rec.offset_bytes as usize..(rec.offset_bytes + rec.len_bytes) as usize;
            if let Err(e) = self.receiver.accept(rec, &f.payload[range]) {
                self.integrity_errors.push(e.to_string());
            }
        }
        if f.transfer.is_complete() {
            self.on_frame_complete(t)
        } else {
            self.schedule_chunk()
        }
    }

    fn on_frame_complete(&mut self, t: SimTime) -> Result<()> {
        let f = self.flight.take().expect("a frame is in flight");
        let frame = f.transfer.frame;
        match self.receiver.on_frame_complete(&frame, f.transfer.started_at, t) {
            Ok(rec) => {
                self.deliveries.push(rec);
                self.fps.record(t);
                self.labels.push(TraceEvent::FrameComplete {
                    id: frame.id,
                    protocol: rec.protocol,
                });
            }
            Err(e) => {
                self.integrity_errors.push(e.to_string());
                self.labels.push(TraceEvent::IntegrityError { id: frame.id });
            }
        }
        self.boundaries.push(t);
        self.at_boundary(t)
    }

    /// Frame boundary (or idle link): run a pending switch, else keep streaming.
    fn at_boundary(&mut self, t: SimTime) -> Result<()> {
        match self.handover.on_frame_boundary(t, &self.sc.calibration) {
            Some(done) => {
                self.labels.push(TraceEvent::SwitchBoundary);
                if done == t {
                    self.complete_switch(t)
                } else {
                    self.at(done, Ev::SwitchComplete)
                }
            }
            None => self.maybe_start_frame(t),
        }
    }

    fn complete_switch(&mut self, t: SimTime) -> Result<()> {
        let ev = self
            .handover
            .complete_switch(t)
            .ok_or_else(|| Error::Trace("switch completion without a switch in progress".into()))?;
        self.switches.push(ev);
        self.labels.push(TraceEvent::SwitchComplete {
            from: ev.from,
            to: ev.to,
        });
        self.link_update(t)?;
        if let Some(rate) = self.target_rate() {
            if let Some(f) = self.flight.as_mut() {
                // only reachable with boundary sync disabled
                f.transfer.reroute(t, ev.to, rate);
                self.chunk_gen += 1;
                self.schedule_chunk()?;
            }
        }
        self.maybe_start_frame(t)?;
        if let Some((target, _)) = self.handover.take_latched() {
            self.request(t, target)?;
        }
        Ok(())
    }

    fn request(&mut self, t: SimTime, target: Protocol) -> Result<()> {
        if self.ending {
            self.labels.push(TraceEvent::SwitchNoop { target });
            return Ok(());
        }
        let residual = self
            .flight
            .as_ref()
            .map_or(0, |f| f.transfer.remaining_at(t).round() as u64);
        let before = self.handover.state();
        match self.handover.request_switch(target, t, residual) {
            RequestOutcome::Registered => {
                let from = before.active_protocol().expect("registered from an active state");
                self.labels.push(TraceEvent::SwitchRequest {
                    from,
                    to: target,
                    residual,
                });
                if self.flight.is_none() {
                    self.at_boundary(t)
                } else if self.sc.faults.disable_boundary_sync {
                    self.handover.on_frame_boundary(t, &self.sc.calibration);
                    self.complete_switch(t)
                } else {
                    self.retime(t)
                }
            }
            RequestOutcome::Canceled => {
                self.labels.push(TraceEvent::SwitchCancel);
                self.retime(t)
            }
            RequestOutcome::Unchanged => {
                self.labels.push(TraceEvent::SwitchNoop { target });
                Ok(())
            }
            RequestOutcome::Latched => {
                self.labels.push(TraceEvent::SwitchLatched { target });
                Ok(())
            }
        }
    }

    /// Frames per second BLE can carry at the current depth. The adaptive
    /// policy is credited with its regulated set-point, capped by its TXP
    /// ceiling, since its live TXP is stale while Wi-Fi is active.
    fn ble_capacity_fps(&self) -> f64 {
        let curve = self.lib.curve(&self.ble);
        let channel = self.lib.channel(&self.ble);
        let rssi = match self.ctrl {
            Some(c) => channel
                .mean_rssi(c.txp_max_dbm, self.depth)
                .min((c.rssi_lo_dbm + c.rssi_hi_dbm) / 2.0),
            None => channel.mean_rssi(self.txp_for(Protocol::Ble), self.depth),
        };
        steady_goodput(curve, throughput_from_rssi(curve, rssi)) / self.sc.image_size_bytes as f64
    }

    fn auto_eval(&mut self, t: SimTime) -> Result<()> {
        let (Some(auto), Some(d)) = (&self.sc.auto, self.demand) else {
            return Ok(());
        };
        let cap = self.ble_capacity_fps();
        let heading = match self.handover.state() {
            HandoverState::Active(p) => p,
            HandoverState::Pending { to, .. } | HandoverState::Switching { to, .. } => to,
        };
        match heading {
            Protocol::Ble if d > auto.up_ratio * cap => self.request(t, Protocol::Wifi),
            Protocol::Wifi if d < auto.down_ratio * cap => self.request(t, Protocol::Ble),
            _ => Ok(()),
        }
    }

    fn control_tick(&mut self, t: SimTime) -> Result<()> {
        let active = self.handover.state().active_protocol();
        let (rssi0, txp0) = (self.rssi, self.txp_col);
        if active == Some(Protocol::Ble) {
            if let Some(mut c) = self.ctrl {
                let profile = self.lib.channel(&self.ble).clone();
                let measured = rssi_at(c.txp_dbm, self.depth, &profile, &mut self.rng)?;
                c.update(measured);
                self.ctrl = Some(c);
            }
        }
        self.link_update(t)?;
        if self.txp_col != txp0 {
            self.labels.push(TraceEvent::TxpUpdate);
        } else if self.rssi != rssi0 {
            self.labels.push(TraceEvent::LinkUpdate);
        }
        let period = self.ctrl.map_or(SimTime::from_millis(100), |c| c.update_period());
        self.at(t + period, Ev::ControlTick)
    }

    fn quiescent(&self) -> bool {
        self.flight.is_none() && matches!(self.handover.state(), HandoverState::Active(_))
    }

    fn run(mut self) -> Result<RunOutput> {
        let sc = self.sc;
        let duration = sc.duration();
        for &(start, d) in sc.depth_profile.segments().iter().skip(1) {
            self.at(start, Ev::DepthChange(d))?;
        }
        let noisy = [
            &self.lib.channels.ble,
            &self.lib.channels.ble_fem,
            &self.lib.channels.wifi_2g4,
            &self.lib.channels.wifi_5g,
        ]
        .iter()
        .any(|c| c.noise_sigma_db > 0.0);
        if self.ctrl.is_some() || noisy {
            let period = self.ctrl.map_or(SimTime::from_millis(100), |c| c.update_period());
            self.at(period, Ev::ControlTick)?;
        }
        for c in &sc.switch_schedule {
            self.at(
                SimTime::from_millis_f64(c.t_ms),
                Ev::Command {
                    target: c.target,
                    align: c.align,
                },
            )?;
        }
        if let Some(auto) = &sc.auto {
            for &(t_ms, fps) in &auto.fps_demand {
                if t_ms == 0.0 {
                    self.demand = Some(fps);
                } else {
                    self.at(SimTime::from_millis_f64(t_ms), Ev::Demand(fps))?;
                }
            }
        }
        let period = SimTime::from_millis_f64(sc.sample_period_ms);
        if period > SimTime::ZERO {
            self.at(period, Ev::Sample)?;
        }
        self.at(duration, Ev::End)?;

        let t0 = SimTime::ZERO;
        self.labels.push(TraceEvent::Start);
        self.link_update(t0)?;
        self.auto_eval(t0)?;
        self.maybe_start_frame(t0)?;
        self.push_row(t0)?;

        let cap = duration + END_GRACE;
        let mut stop = false;
        while let Some(fired) = self.sched.pop_until(cap) {
            let t = fired.fire_at;
            let mut periodic = false;
            match fired.payload {
                Ev::ChunkDone { gen } => self.on_chunk(t, gen)?,
                Ev::FrameStart { gen } => {
                    if gen == self.start_gen {
                        self.maybe_start_frame(t)?;
                    }
                }
                Ev::ControlTick => self.control_tick(t)?,
                Ev::DepthChange(d) => {
                    self.depth = d;
                    self.labels.push(TraceEvent::DepthChange);
                    self.link_update(t)?;
                    self.auto_eval(t)?;
                }
                Ev::Command { target, align } => match align {
                    Align::FrameStart if !self.ending => self.at_next_start.push(target),
                    _ => self.request(t, target)?,
                },
                Ev::Demand(fps) => {
                    self.demand = Some(fps);
                    self.labels.push(TraceEvent::DemandChange);
                    self.auto_eval(t)?;
                    self.start_gen += 1;
                    self.maybe_start_frame(t)?;
                }
                Ev::SwitchComplete => self.complete_switch(t)?,
                Ev::Sample => {
                    periodic = true;
                    self.at(t + period, Ev::Sample)?;
                }
                Ev::End => self.ending = true,
            }
            if self.ending && self.quiescent() {
                self.labels.push(TraceEvent::End);
                stop = true;
            }
            if periodic || !self.labels.is_empty() {
                self.push_row(t)?;
            }
            if stop {
                break;
            }
        }
        let ended_at = self.sched.now();
        if !stop {
            self.labels.push(TraceEvent::End);
            self.push_row(ended_at)?;
        }
        let summary = summarize(&self.rows)?;
        Ok(RunOutput {
            rows: self.rows,
            summary,
            deliveries: self.deliveries,
            chunks: self.chunks,
            switches: self.switches,
            frame_boundaries: self.boundaries,
            emitted: self.source.emitted(),
            integrity_errors: self.integrity_errors,
            ended_at,
        })
    }
}
