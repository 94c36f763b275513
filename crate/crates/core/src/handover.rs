//! Frame-boundary-synchronized protocol handover.
//!
//! A request never interrupts a frame. It is registered as pending, the
//! in-flight frame drains over the departing protocol, and the switch runs at
//! the next frame boundary. A per-direction overhead gap may follow, during
//! which neither protocol streams.

use serde::{Deserialize, Serialize};

use crate::radio::{CalibrationSet, Direction, Protocol, KB_BYTES};
use crate::sim::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HandoverState {
    Active(Protocol),
    Pending {
        from: Protocol,
        to: Protocol,
        requested_at: SimTime,
        residual_bytes: u64,
    },
    /// Boundary reached; waiting out the direction overhead.
    Switching {
        from: Protocol,
        to: Protocol,
        requested_at: SimTime,
        residual_bytes: u64,
        completes_at: SimTime,
    },
}

impl HandoverState {
    /// Protocol currently carrying frames; `None` in the overhead gap.
    pub fn active_protocol(&self) -> Option<Protocol> {
        match *self {
            HandoverState::Active(p) => Some(p),
            HandoverState::Pending { from, .. } => Some(from),
            HandoverState::Switching { .. } => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            HandoverState::Active(_) => "active",
            HandoverState::Pending { .. } => "pending",
            HandoverState::Switching { .. } => "switching",
        }
    }

    pub fn is_pending(&self) -> bool {
        matches!(self, HandoverState::Pending { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchEvent {
    pub from: Protocol,
    pub to: Protocol,
    pub requested_at: SimTime,
    pub completed_at: SimTime,
    pub residual_bytes_at_request: u64,
    pub latency_ms: f64,
}

impl SwitchEvent {
    pub fn direction(&self) -> Direction {
        Direction::new(self.from, self.to).expect("switch events change protocol")
    }
}

/// What a switch request did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RequestOutcome {
    Registered,
    /// Target already active or already pending.
    Unchanged,
    Canceled,
    /// Arrived during the overhead gap; replayed once the new protocol is up.
    Latched,
}

#[derive(Debug, Clone)]
pub struct Handover {
    state: HandoverState,
    latched: Option<(Protocol, SimTime)>,
}

impl Handover {
    pub fn new(initial: Protocol) -> Self {
        Handover {
            state: HandoverState::Active(initial),
            latched: None,
        }
    }

    pub fn state(&self) -> HandoverState {
        self.state
    }

    /// Registers, cancels or ignores a request for `target` at `t`.
    ///
    /// `residual_bytes` is what is left of the in-flight frame at `t`.
    pub fn request_switch(&mut self, target: Protocol, t: SimTime, residual_bytes: u64) -> RequestOutcome {
        match self.state {
            HandoverState::Active(p) if p == target => RequestOutcome::Unchanged,
            HandoverState::Active(p) => {
                self.state = HandoverState::Pending {
                    from: p,
                    to: target,
                    requested_at: t,
                    residual_bytes,
                };
                RequestOutcome::Registered
            }
            HandoverState::Pending { from, .. } if from == target => {
                self.state = HandoverState::Active(from);
                RequestOutcome::Canceled
            }
            HandoverState::Pending { .. } => RequestOutcome::Unchanged,
            HandoverState::Switching { .. } => {
                self.latched = Some((target, t));
                RequestOutcome::Latched
            }
        }
    }

    /// Called at every frame completion. Returns when the switch will complete,
    /// if one was pending.
    pub fn on_frame_boundary(&mut self, t: SimTime, cal: &CalibrationSet) -> Option<SimTime> {
        let HandoverState::Pending {
            from,
            to,
            requested_at,
            residual_bytes,
        } = self.state
        else {
            return None;
        };
        let dir = Direction::new(from, to).expect("pending always changes protocol");
        let completes_at = t + SimTime::from_millis_f64(cal.overhead_ms(dir));
        self.state = HandoverState::Switching {
            from,
            to,
            requested_at,
            residual_bytes,
            completes_at,
        };
        Some(completes_at)
    }

    /// Finishes the switch; both stacks flip at `t`.
    pub fn complete_switch(&mut self, t: SimTime) -> Option<SwitchEvent> {
        let HandoverState::Switching {
            from,
            to,
            requested_at,
            residual_bytes,
            ..
        } = self.state
        else {
            return None;
        };
        self.state = HandoverState::Active(to);
        Some(SwitchEvent {
            from,
            to,
            requested_at,
            completed_at: t,
            residual_bytes_at_request: residual_bytes,
            latency_ms: (t - requested_at).as_millis_f64(),
        })
    }

    /// Request that arrived during the gap, if any.
    pub fn take_latched(&mut self) -> Option<(Protocol, SimTime)> {
        self.latched.take()
    }
}

/// Expected switch latency for a request made at a frame start.
pub fn predict_latency(size_kb: f64, dir: Direction, cal: &CalibrationSet) -> f64 {
    size_kb * cal.ms_per_kb(dir.from_protocol()) + cal.overhead_ms(dir)
}

/// Expected latency for an arbitrary residual at request time.
pub fn residual_latency_ms(residual_bytes: u64, dir: Direction, cal: &CalibrationSet) -> f64 {
    predict_latency(residual_bytes as f64 / KB_BYTES, dir, cal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::fit_line;

    const T: SimTime = SimTime(1_000);

    #[test]
    fn request_registers_pending() {
        let mut h = Handover::new(Protocol::Ble);
        assert_eq!(h.request_switch(Protocol::Wifi, T, 40_960), RequestOutcome::Registered);
        assert_eq!(
            h.state(),
            HandoverState::Pending {
                from: Protocol::Ble,
                to: Protocol::Wifi,
                requested_at: T,
                residual_bytes: 40_960
            }
        );
        // still streaming over BLE
        assert_eq!(h.state().active_protocol(), Some(Protocol::Ble));
    }

    #[test]
    fn request_for_active_is_noop() {
        let mut h = Handover::new(Protocol::Ble);
        assert_eq!(h.request_switch(Protocol::Ble, T, 0), RequestOutcome::Unchanged);
        assert_eq!(h.state(), HandoverState::Active(Protocol::Ble));
    }

    #[test]
    fn request_for_active_cancels_pending() {
        let mut h = Handover::new(Protocol::Ble);
        h.request_switch(Protocol::Wifi, T, 10);
        assert_eq!(h.request_switch(Protocol::Ble, T + T, 5), RequestOutcome::Canceled);
        assert_eq!(h.state(), HandoverState::Active(Protocol::Ble));
        assert_eq!(h.on_frame_boundary(SimTime(5_000), &CalibrationSet::default()), None);
    }

    #[test]
    fn repeat_request_keeps_first_timestamp() {
        let mut h = Handover::new(Protocol::Ble);
        h.request_switch(Protocol::Wifi, T, 10);
        assert_eq!(h.request_switch(Protocol::Wifi, T + T, 5), RequestOutcome::Unchanged);
        assert!(matches!(h.state(), HandoverState::Pending { requested_at, .. } if requested_at == T));
    }

    #[test]
    fn ble_to_wifi_completes_at_boundary() {
        let cal = CalibrationSet::default();
        let mut h = Handover::new(Protocol::Ble);
        h.request_switch(Protocol::Wifi, T, 40_960);
        let done = h.on_frame_boundary(SimTime(372_600), &cal).unwrap();
        assert_eq!(done, SimTime(372_600));
        let ev = h.complete_switch(done).unwrap();
        assert_eq!(h.state(), HandoverState::Active(Protocol::Wifi));
        assert!((ev.latency_ms - 371.6).abs() < 1e-9);
    }

    #[test]
    fn wifi_to_ble_has_gap() {
        let cal = CalibrationSet::default();
        let mut h = Handover::new(Protocol::Wifi);
        h.request_switch(Protocol::Ble, SimTime::ZERO, 40_960);
        let done = h.on_frame_boundary(SimTime(36_400), &cal).unwrap();
        assert_eq!(done, SimTime(41_400));
        assert_eq!(h.state().active_protocol(), None);
        assert_eq!(h.state().label(), "switching");
        assert_eq!(
            h.request_switch(Protocol::Wifi, SimTime(38_000), 0),
            RequestOutcome::Latched
        );
        let ev = h.complete_switch(done).unwrap();
        assert_eq!(ev.direction(), Direction::WifiToBle);
        assert_eq!(h.take_latched(), Some((Protocol::Wifi, SimTime(38_000))));
        assert_eq!(h.take_latched(), None);
    }

    #[test]
    fn boundary_while_active_does_nothing() {
        let mut h = Handover::new(Protocol::Wifi);
        assert_eq!(h.on_frame_boundary(T, &CalibrationSet::default()), None);
        assert_eq!(h.complete_switch(T), None);
    }

    #[test]
    fn predicted_latencies() {
        let cal = CalibrationSet::default();
        assert!((predict_latency(40.0, Direction::BleToWifi, &cal) - 371.6).abs() < 1e-9);
        assert!((predict_latency(10.0, Direction::BleToWifi, &cal) - 92.9).abs() < 1e-9);
        assert!((predict_latency(10.0, Direction::WifiToBle, &cal) - 14.1).abs() < 1e-9);
        assert!((predict_latency(40.0, Direction::WifiToBle, &cal) - 41.4).abs() < 1e-9);
    }

    #[test]
    fn predicted_against_measured_points() {
        let cal = CalibrationSet::default();
        let within = |got: f64, want: f64, tol: f64| (got - want).abs() <= tol * want;
        assert!(within(predict_latency(40.0, Direction::BleToWifi, &cal), 370.35, 0.06));
        assert!(within(predict_latency(10.0, Direction::BleToWifi, &cal), 92.66, 0.06));
        assert!(within(predict_latency(10.0, Direction::WifiToBle, &cal), 15.49, 0.10));
        assert!(within(predict_latency(40.0, Direction::WifiToBle, &cal), 41.45, 0.15));
    }

    #[test]
    fn default_overhead_near_two_point_intercept() {
        let fit = fit_line(&[(10.0, 15.49), (40.0, 41.45)]).unwrap();
        let cal = CalibrationSet::default();
        assert!((fit.intercept - cal.overhead_ms(Direction::WifiToBle)).abs() < 2.0);
    }

    #[test]
    fn slope_asymmetry() {
        let cal = CalibrationSet::default();
        let pts = |d| [10.0, 20.0, 30.0, 40.0].map(|s| (s, predict_latency(s, d, &cal)));
        let up = fit_line(&pts(Direction::BleToWifi)).unwrap().slope;
        let down = fit_line(&pts(Direction::WifiToBle)).unwrap().slope;
        assert!((9.0..=11.0).contains(&(up / down)), "{}", up / down);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn latency_strictly_increasing_in_size(a in 0.1f64..200.0, d in 0.01f64..50.0, up in any::<bool>()) {
                let cal = CalibrationSet::default();
                let dir = if up { Direction::BleToWifi } else { Direction::WifiToBle };
                prop_assert!(predict_latency(a + d, dir, &cal) > predict_latency(a, dir, &cal));
            }

            #[test]
            fn pending_never_targets_active(reqs in prop::collection::vec((any::<bool>(), 0u64..100), 0..50)) {
                let cal = CalibrationSet::default();
                let mut h = Handover::new(Protocol::Ble);
                let mut t = SimTime::ZERO;
                for (wifi, dt) in reqs {
                    t = t + SimTime(dt);
                    let target = if wifi { Protocol::Wifi } else { Protocol::Ble };
                    h.request_switch(target, t, 0);
                    if let HandoverState::Pending { from, to, .. } = h.state() {
                        prop_assert_ne!(from, to);
                    }
                    if dt % 7 == 0 {
                        if let Some(done) = h.on_frame_boundary(t, &cal) {
                            let ev = h.complete_switch(done).unwrap();
                            prop_assert_ne!(ev.from, ev.to);
                            t = done;
                        }
                    }
                }
            }
        }
    }
}
