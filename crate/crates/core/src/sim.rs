//! Deterministic discrete-event scheduler.
//!
//! Virtual time is kept in integer microseconds. Events are ordered by
//! `(fire_at, seq)` where `seq` is the insertion counter, so events sharing a
//! timestamp fire in FIFO order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::ops::{Add, Sub};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Microseconds since scenario start.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us)
    }

    pub const fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1_000)
    }

    pub const fn from_secs(s: u64) -> Self {
        SimTime(s * 1_000_000)
    }

    /// Rounds a non-negative millisecond value to the nearest microsecond.
    pub fn from_millis_f64(ms: f64) -> Self {
        SimTime((ms * 1_000.0).round().max(0.0) as u64)
    }

    pub const fn as_micros(self) -> u64 {
        self.0
    }

    pub fn as_millis_f64(self) -> f64 {
        self.0 as f64 / 1_000.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1_000_000.0
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:03} ms", self.0 / 1_000, self.0 % 1_000)
    }
}

/// Unique handle returned by [`Scheduler::schedule`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(pub u64);

/// An event popped from the queue.
#[derive(Debug, Clone, PartialEq)]
pub struct Fired<E> {
    pub id: EventId,
    pub fire_at: SimTime,
    pub payload: E,
}

struct Queued<E> {
    fire_at: SimTime,
    seq: u64,
    payload: E,
}

impl<E> PartialEq for Queued<E> {
    fn eq(&self, other: &Self) -> bool {
        self.fire_at == other.fire_at && self.seq == other.seq
    }
}

impl<E> Eq for Queued<E> {}

impl<E> PartialOrd for Queued<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Queued<E> {
    // BinaryHeap is a max-heap; invert so the earliest (fire_at, seq) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        (other.fire_at, other.seq).cmp(&(self.fire_at, self.seq))
    }
}

/// Single-threaded event queue with a virtual clock.
pub struct Scheduler<E> {
    now: SimTime,
    next_seq: u64,
    queue: BinaryHeap<Queued<E>>,
}

impl<E> Default for Scheduler<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Scheduler<E> {
    pub fn new() -> Self {
        Scheduler {
            now: SimTime::ZERO,
            next_seq: 0,
            queue: BinaryHeap::new(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    /// Queues `payload` to fire at `fire_at`. Scheduling in the past is rejected.
    pub fn schedule(&mut self, fire_at: SimTime, payload: E) -> Result<EventId> {
        if fire_at < self.now {
            return Err(Error::Causality { now: self.now, fire_at });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Queued { fire_at, seq, payload });
        Ok(EventId(seq))
    }

    /// Queues `payload` at `now + delay`.
    pub fn schedule_in(&mut self, delay: SimTime, payload: E) -> EventId {
        self.schedule(self.now + delay, payload)
            .expect("relative schedule is never in the past")
    }

    /// Fire time of the next queued event.
    pub fn peek_time(&self) -> Option<SimTime> {
        self.queue.peek().map(|q| q.fire_at)
    }

    /// Pops the next event if it fires at or before `limit`, advancing the clock to it.
    pub fn pop_until(&mut self, limit: SimTime) -> Option<Fired<E>> {
        if self.queue.peek()?.fire_at > limit {
            return None;
        }
        let q = self.queue.pop()?;
        self.now = q.fire_at;
        Some(Fired {
            id: EventId(q.seq),
            fire_at: q.fire_at,
            payload: q.payload,
        })
    }

    /// Processes every event with `fire_at <= t_end` in `(fire_at, seq)` order,
    /// then sets the clock to `t_end`. The handler may schedule further events.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F) -> Result<usize>
    where
        F: FnMut(&mut Scheduler<E>, Fired<E>),
    {
        if t_end < self.now {
            return Err(Error::Causality {
                now: self.now,
                fire_at: t_end,
            });
        }
        let mut processed = 0;
        while let Some(ev) = self.pop_until(t_end) {
            handler(self, ev);
            processed += 1;
        }
        self.now = t_end;
        Ok(processed)
    }
}

/// Deterministic random stream. Same seed, same sequence.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
