//! Frame source, chunked transfer, receiver reassembly and FPS metering.

use std::collections::VecDeque;

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::radio::Protocol;
use crate::sim::SimTime;

pub const DEFAULT_FRAME_BYTES: u64 = 40 * 1024;
pub const BLE_CHUNK_BYTES: u64 = 244;
pub const WIFI_CHUNK_BYTES: u64 = 1460;

pub fn chunk_bytes(protocol: Protocol) -> u64 {
    match protocol {
        Protocol::Ble => BLE_CHUNK_BYTES,
        Protocol::Wifi => WIFI_CHUNK_BYTES,
    }
}

/// Deterministic synthetic image bytes for frame `id`.
pub fn payload(id: u64, size: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(id ^ 0x5eed_f4a3_e000_0000);
    let mut buf = vec![0u8; size as usize];
    rng.fill_bytes(&mut buf);
    buf
}

/// First 8 bytes of SHA-256, big-endian.
pub fn checksum(bytes: &[u8]) -> u64 {
    let digest = Sha256::digest(bytes);
    u64::from_be_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub id: u64,
    pub size_bytes: u64,
    pub checksum: u64,
}

/// Emits gapless frame ids; size changes take effect at the next frame.
#[derive(Debug, Clone)]
pub struct FrameSource {
    next_id: u64,
    size_bytes: u64,
}

impl FrameSource {
    pub fn new(size_bytes: u64) -> Self {
        FrameSource { next_id: 0, size_bytes }
    }

    pub fn set_size(&mut self, size_bytes: u64) {
        self.size_bytes = size_bytes;
    }

    pub fn emitted(&self) -> u64 {
        self.next_id
    }

    pub fn emit_frame(&mut self) -> (Frame, Vec<u8>) {
        let id = self.next_id;
        self.next_id += 1;
        let bytes = payload(id, self.size_bytes);
        let frame = Frame {
            id,
            size_bytes: self.size_bytes,
            checksum: checksum(&bytes),
        };
        (frame, bytes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkRecord {
    pub frame_id: u64,
    pub offset_bytes: u64,
    pub len_bytes: u64,
    pub protocol: Protocol,
    pub completed_at: SimTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeliveryRecord {
    pub frame_id: u64,
    pub size_bytes: u64,
    pub protocol: Protocol,
    pub started_at: SimTime,
    pub completed_at: SimTime,
    pub verified: bool,
}

/// Result of [`Transfer::advance_transfer`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Advance {
    pub bytes_advanced: f64,
    pub complete: bool,
}

/// A frame in flight over one protocol, modeled at flow level.
///
/// Progress is tracked as fractional bytes. Chunk completion times are derived
/// from the last rate change (the anchor), so rounding to whole microseconds
/// never accumulates across chunks.
#[derive(Debug, Clone)]
pub struct Transfer {
    pub frame: Frame,
    pub protocol: Protocol,
    pub started_at: SimTime,
    chunk_size: u64,
    anchor_t: SimTime,
    anchor_bytes: f64,
    rate_bps: f64,
    next_offset: u64,
}

impl Transfer {
    pub fn new(frame: Frame, protocol: Protocol, now: SimTime, rate_bps: f64) -> Self {
        Transfer {
            frame,
            protocol,
            started_at: now,
            chunk_size: chunk_bytes(protocol),
            anchor_t: now,
            anchor_bytes: 0.0,
            rate_bps: rate_bps.max(0.0),
            next_offset: 0,
        }
    }

    pub fn rate_bps(&self) -> f64 {
        self.rate_bps
    }

    /// Bytes moved so far (fractional), capped at the frame size.
    pub fn progress_at(&self, t: SimTime) -> f64 {
        let dt = t.saturating_sub(self.anchor_t).as_secs_f64();
        (self.anchor_bytes + self.rate_bps * dt).min(self.frame.size_bytes as f64)
    }

    pub fn remaining_at(&self, t: SimTime) -> f64 {
        self.frame.size_bytes as f64 - self.progress_at(t)
    }

    /// Moves the anchor forward by `dt_us` at `goodput_bps`.
    pub fn advance_transfer(&mut self, goodput_bps: f64, dt_us: i64) -> Result<Advance> {
        if dt_us < 0 {
            return Err(Error::param("dt", format!("{dt_us} us is negative")));
        }
        if !(goodput_bps >= 0.0) {
            return Err(Error::param("goodput", "must be >= 0"));
        }
        let size = self.frame.size_bytes as f64;
        let before = self.anchor_bytes;
        self.anchor_bytes = (before + goodput_bps * dt_us as f64 / 1e6).min(size);
        self.anchor_t = self.anchor_t + SimTime(dt_us as u64);
        Ok(Advance {
            bytes_advanced: self.anchor_bytes - before,
            complete: self.anchor_bytes >= size,
        })
    }

    /// Re-anchors at `now` and continues at `rate_bps`.
    pub fn set_rate(&mut self, now: SimTime, rate_bps: f64) {
        let dt = now.saturating_sub(self.anchor_t).as_micros() as i64;
        self.advance_transfer(self.rate_bps, dt)
            .expect("non-negative dt and rate");
        self.anchor_t = now;
        self.rate_bps = rate_bps.max(0.0);
    }

    /// Moves the rest of the frame onto another protocol. Only a faulty
    /// handover does this; the receiver rejects the result.
    pub fn reroute(&mut self, now: SimTime, protocol: Protocol, rate_bps: f64) {
        self.set_rate(now, rate_bps);
        self.protocol = protocol;
        self.chunk_size = chunk_bytes(protocol);
    }

    fn next_boundary(&self) -> Option<u64> {
        (self.next_offset < self.frame.size_bytes)
            .then(|| (self.next_offset + self.chunk_size).min(self.frame.size_bytes))
    }

    /// When the next chunk finishes at the current rate; `None` when stalled or done.
    pub fn next_chunk_due(&self) -> Option<SimTime> {
        let boundary = self.next_boundary()? as f64;
        if self.rate_bps <= 0.0 {
            return None;
        }
        let need = (boundary - self.anchor_bytes).max(0.0);
        let us = (need / self.rate_bps * 1e6).ceil();
        Some(self.anchor_t + SimTime(us as u64))
    }

    /// Closes the next chunk at `t`. Returns `None` if it is not yet complete.
    pub fn complete_chunk(&mut self, t: SimTime) -> Option<ChunkRecord> {
        let boundary = self.next_boundary()?;
        if self.progress_at(t) + 1e-6 < boundary as f64 {
            return None;
        }
        let rec = ChunkRecord {
            frame_id: self.frame.id,
            offset_bytes: self.next_offset,
            len_bytes: boundary - self.next_offset,
            protocol: self.protocol,
            completed_at: t,
        };
        self.next_offset = boundary;
        Some(rec)
    }

    pub fn is_complete(&self) -> bool {
        self.next_offset >= self.frame.size_bytes
    }

    pub fn bytes_acknowledged(&self) -> u64 {
        self.next_offset
    }
}

/// Receiver-side reassembly of one frame at a time.
#[derive(Debug, Default)]
pub struct Receiver {
    current: Option<Reassembly>,
}

#[derive(Debug)]
struct Reassembly {
    frame_id: u64,
    buf: Vec<u8>,
    chunks: Vec<ChunkRecord>,
}

impl Receiver {
    pub fn begin(&mut self, frame: &Frame) {
        self.current = Some(Reassembly {
            frame_id: frame.id,
            buf: vec![0; frame.size_bytes as usize],
            chunks: Vec::new(),
        });
    }

    /// Stores one chunk's bytes (taken from the sender's payload).
    pub fn accept(&mut self, chunk: ChunkRecord, bytes: &[u8]) -> Result<()> {
        let r = self
            .current
            .as_mut()
            .filter(|r| r.frame_id == chunk.frame_id)
            .ok_or_else(|| Error::Integrity {
                frame_id: chunk.frame_id,
                reason: "chunk for a frame that is not being received".into(),
            })?;
        let end = (chunk.offset_bytes + chunk.len_bytes) as usize;
        if end > r.buf.len() || bytes.len() != chunk.len_bytes as usize {
            return Err(Error::Integrity {
                frame_id: chunk.frame_id,
                reason: format!("chunk [{}, {end}) out of range", chunk.offset_bytes),
            });
        }
        r.buf[chunk.offset_bytes as usize..end].copy_from_slice(bytes);
        r.chunks.push(chunk);
        Ok(())
    }

    /// Verifies coverage, protocol exclusivity and checksum.
    pub fn on_frame_complete(
        &mut self,
        frame: &Frame,
        started_at: SimTime,
        completed_at: SimTime,
    ) -> Result<DeliveryRecord> {
        let fail = |reason: String| Error::Integrity {
            frame_id: frame.id,
            reason,
        };
        let r = self
            .current
            .take()
            .filter(|r| r.frame_id == frame.id)
            .ok_or_else(|| fail("frame was never started".into()))?;
        let protocol = r
            .chunks
            .first()
            .map(|c| c.protocol)
            .ok_or_else(|| fail("no chunks received".into()))?;
        if r.chunks.iter().any(|c| c.protocol != protocol) {
            return Err(fail("chunks carried over more than one protocol".into()));
        }
        let mut covered = 0u64;
        for c in &r.chunks {
            if c.offset_bytes != covered {
                return Err(fail(format!(
                    "gap or overlap at byte {covered} (chunk starts at {})",
                    c.offset_bytes
                )));
            }
            covered += c.len_bytes;
        }
        if covered != frame.size_bytes {
            return Err(fail(format!("{covered} of {} bytes received", frame.size_bytes)));
        }
        if checksum(&r.buf) != frame.checksum {
            return Err(fail("checksum mismatch".into()));
        }
        Ok(DeliveryRecord {
            frame_id: frame.id,
            size_bytes: frame.size_bytes,
            protocol,
            started_at,
            completed_at,
            verified: true,
        })
    }
}

/// Receiver frame-rate meter over a sliding window.
///
/// With `n` completions in `(t - window, t]` the rate is `n` over the time
/// from the last completion before the window (or stream start) to the
/// newest completion. In steady state this reads exactly `1 / frame_time`.
#[derive(Debug, Clone)]
pub struct FpsMeter {
    window: SimTime,
    start: SimTime,
    completions: VecDeque<SimTime>,
}

impl Default for FpsMeter {
    fn default() -> Self {
        FpsMeter::new(SimTime::from_secs(1), SimTime::ZERO)
    }
}

impl FpsMeter {
    pub fn new(window: SimTime, start: SimTime) -> Self {
        FpsMeter {
            window,
            start,
            completions: VecDeque::new(),
        }
    }

    pub fn window(&self) -> SimTime {
        self.window
    }

    pub fn record(&mut self, t: SimTime) {
        self.completions.push_back(t);
        let lo = t.saturating_sub(self.window);
        // keep one completion at or before the window edge as the anchor
        while self.completions.len() > 1 && self.completions[1] <= lo && t >= self.window {
            self.start = self.completions.pop_front().expect("len > 1");
        }
    }

    pub fn fps(&self, t: SimTime) -> f64 {
        fps_over(self.completions.iter().copied(), t, self.window, self.start)
    }
}

/// Window FPS over sorted completion times; `start` anchors the first frame.
pub fn fps_over(completions: impl IntoIterator<Item = SimTime>, t: SimTime, window: SimTime, start: SimTime) -> f64 {
    let in_window = |c: SimTime| t < window || c > t - window;
    let mut anchor = start;
    let mut n = 0u64;
    let mut last = start;
    for c in completions.into_iter().take_while(|&c| c <= t) {
        if in_window(c) {
            n += 1;
            last = c;
        } else {
            anchor = c;
        }
    }
    if n == 0 || last <= anchor {
        return 0.0;
    }
    n as f64 / (last - anchor).as_secs_f64()
}
