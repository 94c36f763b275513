//! Trace rows, event labels and CSV I/O.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::energy::Phase;
use crate::error::{Error, Result};
use crate::radio::Protocol;
use crate::sim::SimTime;

pub const COLUMNS: [&str; 12] = [
    "t_ms",
    "active_protocol",
    "handover_state",
    "depth_cm",
    "rssi_dbm",
    "txp_dbm",
    "throughput_kbps",
    "fps",
    "soc_mw",
    "companion_mw",
    "frame_id",
    "event",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActiveColumn {
    Ble,
    Wifi,
    None,
}

impl From<Option<Protocol>> for ActiveColumn {
    fn from(p: Option<Protocol>) -> Self {
        match p {
            Some(Protocol::Ble) => ActiveColumn::Ble,
            Some(Protocol::Wifi) => ActiveColumn::Wifi,
            None => ActiveColumn::None,
        }
    }
}

impl ActiveColumn {
    pub fn protocol(self) -> Option<Protocol> {
        match self {
            ActiveColumn::Ble => Some(Protocol::Ble),
            ActiveColumn::Wifi => Some(Protocol::Wifi),
            ActiveColumn::None => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateColumn {
    Active,
    Pending,
    Switching,
}

/// One CSV row. Periodic samples carry an empty `event`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t_ms: f64,
    pub active_protocol: ActiveColumn,
    pub handover_state: StateColumn,
    pub depth_cm: f64,
    pub rssi_dbm: f64,
    pub txp_dbm: f64,
    pub throughput_kbps: f64,
    pub fps: f64,
    pub soc_mw: f64,
    pub companion_mw: f64,
    pub frame_id: Option<u64>,
    pub event: String,
}

impl TraceRow {
    /// Exact simulation time of the row.
    pub fn time(&self) -> SimTime {
        SimTime((self.t_ms * 1000.0).round() as u64)
    }

    pub fn phase(&self) -> Phase {
        match (self.handover_state, self.active_protocol) {
            (StateColumn::Switching, _) | (_, ActiveColumn::None) => Phase::SwitchGap,
            (StateColumn::Pending, _) => Phase::Pending,
            (StateColumn::Active, ActiveColumn::Ble) => Phase::BleStreaming,
            (StateColumn::Active, ActiveColumn::Wifi) => Phase::WifiStreaming,
        }
    }

    pub fn events(&self) -> Result<Vec<TraceEvent>> {
        if self.event.is_empty() {
            return Ok(Vec::new());
        }
        self.event.split(';').map(str::parse).collect()
    }
}

/// Labels written to the `event` column, `;`-separated when several
/// happen in one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    Start,
    End,
    FrameStart {
        id: u64,
    },
    FrameComplete {
        id: u64,
        protocol: Protocol,
    },
    IntegrityError {
        id: u64,
    },
    SwitchRequest {
        from: Protocol,
        to: Protocol,
        residual: u64,
    },
    SwitchCancel,
    SwitchNoop {
        target: Protocol,
    },
    SwitchLatched {
        target: Protocol,
    },
    SwitchBoundary,
    SwitchComplete {
        from: Protocol,
        to: Protocol,
    },
    DepthChange,
    TxpUpdate,
    LinkUpdate,
    DemandChange,
}

impl TraceEvent {
    /// Touches the handover state machine.
    pub fn is_switch_activity(&self) -> bool {
        matches!(
            self,
            TraceEvent::SwitchRequest { .. }
                | TraceEvent::SwitchCancel
                | TraceEvent::SwitchBoundary
                | TraceEvent::SwitchComplete { .. }
        )
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Start => f.write_str("start"),
            TraceEvent::End => f.write_str("end"),
            TraceEvent::FrameStart { id } => write!(f, "frame_start:{id}"),
            TraceEvent::FrameComplete { id, protocol } => write!(f, "frame_complete:{id}:{protocol}"),
            TraceEvent::IntegrityError { id } => write!(f, "integrity_error:{id}"),
            TraceEvent::SwitchRequest { from, to, residual } => {
                write!(f, "switch_request:{from}>{to}:residual={residual}")
            }
            TraceEvent::SwitchCancel => f.write_str("switch_cancel"),
            TraceEvent::SwitchNoop { target } => write!(f, "switch_noop:{target}"),
            TraceEvent::SwitchLatched { target } => write!(f, "switch_latched:{target}"),
            TraceEvent::SwitchBoundary => f.write_str("switch_boundary"),
            TraceEvent::SwitchComplete { from, to } => write!(f, "switch_complete:{from}>{to}"),
            TraceEvent::DepthChange => f.write_str("depth_change"),
            TraceEvent::TxpUpdate => f.write_str("txp_update"),
            TraceEvent::LinkUpdate => f.write_str("link_update"),
            TraceEvent::DemandChange => f.write_str("demand_change"),
        }
    }
}

fn bad(s: &str) -> Error {
    Error::Trace(format!("unknown event label `{s}`"))
}

fn proto(s: &str) -> Result<Protocol> {
    Protocol::parse(s).ok_or_else(|| Error::Trace(format!("unknown protocol `{s}`")))
}

fn pair(s: &str) -> Result<(Protocol, Protocol)> {
    let (a, b) = s.split_once('>').ok_or_else(|| bad(s))?;
    Ok((proto(a)?, proto(b)?))
}

fn num(s: &str) -> Result<u64> {
    s.parse().map_err(|_| Error::Trace(format!("bad number `{s}`")))
}

impl FromStr for TraceEvent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        let ev = match (head, rest.as_slice()) {
            ("start", []) => TraceEvent::Start,
            ("end", []) => TraceEvent::End,
            ("frame_start", [id]) => TraceEvent::FrameStart { id: num(id)? },
            ("frame_complete", [id, p]) => TraceEvent::FrameComplete {
                id: num(id)?,
                protocol: proto(p)?,
            },
            ("integrity_error", [id]) => TraceEvent::IntegrityError { id: num(id)? },
            ("switch_request", [dir, residual]) => {
                let (from, to) = pair(dir)?;
                let r = residual.strip_prefix("residual=").ok_or_else(|| bad(s))?;
                TraceEvent::SwitchRequest {
                    from,
                    to,
                    residual: num(r)?,
                }
            }
            ("switch_cancel", []) => TraceEvent::SwitchCancel,
            ("switch_noop", [p]) => TraceEvent::SwitchNoop { target: proto(p)? },
            ("switch_latched", [p]) => TraceEvent::SwitchLatched { target: proto(p)? },
            ("switch_boundary", []) => TraceEvent::SwitchBoundary,
            ("switch_complete", [dir]) => {
                let (from, to) = pair(dir)?;
                TraceEvent::SwitchComplete { from, to }
            }
            ("depth_change", []) => TraceEvent::DepthChange,
            ("txp_update", []) => TraceEvent::TxpUpdate,
            ("link_update", []) => TraceEvent::LinkUpdate,
            ("demand_change", []) => TraceEvent::DemandChange,
            _ => return Err(bad(s)),
        };
        Ok(ev)
    }
}

pub fn join_events(events: &[TraceEvent]) -> String {
    events.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Trace(e.to_string())
}

pub fn write_csv<W: Write>(w: W, rows: &[TraceRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    if rows.is_empty() {
        wtr.write_record(COLUMNS).map_err(csv_err)?;
    }
    for r in rows {
        wtr.serialize(r).map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| Error::Trace(e.to_string()))
}

pub fn to_csv_string(rows: &[TraceRow]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<TraceRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.iter().ne(COLUMNS.iter().copied()) {
        return Err(Error::Trace(format!(
            "expected columns {}, found {}",
            COLUMNS.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let rows: Vec<TraceRow> = rdr.deserialize().collect::<Result<_, _>>().map_err(csv_err)?;
    if rows.windows(2).any(|w| w[1].time() < w[0].time()) {
        return Err(Error::Trace("rows are not in time order".into()));
    }
    Ok(rows)
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(std::io::BufWriter::new(f), rows)
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(std::io::BufReader::new(f))
}
