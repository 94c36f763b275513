//! Deterministic discrete-event simulator for a hybrid BLE/Wi-Fi capsule
//! endoscopy link.

// `!(x >= 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod energy;
pub mod engine;
pub mod error;
pub mod handover;
pub mod radio;
pub mod report;
pub mod scenario;
pub mod sim;
pub mod stats;
pub mod streaming;
pub mod summary;
pub mod sweep;
pub mod trace;
pub mod txp;

pub use engine::{run_scenario, RunOutput};
pub use error::{Error, Result};
pub use radio::{Direction, Protocol};
pub use scenario::Scenario;
pub use sim::SimTime;
pub use summary::RunSummary;
