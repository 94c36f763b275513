//! C ABI over the hybridlink simulator.
//!
//! Scenarios and runs are opaque handles owned by the caller and released with
//! their `_free` function. Every fallible call returns an [`HlStatus`]; the
//! message for the most recent failure on the calling thread is available from
//! [`hl_last_error_message`]. Strings returned through out-parameters are
//! heap-allocated and must be released with [`hl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hybridlink::channel::ChannelProfile;
use hybridlink::handover::predict_latency;
use hybridlink::radio::{throughput_from_rssi, CalibrationSet, LinkLibrary};
use hybridlink::{run_scenario, Direction, Error, RunOutput, Scenario};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Simulation = 4,
    OutOfRange = 5,
    Panic = 6,
}

pub const HL_PROTOCOL_BLE: u32 = 0;
pub const HL_PROTOCOL_WIFI: u32 = 1;

pub const HL_DIRECTION_BLE_TO_WIFI: u32 = 0;
pub const HL_DIRECTION_WIFI_TO_BLE: u32 = 1;

pub const HL_CHANNEL_BLE: u32 = 0;
pub const HL_CHANNEL_BLE_FEM: u32 = 1;
pub const HL_CHANNEL_WIFI_2G4: u32 = 2;
pub const HL_CHANNEL_WIFI_5G: u32 = 3;

/// Opaque scenario handle.
pub struct HlScenario(Scenario);

/// Opaque handle to a finished run.
pub struct HlRun(RunOutput);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Fail(HlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Config { .. } | Error::Parameter { .. } => HlStatus::Config,
            _ => HlStatus::Simulation,
        };
        Fail(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HlStatus {
    set_last_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HlStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("panic: {msg}"));
            HlStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(HlStatus::NullArgument, format!("`{what}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(HlStatus::InvalidUtf8, format!("`{what}`: {e}")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

fn to_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(HlStatus::Simulation, "output contains a NUL byte".into()))
}

fn direction(code: u32) -> Result<Direction, Fail> {
    match code {
        HL_DIRECTION_BLE_TO_WIFI => Ok(Direction::BleToWifi),
        HL_DIRECTION_WIFI_TO_BLE => Ok(Direction::WifiToBle),
        _ => Err(Fail(HlStatus::OutOfRange, format!("unknown direction {code}"))),
    }
}

/// Creates a scenario with default settings.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_scenario_default(out: *mut *mut HlScenario) -> HlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(HlScenario(Scenario::default())));
        Ok(())
    })
}

/// Parses and validates a scenario from JSON. Missing fields take defaults.
///
/// # Safety
/// `json` must be null or a NUL-terminated string; `out` must be null or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_scenario_from_json(json: *const c_char, out: *mut *mut HlScenario) -> HlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let sc = Scenario::from_json_str(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(HlScenario(sc)));
        Ok(())
    })
}

/// Applies one `key=value` override, e.g. `wifi.band=5`. On failure the
/// scenario is unchanged.
///
/// # Safety
/// `scenario` must be null or a live handle; `key_value` must be null or a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hl_scenario_set(scenario: *mut HlScenario, key_value: *const c_char) -> HlStatus {
    guard(|| {
        let sc = out_arg(scenario, "scenario")?;
        sc.0.set(str_arg(key_value, "key_value")?)?;
        Ok(())
    })
}

/// Serializes the scenario, including every default, as JSON.
///
/// # Safety
/// `scenario` must be null or a live handle; `out` must be null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn hl_scenario_to_json(scenario: *const HlScenario, out: *mut *mut c_char) -> HlStatus {
    guard(|| {
        let sc = ref_arg(scenario, "scenario")?;
        let out = out_arg(out, "out")?;
        *out = to_c_string(sc.0.to_json())?;
        Ok(())
    })
}

/// # Safety
/// `scenario` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_scenario_free(scenario: *mut HlScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs the scenario to completion. A run whose integrity verdict is FAIL
/// still succeeds here; query it with [`hl_run_integrity_pass`].
///
/// # Safety
/// `scenario` must be null or a live handle; `out` must be null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn hl_run(scenario: *const HlScenario, out: *mut *mut HlRun) -> HlStatus {
    guard(|| {
        let sc = ref_arg(scenario, "scenario")?;
        let out = out_arg(out, "out")?;
        let run = run_scenario(&sc.0)?;
        *out = Box::into_raw(Box::new(HlRun(run)));
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_run_summary_json(run: *const HlRun, out: *mut *mut c_char) -> HlStatus {
    guard(|| {
        let run = ref_arg(run, "run")?;
        let out = out_arg(out, "out")?;
        *out = to_c_string(run.0.summary_json())?;
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_run_trace_csv(run: *const HlRun, out: *mut *mut c_char) -> HlStatus {
    guard(|| {
        let run = ref_arg(run, "run")?;
        let out = out_arg(out, "out")?;
        *out = to_c_string(run.0.trace_csv())?;
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_run_switch_count(run: *const HlRun, out: *mut usize) -> HlStatus {
    guard(|| {
        let run = ref_arg(run, "run")?;
        *out_arg(out, "out")? = run.0.switches.len();
        Ok(())
    })
}

/// Latency of the `index`-th completed switch, in ms.
///
/// # Safety
/// `run` must be null or a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_run_switch_latency_ms(run: *const HlRun, index: usize, out: *mut f64) -> HlStatus {
    guard(|| {
        let run = ref_arg(run, "run")?;
        let out = out_arg(out, "out")?;
        let n = run.0.switches.len();
        let sw = run
            .0
            .switches
            .get(index)
            .ok_or_else(|| Fail(HlStatus::OutOfRange, format!("switch {index} of {n}")))?;
        *out = sw.latency_ms;
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_run_integrity_pass(run: *const HlRun, out: *mut bool) -> HlStatus {
    guard(|| {
        let run = ref_arg(run, "run")?;
        *out_arg(out, "out")? = run.0.integrity_pass();
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_run_free(run: *mut HlRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Switch latency for a request issued at a frame start, with the default
/// calibration.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_predict_latency_ms(size_kb: f64, direction_code: u32, out: *mut f64) -> HlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if !(size_kb.is_finite() && size_kb >= 0.0) {
            return Err(Fail(HlStatus::OutOfRange, format!("size_kb {size_kb}")));
        }
        *out = predict_latency(size_kb, direction(direction_code)?, &CalibrationSet::default());
        Ok(())
    })
}

/// Noise-free RSSI for a default channel profile.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_rssi_at(channel: u32, txp_dbm: f64, depth_cm: f64, out: *mut f64) -> HlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let profile = match channel {
            HL_CHANNEL_BLE => ChannelProfile::ble(),
            HL_CHANNEL_BLE_FEM => ChannelProfile::ble_fem(),
            HL_CHANNEL_WIFI_2G4 => ChannelProfile::wifi_2g4(),
            HL_CHANNEL_WIFI_5G => ChannelProfile::wifi_5g(),
            _ => return Err(Fail(HlStatus::OutOfRange, format!("unknown channel {channel}"))),
        };
        if !(depth_cm.is_finite() && depth_cm >= 0.0 && txp_dbm.is_finite()) {
            return Err(Fail(
                HlStatus::OutOfRange,
                format!("txp {txp_dbm} dBm, depth {depth_cm} cm"),
            ));
        }
        *out = profile.mean_rssi(txp_dbm, depth_cm);
        Ok(())
    })
}

/// Steady throughput in kbps at `rssi_dbm` on the default curve for
/// `protocol`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_throughput_kbps(protocol: u32, rssi_dbm: f64, out: *mut f64) -> HlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let curves = LinkLibrary::default().curves;
        let curve = match protocol {
            HL_PROTOCOL_BLE => curves.ble,
            HL_PROTOCOL_WIFI => curves.wifi_2g4,
            _ => return Err(Fail(HlStatus::OutOfRange, format!("unknown protocol {protocol}"))),
        };
        if rssi_dbm.is_nan() {
            return Err(Fail(HlStatus::OutOfRange, "rssi is NaN".into()));
        }
        *out = throughput_from_rssi(&curve, rssi_dbm);
        Ok(())
    })
}

/// Message for the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call into this library on the thread.
#[no_mangle]
pub extern "C" fn hl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
