use std::ffi::{CStr, CString};
use std::ptr;

use hybridlink_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(hl_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_string_lossy().into_owned();
    hl_string_free(s);
    out
}

const TWO_SWITCH: &str = r#"{
    "duration_ms": 4000,
    "image_size_bytes": 40960,
    "switch_schedule": [
        {"t_ms": 1000, "target": "wifi", "align": "frame_start"},
        {"t_ms": 2500, "target": "ble", "align": "frame_start"}
    ]
}"#;

#[test]
fn run_two_switch_scenario() {
    unsafe {
        let json = CString::new(TWO_SWITCH).unwrap();
        let mut sc = ptr::null_mut();
        assert_eq!(hl_scenario_from_json(json.as_ptr(), &mut sc), HlStatus::Ok);
        let mut run = ptr::null_mut();
        assert_eq!(hl_run(sc, &mut run), HlStatus::Ok);

        let mut n = 0usize;
        assert_eq!(hl_run_switch_count(run, &mut n), HlStatus::Ok);
        assert_eq!(n, 2);
        let mut lat = [0.0; 2];
        for (i, l) in lat.iter_mut().enumerate() {
            assert_eq!(hl_run_switch_latency_ms(run, i, l), HlStatus::Ok);
        }
        assert!((lat[0] - 371.6).abs() < 0.01 && (lat[1] - 41.4).abs() < 0.01, "{lat:?}");
        let mut x = 0.0;
        assert_eq!(hl_run_switch_latency_ms(run, 2, &mut x), HlStatus::OutOfRange);
        assert!(last_error().contains("switch 2 of 2"));

        let mut pass = false;
        assert_eq!(hl_run_integrity_pass(run, &mut pass), HlStatus::Ok);
        assert!(pass);

        let mut s = ptr::null_mut();
        assert_eq!(hl_run_summary_json(run, &mut s), HlStatus::Ok);
        let summary: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
        assert_eq!(summary["integrity"], "PASS");
        assert_eq!(hl_run_trace_csv(run, &mut s), HlStatus::Ok);
        assert!(take(s).starts_with("t_ms,active_protocol,"));

        hl_run_free(run);
        hl_scenario_free(sc);
    }
}

#[test]
fn same_scenario_same_bytes() {
    unsafe {
        let mut sc = ptr::null_mut();
        assert_eq!(hl_scenario_default(&mut sc), HlStatus::Ok);
        let set = CString::new("noise_sigma_db=1.5").unwrap();
        assert_eq!(hl_scenario_set(sc, set.as_ptr()), HlStatus::Ok);
        let csv = |sc| {
            let mut run = ptr::null_mut();
            assert_eq!(hl_run(sc, &mut run), HlStatus::Ok);
            let mut s = ptr::null_mut();
            assert_eq!(hl_run_trace_csv(run, &mut s), HlStatus::Ok);
            hl_run_free(run);
            take(s)
        };
        assert_eq!(csv(sc), csv(sc));
        hl_scenario_free(sc);
    }
}

#[test]
fn config_errors_keep_the_scenario() {
    unsafe {
        let mut sc = ptr::null_mut();
        assert_eq!(hl_scenario_default(&mut sc), HlStatus::Ok);
        let mut before = ptr::null_mut();
        assert_eq!(hl_scenario_to_json(sc, &mut before), HlStatus::Ok);
        let bad = CString::new("wifi.band=7").unwrap();
        assert_eq!(hl_scenario_set(sc, bad.as_ptr()), HlStatus::Config);
        assert!(last_error().contains("wifi.band"));
        let mut after = ptr::null_mut();
        assert_eq!(hl_scenario_to_json(sc, &mut after), HlStatus::Ok);
        assert_eq!(take(before), take(after));
        // a successful call clears the message
        let mut x = 0.0;
        assert_eq!(
            hl_predict_latency_ms(10.0, HL_DIRECTION_BLE_TO_WIFI, &mut x),
            HlStatus::Ok
        );
        assert_eq!(last_error(), "");
        hl_scenario_free(sc);

        let json = CString::new(r#"{"image_size_bytes": 0}"#).unwrap();
        let mut sc = ptr::null_mut();
        assert_eq!(hl_scenario_from_json(json.as_ptr(), &mut sc), HlStatus::Config);
        assert!(sc.is_null());
        assert!(last_error().contains("image_size_bytes"));
    }
}

#[test]
fn null_and_bad_arguments() {
    unsafe {
        let mut sc = ptr::null_mut();
        assert_eq!(hl_scenario_from_json(ptr::null(), &mut sc), HlStatus::NullArgument);
        assert_eq!(hl_run(ptr::null(), &mut ptr::null_mut()), HlStatus::NullArgument);
        assert_eq!(hl_scenario_default(ptr::null_mut()), HlStatus::NullArgument);
        let bytes = [0xffu8, 0xfe, 0];
        assert_eq!(
            hl_scenario_from_json(bytes.as_ptr().cast(), &mut sc),
            HlStatus::InvalidUtf8
        );
        let mut x = 0.0;
        assert_eq!(hl_predict_latency_ms(10.0, 9, &mut x), HlStatus::OutOfRange);
        assert_eq!(
            hl_predict_latency_ms(-1.0, HL_DIRECTION_BLE_TO_WIFI, &mut x),
            HlStatus::OutOfRange
        );
        assert_eq!(hl_rssi_at(7, 0.0, 0.0, &mut x), HlStatus::OutOfRange);
        assert_eq!(hl_throughput_kbps(3, -50.0, &mut x), HlStatus::OutOfRange);
        hl_scenario_free(ptr::null_mut());
        hl_run_free(ptr::null_mut());
        hl_string_free(ptr::null_mut());
    }
}

#[test]
fn model_helpers() {
    unsafe {
        let mut x = 0.0;
        assert_eq!(
            hl_predict_latency_ms(40.0, HL_DIRECTION_BLE_TO_WIFI, &mut x),
            HlStatus::Ok
        );
        assert!((x - 371.6).abs() < 1e-9);
        assert_eq!(
            hl_predict_latency_ms(10.0, HL_DIRECTION_WIFI_TO_BLE, &mut x),
            HlStatus::Ok
        );
        assert!((x - 14.1).abs() < 1e-9);
        // 3 dBm - 43 dB - 1.89 dB/cm * 10 cm
        assert_eq!(hl_rssi_at(HL_CHANNEL_BLE, 3.0, 10.0, &mut x), HlStatus::Ok);
        assert!((x - (3.0 - 43.0 - 18.9)).abs() < 1e-9);
        assert_eq!(hl_rssi_at(HL_CHANNEL_WIFI_5G, 15.0, 2.0, &mut x), HlStatus::Ok);
        assert!((x - (15.0 - 60.0 - 8.2)).abs() < 1e-9);
        assert_eq!(hl_throughput_kbps(HL_PROTOCOL_BLE, -40.0, &mut x), HlStatus::Ok);
        assert!(x > 999.0 && x <= 1000.0);
        assert_eq!(hl_throughput_kbps(HL_PROTOCOL_WIFI, -45.0, &mut x), HlStatus::Ok);
        assert!(x > 7999.0 && x <= 8000.0);
        let v = CStr::from_ptr(hl_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}
