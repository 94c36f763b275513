use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_hybridlink");

fn scenario(name: &str) -> String {
    format!("{}/scenarios/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn hl(out: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn run_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = hl(dir.path(), &["run", "--config", &scenario("two_switch.json")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.path().join("trace.csv"));
    assert!(csv.starts_with(
        "t_ms,active_protocol,handover_state,depth_cm,rssi_dbm,txp_dbm,throughput_kbps,fps,soc_mw,companion_mw,frame_id,event\n"
    ));
    let summary: serde_json::Value = serde_json::from_str(&read(dir.path().join("summary.json"))).unwrap();
    assert_eq!(summary["integrity"], "PASS");
    let lat: Vec<f64> = summary["switch_events"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["latency_ms"].as_f64().unwrap())
        .collect();
    assert_eq!(lat.len(), 2);
    assert!((lat[0] - 371.6).abs() < 0.01 && (lat[1] - 41.4).abs() < 0.01, "{lat:?}");
}

#[test]
fn same_seed_gives_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "run",
        "--config",
        &scenario("auto_demand.json"),
        "--seed",
        "42",
        "--set",
        "noise_sigma_db=2",
    ];
    assert_eq!(code(&hl(a.path(), &args)), 0);
    assert_eq!(code(&hl(b.path(), &args)), 0);
    for f in ["trace.csv", "summary.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let c = tempfile::tempdir().unwrap();
    let other = [
        "run",
        "--config",
        &scenario("auto_demand.json"),
        "--seed",
        "43",
        "--set",
        "noise_sigma_db=2",
    ];
    assert_eq!(code(&hl(c.path(), &other)), 0);
    assert_ne!(read(a.path().join("trace.csv")), read(c.path().join("trace.csv")));
}

#[test]
fn verify_accepts_own_output_and_rejects_edits() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&hl(dir.path(), &["run", "--config", &scenario("two_switch.json")])),
        0
    );
    let o = hl(dir.path(), &["verify"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let path = dir.path().join("summary.json");
    let edited = read(&path).replacen("\"latency_ms\": 371.6", "\"latency_ms\": 360.0", 1);
    assert_ne!(edited, read(&path));
    std::fs::write(&path, edited).unwrap();
    let o = hl(dir.path(), &["verify"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("latency_ms"));
}

#[test]
fn integrity_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = hl(
        dir.path(),
        &["run", "--set", "faults.drop_chunk=[2,5]", "--set", "duration_ms=1500"],
    );
    assert_eq!(code(&o), 1);
    let summary = read(dir.path().join("summary.json"));
    assert!(summary.contains("\"integrity\": \"FAIL\""));
    // a consistent but failing run still fails verification's exit contract
    assert_eq!(code(&hl(dir.path(), &["verify"])), 1);
}

#[test]
fn config_errors_exit_two_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    for (set, field) in [
        ("wifi.band=7", "wifi.band"),
        ("duration_ms=-1", "duration_ms"),
        ("nonsense=1", "nonsense"),
        (
            "switch_schedule=[{\"t_ms\":1,\"target\":\"bluetooth\"}]",
            "switch_schedule",
        ),
    ] {
        let o = hl(dir.path(), &["run", "--set", set]);
        assert_eq!(code(&o), 2, "{set}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(field), "{set}: {err}");
    }
    let o = hl(dir.path(), &["run", "--config", "/no/such/config.json"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn missing_or_corrupt_trace_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&hl(dir.path(), &["report"])), 3);
    assert_eq!(code(&hl(dir.path(), &["verify"])), 3);
    std::fs::write(dir.path().join("trace.csv"), "t_ms,wrong\n1,2\n").unwrap();
    std::fs::write(dir.path().join("summary.json"), "{}").unwrap();
    assert_eq!(code(&hl(dir.path(), &["report"])), 3);
}

#[test]
fn sweeps_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = hl(dir.path(), &["sweep-size", "--sizes", "10,40", "--repeats", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let sweep: serde_json::Value = serde_json::from_str(&read(dir.path().join("sweep_size.json"))).unwrap();
    assert_eq!(sweep["points"].as_array().unwrap().len(), 4);
    assert!((sweep["slopes_ms_per_kb"]["ble_to_wifi"].as_f64().unwrap() - 9.29).abs() < 0.01);

    let o = hl(dir.path(), &["sweep-depth", "--depths", "0,10"]);
    assert_eq!(code(&o), 0);
    let depth: serde_json::Value = serde_json::from_str(&read(dir.path().join("sweep_depth.json"))).unwrap();
    assert_eq!(depth.as_array().unwrap().len(), 12);

    assert_eq!(
        code(&hl(dir.path(), &["run", "--config", &scenario("two_switch.json")])),
        0
    );
    let o = hl(dir.path(), &["report"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["timeline.svg", "depth_sweep.svg", "latency_vs_size.svg", "report.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn report_without_switches_skips_latency_figure() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&hl(dir.path(), &["run", "--set", "duration_ms=1000"])), 0);
    assert_eq!(code(&hl(dir.path(), &["report"])), 0);
    assert!(dir.path().join("timeline.svg").exists());
    assert!(!dir.path().join("latency_vs_size.svg").exists());
}
