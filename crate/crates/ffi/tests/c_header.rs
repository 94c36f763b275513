//! Compiles a C program against the generated header and links it with the
//! static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "hybridlink.h"

int main(void) {
    HlScenario *sc = NULL;
    HlRun *run = NULL;
    const char *cfg = "{\"duration_ms\": 4000, \"switch_schedule\": ["
        "{\"t_ms\": 1000, \"target\": \"wifi\", \"align\": \"frame_start\"},"
        "{\"t_ms\": 2500, \"target\": \"ble\", \"align\": \"frame_start\"}]}";
    if (hl_scenario_from_json(cfg, &sc) != HL_STATUS_OK) return 10;
    if (hl_scenario_set(sc, "seed=9") != HL_STATUS_OK) return 11;
    if (hl_scenario_set(sc, "wifi.band=7") != HL_STATUS_CONFIG) return 12;
    if (strstr(hl_last_error_message(), "wifi.band") == NULL) return 13;
    if (hl_run(sc, &run) != HL_STATUS_OK) return 14;
    size_t n = 0;
    if (hl_run_switch_count(run, &n) != HL_STATUS_OK || n != 2) return 15;
    double lat = 0.0;
    if (hl_run_switch_latency_ms(run, 0, &lat) != HL_STATUS_OK) return 16;
    bool pass = false;
    if (hl_run_integrity_pass(run, &pass) != HL_STATUS_OK || !pass) return 17;
    char *summary = NULL;
    if (hl_run_summary_json(run, &summary) != HL_STATUS_OK) return 18;
    int has_pass = strstr(summary, "\"PASS\"") != NULL;
    hl_string_free(summary);
    hl_run_free(run);
    hl_scenario_free(sc);
    printf("%s %.1f\n", hl_version(), lat);
    return has_pass ? 0 : 19;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler found; skipping");
        return;
    }
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().and_then(|p| p.parent()).unwrap().to_path_buf();
    let lib = lib_dir.join("libhybridlink_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let out = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "compile failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert_eq!(stdout.trim(), format!("{} 371.6", env!("CARGO_PKG_VERSION")));
}
