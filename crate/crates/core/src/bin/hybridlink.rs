use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use hybridlink::radio::RadioMode;
use hybridlink::report::render_report;
use hybridlink::summary::{verify, RunSummary};
use hybridlink::sweep::{
    default_depths, sweep_depth, sweep_image_size, DepthPoint, SizeSweep, DEFAULT_REPEATS, DEFAULT_SIZES_KB,
};
use hybridlink::trace::{read_trace, write_trace};
use hybridlink::{engine::run_scenario, scenario::Scenario, Error, Result};

const TRACE_CSV: &str = "trace.csv";
const SUMMARY_JSON: &str = "summary.json";
const SWEEP_SIZE_JSON: &str = "sweep_size.json";
const SWEEP_DEPTH_JSON: &str = "sweep_depth.json";

/// Hybrid BLE/Wi-Fi capsule link simulator.
#[derive(Parser)]
#[command(name = "hybridlink", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file. Defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Scenario override, e.g. `wifi.band=5` or `calibration.switch_overhead_wifi_to_ble_ms=4`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and write trace.csv and summary.json.
    Run,
    /// Switching latency against image size.
    SweepSize {
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SIZES_KB)]
        sizes: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_REPEATS)]
        repeats: usize,
    },
    /// Steady-state throughput, RSSI and power against depth for every radio mode.
    SweepDepth {
        #[arg(long, value_delimiter = ',')]
        depths: Option<Vec<f64>>,
    },
    /// Render SVG figures and report.txt from the files in the output directory.
    Report,
    /// Check that summary.json is exactly what trace.csv implies.
    Verify {
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

impl Common {
    fn scenario(&self) -> Result<Scenario> {
        let mut overrides = self.set.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        Scenario::load(self.config.as_deref(), &overrides)
    }

    fn out_dir(&self) -> Result<&Path> {
        std::fs::create_dir_all(&self.out).map_err(|e| io_err(&self.out, e))?;
        Ok(&self.out)
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Option<T>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| Error::Trace(format!("{}: {e}", path.display())))
}

fn read_summary(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn run(common: &Common) -> Result<bool> {
    let sc = common.scenario()?;
    let out = run_scenario(&sc)?;
    let dir = common.out_dir()?;
    write_trace(&dir.join(TRACE_CSV), &out.rows)?;
    write(&dir.join(SUMMARY_JSON), &out.summary_json())?;
    for e in &out.summary.switch_events {
        println!(
            "switch {}>{} requested {:.3} ms completed {:.3} ms latency {:.3} ms",
            e.from, e.to, e.requested_at_ms, e.completed_at_ms, e.latency_ms
        );
    }
    for msg in &out.integrity_errors {
        eprintln!("integrity: {msg}");
    }
    let f = &out.summary.frames;
    println!(
        "frames {}/{} delivered, integrity {:?}",
        f.delivered, f.emitted, out.summary.integrity
    );
    Ok(out.integrity_pass())
}

fn sweep_size(common: &Common, sizes: &[f64], repeats: usize) -> Result<bool> {
    let sc = common.scenario()?;
    let sweep = sweep_image_size(&sc, sizes, repeats)?;
    let dir = common.out_dir()?;
    let json = serde_json::to_string_pretty(&sweep).expect("sweep serializes") + "\n";
    write(&dir.join(SWEEP_SIZE_JSON), &json)?;
    println!(
        "{:<12} {:>8} {:>12} {:>10} {:>9}",
        "direction", "size_kb", "frame_start", "mean", "std"
    );
    for p in &sweep.points {
        println!(
            "{:<12} {:>8.1} {:>12.3} {:>10.3} {:>9.3}",
            p.direction.as_str(),
            p.size_kb,
            p.frame_start_ms,
            p.mean_ms,
            p.std_ms
        );
    }
    let s = sweep.slopes_ms_per_kb;
    println!(
        "slopes ms/KB: ble_to_wifi {:.4} wifi_to_ble {:.4}",
        s.ble_to_wifi.unwrap_or(f64::NAN),
        s.wifi_to_ble.unwrap_or(f64::NAN)
    );
    Ok(true)
}

fn sweep_depth_cmd(common: &Common, depths: Option<Vec<f64>>) -> Result<bool> {
    let sc = common.scenario()?;
    let depths = depths.unwrap_or_else(default_depths);
    let points = sweep_depth(&sc, &depths, &RadioMode::sweep_modes())?;
    let dir = common.out_dir()?;
    let json = serde_json::to_string_pretty(&points).expect("sweep serializes") + "\n";
    write(&dir.join(SWEEP_DEPTH_JSON), &json)?;
    println!(
        "{:<22} {:>6} {:>11} {:>9} {:>8} {:>10}",
        "mode", "depth", "kbps", "rssi", "txp", "power_mw"
    );
    for p in &points {
        println!(
            "{:<22} {:>6.1} {:>11.2} {:>9.2} {:>8.2} {:>10.2}",
            p.mode, p.depth_cm, p.throughput_kbps, p.rssi_dbm, p.txp_dbm, p.power_mw
        );
    }
    Ok(true)
}

fn report(common: &Common) -> Result<bool> {
    let dir = &common.out;
    let rows = read_trace(&dir.join(TRACE_CSV))?;
    let summary = RunSummary::from_json(&read_summary(&dir.join(SUMMARY_JSON))?)?;
    let sizes: Option<SizeSweep> = read_json(&dir.join(SWEEP_SIZE_JSON))?;
    let depths: Option<Vec<DepthPoint>> = read_json(&dir.join(SWEEP_DEPTH_JSON))?;
    let files = render_report(dir, &rows, &summary, sizes.as_ref(), depths.as_deref())?;
    for f in &files.files {
        println!("wrote {}", f.display());
    }
    Ok(true)
}

fn verify_cmd(common: &Common, trace: Option<PathBuf>, summary: Option<PathBuf>) -> Result<bool> {
    let trace = trace.unwrap_or_else(|| common.out.join(TRACE_CSV));
    let summary = summary.unwrap_or_else(|| common.out.join(SUMMARY_JSON));
    let rows = read_trace(&trace)?;
    let json = read_summary(&summary)?;
    verify(&rows, &json)?;
    let s = RunSummary::from_json(&json)?;
    println!("summary matches trace; integrity {:?}", s.integrity);
    Ok(s.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.common;
    let result = match cli.cmd {
        Cmd::Run => run(c),
        Cmd::SweepSize { sizes, repeats } => sweep_size(c, &sizes, repeats),
        Cmd::SweepDepth { depths } => sweep_depth_cmd(c, depths),
        Cmd::Report => report(c),
        Cmd::Verify { trace, summary } => verify_cmd(c, trace, summary),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
