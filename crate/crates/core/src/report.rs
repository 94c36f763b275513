//! SVG figures and a plain-text report from a run's trace and summary, plus
//! optional sweep results.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::radio::{Direction, KB_BYTES};
use crate::stats::fit_line;
use crate::summary::RunSummary;
use crate::sweep::{DepthPoint, SizeSweep};
use crate::trace::TraceRow;

pub const TIMELINE_SVG: &str = "timeline.svg";
pub const DEPTH_SVG: &str = "depth_sweep.svg";
pub const LATENCY_SVG: &str = "latency_vs_size.svg";
pub const REPORT_TXT: &str = "report.txt";

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(255, 127, 14),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
];

fn plot_err(path: &Path) -> impl Fn(String) -> Error + '_ {
    move |msg| Error::io(path, std::io::Error::other(msg))
}

type Column<T> = (&'static str, fn(&T) -> f64);

fn span(values: impl Iterator<Item = f64>) -> Range<f64> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return 0.0..1.0;
    }
    let pad = ((hi - lo) * 0.08).max(1e-3);
    (lo - pad)..(hi + pad)
}

/// Power of both chips and FPS on one time axis, with switch instants marked.
fn timeline(path: &Path, rows: &[TraceRow], summary: &RunSummary) -> Result<()> {
    let err = plot_err(path);
    let root = SVGBackend::new(path, (1000, 900)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| err(e.to_string()))?;
    let panels = root.split_evenly((3, 1));
    let t_range = span(rows.iter().map(|r| r.t_ms));
    let series: [Column<TraceRow>; 3] = [
        ("SoC power (mW)", |r| r.soc_mw),
        ("Companion power (mW)", |r| r.companion_mw),
        ("Received FPS", |r| r.fps),
    ];
    for (i, (label, f)) in series.iter().enumerate() {
        let y = span(rows.iter().map(f).chain([0.0]));
        let mut chart = ChartBuilder::on(&panels[i])
            .margin(12)
            .x_label_area_size(32)
            .y_label_area_size(60)
            .build_cartesian_2d(t_range.clone(), y.clone())
            .map_err(|e| err(e.to_string()))?;
        chart
            .configure_mesh()
            .x_desc("t (ms)")
            .y_desc(*label)
            .draw()
            .map_err(|e| err(e.to_string()))?;
        // step plot: hold each value until the next row
        let mut pts = Vec::with_capacity(rows.len() * 2);
        for w in rows.windows(2) {
            pts.push((w[0].t_ms, f(&w[0])));
            pts.push((w[1].t_ms, f(&w[0])));
        }
        if let Some(last) = rows.last() {
            pts.push((last.t_ms, f(last)));
        }
        chart
            .draw_series(LineSeries::new(pts, PALETTE[i].stroke_width(2)))
            .map_err(|e| err(e.to_string()))?;
        for sw in &summary.switch_events {
            for t in [sw.requested_at_ms, sw.completed_at_ms] {
                chart
                    .draw_series(LineSeries::new(vec![(t, y.start), (t, y.end)], BLACK.mix(0.3)))
                    .map_err(|e| err(e.to_string()))?;
            }
        }
    }
    root.present().map_err(|e| err(e.to_string()))
}

/// Throughput, RSSI and total power against depth, one line per mode.
fn depth_panels(path: &Path, points: &[DepthPoint]) -> Result<()> {
    let err = plot_err(path);
    let root = SVGBackend::new(path, (1000, 900)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| err(e.to_string()))?;
    let panels = root.split_evenly((3, 1));
    let mut modes: Vec<&str> = Vec::new();
    for p in points {
        if !modes.contains(&p.mode.as_str()) {
            modes.push(&p.mode);
        }
    }
    let x = span(points.iter().map(|p| p.depth_cm));
    let metrics: [Column<DepthPoint>; 3] = [
        ("Throughput (kbps)", |p| p.throughput_kbps),
        ("RSSI (dBm)", |p| p.rssi_dbm),
        ("Total power (mW)", |p| p.power_mw),
    ];
    for (i, (label, f)) in metrics.iter().enumerate() {
        let y = span(points.iter().map(f));
        let mut chart = ChartBuilder::on(&panels[i])
            .margin(12)
            .x_label_area_size(32)
            .y_label_area_size(60)
            .build_cartesian_2d(x.clone(), y)
            .map_err(|e| err(e.to_string()))?;
        chart
            .configure_mesh()
            .x_desc("Depth (cm)")
            .y_desc(*label)
            .draw()
            .map_err(|e| err(e.to_string()))?;
        for (m, mode) in modes.iter().enumerate() {
            let color = PALETTE[m % PALETTE.len()];
            let pts: Vec<(f64, f64)> = points
                .iter()
                .filter(|p| p.mode == *mode)
                .map(|p| (p.depth_cm, f(p)))
                .collect();
            chart
                .draw_series(LineSeries::new(pts.clone(), color.stroke_width(2)))
                .map_err(|e| err(e.to_string()))?
                .label(*mode)
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color));
            chart
                .draw_series(pts.into_iter().map(|p| Circle::new(p, 3, color.filled())))
                .map_err(|e| err(e.to_string()))?;
        }
        if i == 0 {
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.85))
                .border_style(BLACK)
                .draw()
                .map_err(|e| err(e.to_string()))?;
        }
    }
    root.present().map_err(|e| err(e.to_string()))
}

/// (size KB, mean, std) per direction.
type LatencyPoints = Vec<(Direction, Vec<(f64, f64, f64)>)>;

fn latency_points(summary: &RunSummary, sweep: Option<&SizeSweep>) -> LatencyPoints {
    [Direction::BleToWifi, Direction::WifiToBle]
        .into_iter()
        .map(|dir| {
            let pts = match sweep {
                Some(s) => s
                    .points
                    .iter()
                    .filter(|p| p.direction == dir)
                    .map(|p| (p.size_kb, p.mean_ms, p.std_ms))
                    .collect(),
                None => summary
                    .switch_events
                    .iter()
                    .filter(|e| Direction::new(e.from, e.to) == Some(dir))
                    .map(|e| (e.residual_bytes as f64 / KB_BYTES, e.latency_ms, 0.0))
                    .collect(),
            };
            (dir, pts)
        })
        .filter(|(_, pts): &(Direction, Vec<_>)| !pts.is_empty())
        .collect()
}

/// Latency against image size with error bars and least-squares lines.
fn latency_panel(path: &Path, data: &LatencyPoints) -> Result<()> {
    let err = plot_err(path);
    let root = SVGBackend::new(path, (1000, 450 * data.len() as u32)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| err(e.to_string()))?;
    let panels = root.split_evenly((data.len(), 1));
    for (i, (dir, pts)) in data.iter().enumerate() {
        let color = PALETTE[i];
        let x = span(pts.iter().map(|p| p.0).chain([0.0]));
        let y = span(pts.iter().flat_map(|p| [p.1 - p.2, p.1 + p.2]).chain([0.0]));
        let mut chart = ChartBuilder::on(&panels[i])
            .caption(dir.as_str(), ("sans-serif", 18))
            .margin(12)
            .x_label_area_size(32)
            .y_label_area_size(60)
            .build_cartesian_2d(x.clone(), y)
            .map_err(|e| err(e.to_string()))?;
        chart
            .configure_mesh()
            .x_desc("Image size (KB)")
            .y_desc("Switching latency (ms)")
            .draw()
            .map_err(|e| err(e.to_string()))?;
        chart
            .draw_series(
                pts.iter()
                    .map(|&(s, m, sd)| ErrorBar::new_vertical(s, m - sd, m, m + sd, color.filled(), 8)),
            )
            .map_err(|e| err(e.to_string()))?;
        let xy: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, p.1)).collect();
        if let Some(line) = fit_line(&xy) {
            chart
                .draw_series(LineSeries::new(
                    [x.start, x.end].map(|s| (s, line.eval(s))),
                    color.stroke_width(2),
                ))
                .map_err(|e| err(e.to_string()))?;
        }
    }
    root.present().map_err(|e| err(e.to_string()))
}

fn text_report(
    summary: &RunSummary,
    sizes: Option<&SizeSweep>,
    depths: Option<&[DepthPoint]>,
    latency_plotted: bool,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "hybridlink report");
    let _ = writeln!(s, "=================\n");
    let _ = writeln!(s, "integrity: {:?}", summary.integrity);
    let f = &summary.frames;
    let _ = writeln!(
        s,
        "frames: {} emitted, {} delivered, {} integrity errors, {} mid-frame switches",
        f.emitted, f.delivered, f.integrity_errors, f.mid_frame_switches
    );
    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.3}"));
    let _ = writeln!(
        s,
        "steady FPS: ble {}, wifi {}",
        fmt(summary.fps.ble),
        fmt(summary.fps.wifi)
    );
    let _ = writeln!(s, "\nswitch events");
    if summary.switch_events.is_empty() {
        let _ = writeln!(s, "  none");
    }
    for e in &summary.switch_events {
        let _ = writeln!(
            s,
            "  {}>{}  requested {:.3} ms  completed {:.3} ms  latency {:.3} ms  residual {} B",
            e.from, e.to, e.requested_at_ms, e.completed_at_ms, e.latency_ms, e.residual_bytes
        );
    }
    let en = &summary.energy_mj;
    let _ = writeln!(s, "\nenergy (mJ)");
    let _ = writeln!(
        s,
        "  ble_streaming {:.3}  wifi_streaming {:.3}  pending {:.3}  switch_gap {:.3}",
        en.ble_streaming, en.wifi_streaming, en.pending, en.switch_gap
    );
    let _ = writeln!(
        s,
        "  soc {:.3}  companion {:.3}  total {:.3}",
        en.soc_total, en.companion_total, en.total
    );
    let _ = writeln!(
        s,
        "  note: active power values are calibration constants; standby and companion-idle values are measured"
    );
    if let Some(sw) = sizes {
        let _ = writeln!(
            s,
            "\nlatency vs image size ({} randomized repeats + 1 frame-start run)",
            sw.repeats
        );
        for p in &sw.points {
            let _ = writeln!(
                s,
                "  {:>11} {:>6.1} KB  frame-start {:>8.3} ms  mean {:>8.3} ms  std {:>7.3} ms",
                p.direction.as_str(),
                p.size_kb,
                p.frame_start_ms,
                p.mean_ms,
                p.std_ms
            );
        }
        let _ = writeln!(
            s,
            "  slopes (frame-start): ble_to_wifi {} ms/KB, wifi_to_ble {} ms/KB",
            fmt(sw.slopes_ms_per_kb.ble_to_wifi),
            fmt(sw.slopes_ms_per_kb.wifi_to_ble)
        );
    }
    if !latency_plotted {
        let _ = writeln!(s, "\nno switch events or size sweep: latency figure omitted");
    }
    if let Some(ds) = depths {
        let _ = writeln!(s, "\ndepth sweep (steady state)");
        for p in ds {
            let _ = writeln!(
                s,
                "  {:<22} {:>5.1} cm  {:>9.2} kbps  rssi {:>8.2} dBm  txp {:>6.2} dBm  power {:>8.2} mW  standby {:>7.2} mW{}",
                p.mode,
                p.depth_cm,
                p.throughput_kbps,
                p.rssi_dbm,
                p.txp_dbm,
                p.power_mw,
                p.standby_mw,
                if p.extrapolated { "  (extrapolated)" } else { "" }
            );
        }
    }
    s
}

/// Files written by [`render_report`].
#[derive(Debug, Clone, Default)]
pub struct ReportFiles {
    pub files: Vec<PathBuf>,
    pub text: String,
}

pub fn render_report(
    out_dir: &Path,
    rows: &[TraceRow],
    summary: &RunSummary,
    sizes: Option<&SizeSweep>,
    depths: Option<&[DepthPoint]>,
) -> Result<ReportFiles> {
    if rows.is_empty() {
        return Err(Error::Trace("trace has no rows".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = Vec::new();

    let p = out_dir.join(TIMELINE_SVG);
    timeline(&p, rows, summary)?;
    files.push(p);

    if let Some(ds) = depths.filter(|d| !d.is_empty()) {
        let p = out_dir.join(DEPTH_SVG);
        depth_panels(&p, ds)?;
        files.push(p);
    }

    let lat = latency_points(summary, sizes);
    if !lat.is_empty() {
        let p = out_dir.join(LATENCY_SVG);
        latency_panel(&p, &lat)?;
        files.push(p);
    }

    let text = text_report(summary, sizes, depths, !lat.is_empty());
    let p = out_dir.join(REPORT_TXT);
    std::fs::write(&p, &text).map_err(|e| Error::io(&p, e))?;
    files.push(p);
    Ok(ReportFiles { files, text })
}
