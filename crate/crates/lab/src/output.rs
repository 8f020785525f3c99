//! CSV, JSON and SVG writers for experiment reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use stochfrac::turbulence::{write_snapshot_binary, write_snapshot_csv};
use stochfrac::ExperimentReport;

use crate::experiments::Outcome;

pub const CSV_HEADER: &str = "experiment,param,n,metric,value,stderr";

/// One metric per row. Fitted slopes follow the data rows with an empty `n`,
/// metric `slope(<metric>)`, the slope as value and its 95% half-width as
/// stderr.
pub fn render_csv(report: &ExperimentReport) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in &report.rows {
        let _ = writeln!(s, "{},{},{},{},{},{}", report.experiment, r.param, r.n, r.metric, r.value, r.stderr);
    }
    for f in &report.fits {
        let _ = writeln!(
            s,
            "{},{},,slope({}),{},{}",
            report.experiment, f.param, f.metric, f.fit.slope, f.fit.half_width
        );
    }
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// Log-log line plot with one polyline per `(param, metric)` series that has
/// at least two positive points. Fitted slopes are listed under the legend.
pub fn render_svg(report: &ExperimentReport) -> String {
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for r in &report.rows {
        if !(r.n > 0.0 && r.value > 0.0) {
            continue;
        }
        let label = format!("{} {}", r.param, r.metric);
        match series.iter_mut().find(|(l, _)| *l == label) {
            Some((_, pts)) => pts.push((r.n.log10(), r.value.log10())),
            None => series.push((label, vec![(r.n.log10(), r.value.log10())])),
        }
    }
    series.retain(|(_, p)| p.len() >= 2);

    let (w, h, m) = (720.0, 480.0, 60.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{} (log10-log10)</text>"#,
        w / 2.0,
        escape(&report.experiment)
    );
    if series.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let all = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (x, y) in all {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    let plot_w = w - 2.0 * m - 180.0;
    let px = |x: f64| m + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let _ = writeln!(
        s,
        r#"<rect x="{m}" y="{m}" width="{plot_w}" height="{}" fill="none" stroke="black"/>"#,
        h - 2.0 * m
    );
    for (x, anchor, y) in [(x0, "start", h - m + 16.0), (x1, "end", h - m + 16.0)] {
        let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="{anchor}">{x:.2}</text>"#, px(x));
    }
    for (y, yy) in [(y0, py(y0)), (y1, py(y1) + 10.0)] {
        let _ = writeln!(s, r#"<text x="{}" y="{yy}" text-anchor="end">{y:.2}</text>"#, m - 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">log10 n</text>"#, m + plot_w / 2.0, h - 20.0);
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let ly = m + 14.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}">{}</text>"#,
            m + plot_w + 10.0,
            escape(label)
        );
    }
    let mut ly = m + 14.0 * series.len() as f64 + 14.0;
    for f in &report.fits {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}">{} slope({}) = {:.3} ± {:.3}</text>"#,
            m + plot_w + 10.0,
            escape(&f.param),
            escape(&f.metric),
            f.fit.slope,
            f.fit.half_width
        );
        ly += 14.0;
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `<exp>.csv`, `<exp>.config.json`, optionally `<exp>.svg`, and any
/// field snapshots into `dir`. Returns the written paths.
pub fn write_outputs(outcome: &Outcome, dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let report = &outcome.report;
    let stem = report.experiment.clone();
    let mut written = Vec::new();

    let csv = dir.join(format!("{stem}.csv"));
    fs::write(&csv, render_csv(report)).with_context(|| format!("writing {}", csv.display()))?;
    written.push(csv);

    let cfg = dir.join(format!("{stem}.config.json"));
    let echo = serde_json::to_string_pretty(&report.config_echo)? + "\n";
    fs::write(&cfg, echo).with_context(|| format!("writing {}", cfg.display()))?;
    written.push(cfg);

    if svg {
        let path = dir.join(format!("{stem}.svg"));
        fs::write(&path, render_svg(report)).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }

    for (name, field) in &outcome.snapshots {
        let path = dir.join(format!("{stem}.{name}.csv"));
        let mut buf = Vec::new();
        write_snapshot_csv(field, &mut buf)?;
        fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
        let path = dir.join(format!("{stem}.{name}.bin"));
        let mut buf = Vec::new();
        write_snapshot_binary(field, &mut buf)?;
        fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}
