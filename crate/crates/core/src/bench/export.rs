use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use super::suite::{Aggregate, BenchmarkReport, TrialRecord};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 11] = [
    "instance_id",
    "n",
    "solver",
    "trial",
    "seed",
    "best_length",
    "optimal_length",
    "ratio",
    "duration_s",
    "energy_j",
    "evals",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
    /// Three charts written into the destination directory.
    Svg,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            "svg" => Ok(ExportFormat::Svg),
            other => Err(Error::UnsupportedFormat(format!(
                "export format {other:?} (expected csv, json or svg)"
            ))),
        }
    }
}

/// Writes `report` to `path` and returns the files written. For
/// [`ExportFormat::Svg`] `path` is a directory.
pub fn export_report(report: &BenchmarkReport, format: ExportFormat, path: &Path) -> Result<Vec<PathBuf>> {
    match format {
        ExportFormat::Csv => {
            write_atomic(path, records_csv(&report.records)?.as_bytes())?;
            Ok(vec![path.to_path_buf()])
        }
        ExportFormat::Json => {
            write_atomic(path, report_json(report)?.as_bytes())?;
            Ok(vec![path.to_path_buf()])
        }
        ExportFormat::Svg => {
            std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))?;
            let mut out = Vec::new();
            for (metric, svg) in svg_charts(report) {
                let file = path.join(format!("{metric}.svg"));
                write_atomic(&file, svg.as_bytes())?;
                out.push(file);
            }
            Ok(out)
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Per-trial CSV; missing lengths and ratios are empty cells.
pub fn records_csv(records: &[TrialRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.instance_id.clone(),
            r.n.to_string(),
            r.solver.clone(),
            r.trial.to_string(),
            r.seed.to_string(),
            opt(r.best_length),
            opt(r.optimal_length),
            opt(r.ratio),
            r.duration_s.to_string(),
            r.energy_j.to_string(),
            r.evals.to_string(),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidInput(format!("csv buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn report_json(report: &BenchmarkReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn read_report(path: &Path) -> Result<BenchmarkReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes to a temporary file in the destination directory, then renames
/// it into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

type Series = BTreeMap<String, Vec<(f64, f64)>>;

/// Solver → (n, metric) points, averaging instances of equal size.
fn series(aggs: &[Aggregate], metric: impl Fn(&Aggregate) -> Option<f64>) -> Series {
    let mut acc: BTreeMap<String, BTreeMap<usize, (f64, usize)>> = BTreeMap::new();
    for a in aggs {
        if let Some(v) = metric(a) {
            let slot = acc.entry(a.solver.clone()).or_default().entry(a.n).or_default();
            slot.0 += v;
            slot.1 += 1;
        }
    }
    acc.into_iter()
        .map(|(s, pts)| {
            let pts = pts
                .into_iter()
                .map(|(n, (sum, k))| (n as f64, sum / k as f64))
                .collect();
            (s, pts)
        })
        .collect()
}

/// Ratio, runtime and energy against instance size, one line per solver.
pub fn svg_charts(report: &BenchmarkReport) -> Vec<(&'static str, String)> {
    let aggs = &report.aggregates;
    let profile = &report.metadata.energy_profile;
    vec![
        (
            "ratio",
            line_chart("Approximation ratio vs n", "mean ratio", &series(aggs, |a| a.mean_ratio)),
        ),
        (
            "runtime",
            line_chart(
                "Runtime vs n",
                "mean runtime (s)",
                &series(aggs, |a| (a.completed > 0).then_some(a.mean_duration_s)),
            ),
        ),
        (
            "energy",
            line_chart(
                &format!("Estimated energy vs n ({profile} profile)"),
                "mean energy (J)",
                &series(aggs, |a| (a.completed > 0).then_some(a.mean_energy_j)),
            ),
        ),
    ]
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn line_chart(title: &str, y_label: &str, data: &Series) -> String {
    let (w, h) = (640.0, 400.0);
    let (left, right, top, bottom) = (80.0, 150.0, 40.0, 50.0);
    let pw = w - left - right;
    let ph = h - top - bottom;

    let pts = data.values().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    let pad = ((y1 - y0) * 0.05).max(y1.abs() * 0.05).max(1e-300);
    y0 -= pad;
    y1 += pad;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        left + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let v = y0 + (y1 - y0) * i as f64 / 4.0;
        let y = sy(v);
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            left + pw,
            left - 6.0,
            y + 4.0,
            tick(v)
        );
    }
    let mut xs: Vec<f64> = data.values().flatten().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for x in xs {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{x}</text>"#,
            sx(x),
            top + ph + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">n (cities)</text>"#,
        left + pw / 2.0,
        h - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(18 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        top + ph / 2.0,
        escape(y_label)
    );
    for (k, (solver, pts)) in data.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#,
            path.join(" ")
        );
        for &(x, y) in pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#,
                sx(x),
                sy(y)
            );
        }
        let ly = top + 10.0 + 18.0 * k as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(solver)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}
