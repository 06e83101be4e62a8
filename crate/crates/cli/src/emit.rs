//! Report output: CSV table, JSON report and a log-log SVG plot.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::Format;
use crate::report::{Cell, ExperimentReport};
use crate::CliError;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io { path: path.to_path_buf(), source: e }
}

pub fn write_csv(report: &ExperimentReport, path: &Path) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    let to_io = |e: csv::Error| CliError::Io { path: path.to_path_buf(), source: e.into() };
    w.write_record(&report.columns).map_err(to_io)?;
    for row in &report.rows {
        w.write_record(row.iter().map(Cell::to_csv)).map_err(to_io)?;
    }
    w.flush().map_err(io_err(path))
}

/// Header and rows of a CSV written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<Cell>>), CliError> {
    let to_io = |e: csv::Error| CliError::Io { path: path.to_path_buf(), source: e.into() };
    let mut r = csv::Reader::from_path(path).map_err(to_io)?;
    let header = r.headers().map_err(to_io)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(to_io)?.iter().map(Cell::from_csv).collect());
    }
    Ok((header, rows))
}

pub fn write_json(report: &ExperimentReport, path: &Path) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(report).expect("report serialises");
    std::fs::write(path, text + "\n").map_err(io_err(path))
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Points (x, y) per series label, positive finite values only.
pub fn plot_series(report: &ExperimentReport) -> BTreeMap<String, Vec<(f64, f64)>> {
    let mut out: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let Some(spec) = &report.plot else { return out };
    let (Some(ix), Some(iy)) = (report.column(&spec.x), report.column(&spec.y)) else { return out };
    for row in &report.rows {
        if let (Some(x), Some(y)) = (row[ix].as_f64(), row[iy].as_f64()) {
            if x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite() {
                out.entry(report.series_label(row, &spec.series)).or_default().push((x, y));
            }
        }
    }
    out
}

/// Log-log plot: one polyline per series, the fitted line of each fitted
/// series (dashed) and a reference line with the target slope (dotted).
pub fn render_svg(report: &ExperimentReport) -> String {
    let (w, h, m) = (760.0, 500.0, 70.0);
    let series = plot_series(report);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, w / 2.0, escape(report.experiment.name()));
    let pts: Vec<(f64, f64)> = series.values().flatten().copied().collect();
    if pts.is_empty() {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">no plottable data</text>"#, w / 2.0, h / 2.0);
        s += "</svg>\n";
        return s;
    }
    let lx = |x: f64| x.log10();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(lx(x));
        x1 = x1.max(lx(x));
        y0 = y0.min(lx(y));
        y1 = y1.max(lx(y));
    }
    let pad = |a: &mut f64, b: &mut f64| {
        let d = (*b - *a).max(0.2);
        *a -= 0.08 * d;
        *b += 0.08 * d;
    };
    pad(&mut x0, &mut x1);
    pad(&mut y0, &mut y1);
    let px = |x: f64| m + (lx(x) - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - (lx(y) - y0) / (y1 - y0) * (h - 2.0 * m);
    let _ = writeln!(s, r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#, w - 2.0 * m, h - 2.0 * m);
    let spec = report.plot.as_ref().expect("series come from a plot spec");
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{} (log)</text>"#, w / 2.0, h - 20.0, escape(&spec.x));
    let _ = writeln!(s, r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{} (log)</text>"#, h / 2.0, h / 2.0, escape(&spec.y));
    for (lo, hi, is_x) in [(x0, x1, true), (y0, y1, false)] {
        let (a, b) = (lo.ceil() as i32, hi.floor() as i32);
        for e in a..=b {
            let v = 10f64.powi(e);
            if is_x {
                let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">1e{e}</text>"#, px(v), h - m + 16.0);
            } else {
                let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{e}</text>"#, m - 6.0, py(v) + 4.0);
            }
        }
    }
    let clip = |y: f64| y.clamp(m, h - m);
    for (i, (label, p)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut p = p.clone();
        p.sort_by(|a, b| a.0.total_cmp(&b.0));
        let path: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(s, r#"<polyline class="series" data-series="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, escape(label), path.join(" "));
        for &(x, y) in &p {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, px(x), py(y));
        }
        let (xa, xb) = (p[0].0, p[p.len() - 1].0);
        for f in report.fits.iter().filter(|f| &f.series == label) {
            let at = |x: f64| (f.intercept + f.slope * x.ln()).exp();
            let _ = writeln!(
                s,
                r#"<line class="fit" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="6 3"/>"#,
                px(xa),
                clip(py(at(xa))),
                px(xb),
                clip(py(at(xb)))
            );
            // target slope through the geometric centre of the data
            let cx = p.iter().map(|q| q.0.ln()).sum::<f64>() / p.len() as f64;
            let cy = p.iter().map(|q| q.1.ln()).sum::<f64>() / p.len() as f64;
            let tgt = |x: f64| (cy + f.target * (x.ln() - cx)).exp();
            let _ = writeln!(
                s,
                r#"<line class="target" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="2 3"/>"#,
                px(xa),
                clip(py(tgt(xa))),
                px(xb),
                clip(py(tgt(xb)))
            );
        }
        let ly = m + 16.0 + 16.0 * i as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{}</text>"#, w - m - 6.0, escape(label));
    }
    s += "</svg>\n";
    s
}

pub fn write_svg(report: &ExperimentReport, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, render_svg(report)).map_err(io_err(path))
}

/// Writes `<dir>/<experiment>.<ext>` for each format and returns the paths.
pub fn emit(report: &ExperimentReport, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut out = Vec::new();
    for f in formats {
        let (ext, write): (&str, fn(&ExperimentReport, &Path) -> Result<(), CliError>) = match f {
            Format::Csv => ("csv", write_csv),
            Format::Json => ("json", write_json),
            Format::Svg => ("svg", write_svg),
        };
        let path = dir.join(format!("{}.{ext}", report.experiment.name()));
        write(report, &path)?;
        out.push(path);
    }
    Ok(out)
}
