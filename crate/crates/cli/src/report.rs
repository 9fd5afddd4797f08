//! Log-log charts of sweep CSVs as plain SVG, plus a markdown table.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use kakeya_core::verify::{fit_exponent, Fit, SweepRow};

use crate::output::{OutDir, Outcome};
use crate::ReportArgs;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 44.0;
const BOTTOM: f64 = 56.0;

#[derive(Deserialize, Default)]
struct SiblingSummary {
    operator: Option<String>,
    family: Option<String>,
    bound_slope: Option<f64>,
    margin: Option<f64>,
}

pub fn read_rows(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<SweepRow>, _>>()
        .with_context(|| format!("malformed sweep CSV {}", path.display()))?;
    if rows.is_empty() {
        bail!("{} has no rows", path.display());
    }
    if let Some(bad) = rows.iter().find(|r| !(r.delta > 0.0 && r.ratio > 0.0)) {
        bail!("{}: delta and ratio must be positive, got {} and {}", path.display(), bad.delta, bad.ratio);
    }
    Ok(rows)
}

fn sibling(path: &Path) -> SiblingSummary {
    let p = path.with_file_name("summary.json");
    std::fs::read_to_string(p).ok().and_then(|t| serde_json::from_str(&t).ok()).unwrap_or_default()
}

/// Numbers on the chart: fixed notation in a readable range, else scientific.
fn label(v: f64) -> String {
    if v == 0.0 || (1e-2..1e4).contains(&v.abs()) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn span(values: &[f64], pad: f64) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi - lo < 1e-9 { (lo - 0.25, hi + 0.25) } else { (lo, hi) };
    let d = (hi - lo) * pad;
    (lo - d, hi + d)
}

/// One chart: `log₁₀ ratio` against `log₁₀(1/δ)`, with the least-squares
/// line when there are at least three rows, and reference lines of slope
/// `bound` and `bound + margin` through the coarsest point.
pub fn svg(title: &str, rows: &[SweepRow], fit: Option<&Fit>, bound: Option<f64>, margin: f64) -> String {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| ((1.0 / r.delta).log10(), r.ratio.log10())).collect();
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let (x0, x1) = span(&xs, 0.05);
    let (dx0, dx1) = (
        xs.iter().copied().fold(f64::INFINITY, f64::min),
        xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    // lines in log10 coordinates
    let mut lines: Vec<(&str, &str, f64, f64)> = Vec::new();
    if let Some(f) = fit {
        lines.push(("fit", "#1f77b4", f.slope, f.intercept / std::f64::consts::LN_10));
    }
    if let (Some(b), Some(&(px, py))) = (bound, pts.iter().min_by(|a, b| a.0.total_cmp(&b.0))) {
        lines.push(("bound", "#d62728", b, py - b * px));
        if margin > 0.0 {
            lines.push(("bound + margin", "#ff7f0e", b + margin, py - (b + margin) * px));
        }
    }
    let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    for &(_, _, s, c) in &lines {
        ys.push(s * dx0 + c);
        ys.push(s * dx1 + c);
    }
    let (y0, y1) = span(&ys, 0.08);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * (WIDTH - LEFT - RIGHT);
    let sy = |y: f64| HEIGHT - BOTTOM - (y - y0) / (y1 - y0) * (HEIGHT - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let (ax0, ax1, ay0, ay1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        s,
        r##"<path d="M{ax0:.2},{ay0:.2} L{ax0:.2},{ay1:.2} L{ax1:.2},{ay1:.2}" fill="none" stroke="#333"/>"##
    );
    let mut ticks: Vec<f64> = xs.clone();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    for x in ticks {
        let px = sx(x);
        let _ = writeln!(s, r##"<path d="M{px:.2},{ay1:.2} L{px:.2},{:.2}" stroke="#333"/>"##, ay1 + 5.0);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, ay1 + 19.0, label(10f64.powf(x)));
    }
    for i in 0..5 {
        let y = y0 + (y1 - y0) * (i as f64 + 0.5) / 5.0;
        let py = sy(y);
        let _ = writeln!(s, r##"<path d="M{:.2},{py:.2} L{ax0:.2},{py:.2}" stroke="#333"/>"##, ax0 - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, ax0 - 8.0, py + 4.0, label(10f64.powf(y)));
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">1/delta</text>"#, (ax0 + ax1) / 2.0, HEIGHT - 14.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">norm ratio</text>"#,
        (ay0 + ay1) / 2.0,
        (ay0 + ay1) / 2.0
    );
    for (k, &(name, color, slope, c)) in lines.iter().enumerate() {
        let dash = match name {
            "fit" => "",
            "bound" => r#" stroke-dasharray="6 4""#,
            _ => r#" stroke-dasharray="2 3""#,
        };
        let _ = writeln!(
            s,
            r#"<path d="M{:.2},{:.2} L{:.2},{:.2}" stroke="{color}" stroke-width="1.5" fill="none"{dash}/>"#,
            sx(dx0),
            sy(slope * dx0 + c),
            sx(dx1),
            sy(slope * dx1 + c)
        );
        let ly = TOP + 14.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<path d="M{:.2},{ly:.2} L{:.2},{ly:.2}" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            ax0 + 12.0,
            ax0 + 36.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{name} slope {slope:.4}</text>"#, ax0 + 42.0, ly + 4.0);
    }
    for &(x, y) in &pts {
        let _ = writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="#111"/>"##, sx(x), sy(y));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn report(a: &ReportArgs) -> Result<(serde_json::Value, Outcome)> {
    let mut charts = Vec::new();
    for path in &a.csv {
        let rows = read_rows(path)?;
        let meta = sibling(path);
        charts.push((path, rows, meta));
    }
    let dir = OutDir::create(&a.out)?;
    let mut md = String::from("# Sweep report\n\n");
    md.push_str("| chart | operator | family | rows | slope | residual | reference slope | margin |\n");
    md.push_str("|---|---|---|---|---|---|---|---|\n");
    for (i, (path, rows, meta)) in charts.iter().enumerate() {
        let fit = if rows.len() >= 3 { Some(fit_exponent(rows)?) } else { None };
        let bound = a.bound_slope.or(meta.bound_slope);
        let margin = a.margin.or(meta.margin).unwrap_or(0.2);
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
        let operator = meta.operator.clone().unwrap_or_else(|| stem.to_string());
        let title = match &meta.family {
            Some(f) => format!("{operator} on {f}"),
            None => operator.clone(),
        };
        let name = format!("chart{}_{}.svg", i + 1, operator);
        dir.write_text(&name, &svg(&title, rows, fit.as_ref(), bound, margin))?;
        let cell = |v: Option<f64>| v.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            md,
            "| [{name}]({name}) | {operator} | {} | {} | {} | {} | {} | {margin} |",
            meta.family.as_deref().unwrap_or("-"),
            rows.len(),
            cell(fit.as_ref().map(|f| f.slope)),
            cell(fit.as_ref().map(|f| f.residual)),
            cell(bound),
        );
    }
    dir.write_text("report.md", &md)?;
    let params = serde_json::json!({ "csv": a.csv, "bound_slope": a.bound_slope, "margin": a.margin });
    Ok((params, Outcome::from_failures(vec![])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(slope: f64) -> Vec<SweepRow> {
        [0.125, 0.0625, 0.03125]
            .iter()
            .map(|&delta: &f64| {
                let ratio = 2.0 * delta.powf(-slope);
                SweepRow { delta, p: 2.0, q: 2.0, in_norm: 1.0, out_norm: ratio, ratio }
            })
            .collect()
    }

    #[test]
    fn labels() {
        assert_eq!(label(8.0), "8");
        assert_eq!(label(1.25), "1.25");
        assert_eq!(label(3.0e-5), "3.00e-5");
    }

    #[test]
    fn fit_line_runs_through_an_exact_power_law() {
        let r = rows(0.5);
        let fit = fit_exponent(&r).unwrap();
        let a = svg("t", &r, Some(&fit), Some(0.5), 0.0);
        // fit and bound coincide, so both paths have the same endpoints
        let paths: Vec<&str> = a.lines().filter(|l| l.contains("stroke-width=\"1.5\" fill=\"none\"")).collect();
        assert_eq!(paths.len(), 2);
        let d = |l: &str| l.split('"').nth(1).unwrap().to_string();
        assert_eq!(d(paths[0]), d(paths[1]));
        assert_eq!(a, svg("t", &r, Some(&fit), Some(0.5), 0.0));
    }
}
