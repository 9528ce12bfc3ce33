//! Deterministic SVG line charts from CSV columns.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub x: String,
    pub columns: Vec<String>,
    pub log_x: bool,
    pub title: Option<String>,
}

/// Reads the requested columns; errors name the first missing column.
fn read_columns(csv_path: &Path, spec: &PlotSpec) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut reader =
        csv::Reader::from_path(csv_path).with_context(|| format!("opening {}", csv_path.display()))?;
    let headers = reader.headers()?.clone();
    let index = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).with_context(|| {
            format!("missing column `{name}` in {} (have: {})", csv_path.display(), headers.iter().collect::<Vec<_>>().join(","))
        })
    };
    let xi = index(&spec.x)?;
    let yi: Vec<usize> = spec.columns.iter().map(|c| index(c)).collect::<Result<_>>()?;
    let mut xs = Vec::new();
    let mut ys = vec![Vec::new(); yi.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let get = |i: usize| -> f64 { record.get(i).and_then(|s| s.trim().parse().ok()).unwrap_or(f64::NAN) };
        let x = get(xi);
        if !x.is_finite() {
            bail!("row {}: non-numeric `{}` value", row + 2, spec.x);
        }
        xs.push(x);
        for (k, &i) in yi.iter().enumerate() {
            ys[k].push(get(i));
        }
    }
    if xs.is_empty() {
        bail!("no rows in {}", csv_path.display());
    }
    Ok((xs, ys))
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let (k0, k1) = ((lo / step).ceil() as i64, (hi / step + 1e-9).floor() as i64);
    (k0..=k1).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    crate::numfmt::g6(v)
}

/// Renders the chart; the output depends only on the inputs.
pub fn render_svg(xs: &[f64], ys: &[Vec<f64>], spec: &PlotSpec) -> Result<String> {
    if spec.log_x && xs.iter().any(|&x| x <= 0.0) {
        bail!("log x axis needs positive `{}` values", spec.x);
    }
    let tx = |x: f64| if spec.log_x { x.log10() } else { x };
    let (x_lo, x_hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(tx(x)), b.max(tx(x))));
    let finite = ys.iter().flatten().filter(|v| v.is_finite());
    let (mut y_lo, mut y_hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    if !y_lo.is_finite() {
        bail!("no finite values in the requested columns");
    }
    if y_hi == y_lo {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    let x_span = if x_hi > x_lo { x_hi - x_lo } else { 1.0 };
    let px = |x: f64| MARGIN + (tx(x) - x_lo) / x_span * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#)?;
    writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#)?;
    if let Some(t) = &spec.title {
        writeln!(s, r#"<text x="{}" y="30" font-size="16" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(t))?;
    }
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    writeln!(s, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t)?;
    for v in nice_ticks(x_lo, x_hi) {
        let x = MARGIN + (v - x_lo) / x_span * (WIDTH - 2.0 * MARGIN);
        let text = if spec.log_x { format!("1e{}", v.round()) } else { label(v) };
        if spec.log_x && (v - v.round()).abs() > 1e-9 {
            continue;
        }
        writeln!(s, r#"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, b + 5.0)?;
        writeln!(s, r#"<text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{text}</text>"#, b + 18.0)?;
    }
    for v in nice_ticks(y_lo, y_hi) {
        let y = py(v);
        writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{l}" y2="{y:.2}" stroke="black"/>"#, l - 5.0)?;
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#, l - 8.0, y + 4.0, label(v))?;
    }
    let x_title = if spec.log_x { format!("{} (log)", spec.x) } else { spec.x.clone() };
    writeln!(s, r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 15.0, escape(&x_title))?;
    for (k, (col, name)) in ys.iter().zip(&spec.columns).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = xs
            .iter()
            .zip(col)
            .filter(|(_, y)| y.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, points.join(" "))?;
        let ly = t + 15.0 + 16.0 * k as f64;
        writeln!(s, r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, r - 110.0, r - 90.0)?;
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="12">{}</text>"#, r - 85.0, ly + 4.0, escape(name))?;
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn plot_svg(csv_path: &Path, spec: &PlotSpec, out_path: &Path) -> Result<()> {
    if spec.columns.is_empty() {
        bail!("no columns requested");
    }
    let (xs, ys) = read_columns(csv_path, spec)?;
    let svg = render_svg(&xs, &ys, spec)?;
    std::fs::write(out_path, svg).with_context(|| format!("writing {}", out_path.display()))?;
    Ok(())
}
