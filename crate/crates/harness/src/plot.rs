//! Deterministic SVG line charts with standard-deviation bands.

use std::fmt::Write;

use sha2::{Digest, Sha256};

use crate::aggregate::AggregateCurve;

/// One plotted line; `None` entries break the line and the band.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, Option<(f64, f64)>)>,
}

impl Series {
    pub fn from_aggregate(name: &str, curve: &AggregateCurve) -> Self {
        Self {
            name: name.to_string(),
            points: curve
                .points
                .iter()
                .map(|p| {
                    let y = (p.mean.is_finite() && p.std.is_finite()).then_some((p.mean, p.std));
                    (p.step as f64, y)
                })
                .collect(),
        }
    }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Fixed colors for the three algorithms, a name hash for anything else.
pub fn series_color(name: &str) -> &'static str {
    match name {
        "IAC" => PALETTE[0],
        "IACC" => PALETTE[1],
        "JAC" => PALETTE[2],
        other => PALETTE[Sha256::digest(other.as_bytes())[0] as usize % PALETTE.len()],
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

/// Render `series` sorted by name into a self-contained SVG document.
pub fn render_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let mut series: Vec<&Series> = series.iter().collect();
    series.sort_by(|a, b| a.name.cmp(&b.name));
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for s in &series {
        for &(x, y) in &s.points {
            if let Some((m, sd)) = y {
                x0 = x0.min(x);
                x1 = x1.max(x);
                y0 = y0.min(m - sd);
                y1 = y1.max(m + sd);
            }
        }
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 <= 0.0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{b:.2}" stroke="#ddd"/><text x="{x:.2}" y="{t:.2}" text-anchor="middle">{}</text>"##,
            tick_label(xv),
            x = sx(xv),
            b = TOP + ph,
            t = TOP + ph + 16.0
        );
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{r:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{l:.2}" y="{ty:.2}" text-anchor="end">{}</text>"##,
            tick_label(yv),
            y = sy(yv),
            r = LEFT + pw,
            l = LEFT - 6.0,
            ty = sy(yv) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + ph / 2.0,
        escape(y_label)
    );
    for (idx, s) in series.iter().enumerate() {
        let color = series_color(&s.name);
        for seg in segments(s) {
            let mut band = String::new();
            for &(x, m, sd) in &seg {
                let _ = write!(band, "{:.2},{:.2} ", sx(x), sy(m + sd));
            }
            for &(x, m, sd) in seg.iter().rev() {
                let _ = write!(band, "{:.2},{:.2} ", sx(x), sy(m - sd));
            }
            let _ = writeln!(
                out,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
                band.trim_end()
            );
            let line: Vec<String> =
                seg.iter().map(|&(x, m, _)| format!("{:.2},{:.2}", sx(x), sy(m))).collect();
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
                line.join(" ")
            );
        }
        let ly = TOP + 14.0 + 20.0 * idx as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="3"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 22.0,
            lx + 28.0,
            ly + 4.0,
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Maximal runs of defined points.
fn segments(s: &Series) -> Vec<Vec<(f64, f64, f64)>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for &(x, y) in &s.points {
        match y {
            Some((m, sd)) => cur.push((x, m, sd)),
            None if !cur.is_empty() => out.push(std::mem::take(&mut cur)),
            None => {}
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}
