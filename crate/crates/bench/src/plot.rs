//! Minimal deterministic SVG line plots.

use std::fmt::Write;

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub id: String,
    /// Value at rounds `1..=len`.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotStyle {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: u32,
    pub height: u32,
}

impl Default for PlotStyle {
    fn default() -> Self {
        Self {
            title: String::new(),
            x_label: "t".into(),
            y_label: String::new(),
            width: 720,
            height: 440,
        }
    }
}

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// One polyline per series over a shared round axis. All series must have
/// the same nonzero length and finite values.
pub fn emit_plot(series: &[Series], style: &PlotStyle) -> Result<String> {
    let Some(first) = series.first() else {
        return Err(BenchError::Plot("nothing to plot".into()));
    };
    let len = first.values.len();
    if len == 0 {
        return Err(BenchError::Plot("series are empty".into()));
    }
    if let Some(s) = series.iter().find(|s| s.values.len() != len) {
        return Err(BenchError::Plot(format!(
            "series {:?} has {} points, expected {len}",
            s.id,
            s.values.len()
        )));
    }
    if series.iter().flat_map(|s| &s.values).any(|v| !v.is_finite()) {
        return Err(BenchError::Plot("non-finite value".into()));
    }

    let (mut lo, mut hi) = series
        .iter()
        .flat_map(|s| &s.values)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
    if hi - lo < 1e-12 {
        lo -= 1.0;
        hi += 1.0;
    }
    let ticks = nice_ticks(lo, hi, 5);
    lo = lo.min(ticks[0]);
    hi = hi.max(*ticks.last().expect("nonempty"));

    let w = f64::from(style.width);
    let h = f64::from(style.height);
    let pw = w - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = h - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |t: usize| {
        if len == 1 {
            MARGIN_LEFT + pw / 2.0
        } else {
            MARGIN_LEFT + pw * (t - 1) as f64 / (len - 1) as f64
        }
    };
    let y_of = |v: f64| MARGIN_TOP + ph * (hi - v) / (hi - lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="12">"#,
        style.width, style.height, style.width, style.height
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        w / 2.0,
        escape(&style.title)
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN_LEFT:.1}" y="{MARGIN_TOP:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="#444"/>"##
    );
    for v in &ticks {
        let y = y_of(*v);
        let _ = writeln!(
            svg,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##,
            MARGIN_LEFT,
            MARGIN_LEFT + pw
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 6.0,
            y + 4.0,
            tick_label(*v)
        );
    }
    for t in round_ticks(len) {
        let x = x_of(t);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{t}</text>"#,
            MARGIN_TOP + ph + 16.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + pw / 2.0,
        h - 10.0,
        escape(&style.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        MARGIN_TOP + ph / 2.0,
        MARGIN_TOP + ph / 2.0,
        escape(&style.y_label)
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| format!("{:.2},{:.2}", x_of(k + 1), y_of(*v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = MARGIN_TOP + 14.0 + 16.0 * i as f64;
        let lx = MARGIN_LEFT + 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/>"#,
            ly - 4.0,
            lx + 20.0,
            ly - 4.0
        );
        let _ = writeln!(
            svg,
            r#"<text class="legend" x="{:.1}" y="{ly:.1}">{}</text>"#,
            lx + 26.0,
            escape(&s.id)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Evenly spaced ticks at multiples of 1, 2 or 5 times a power of ten,
/// covering `[lo, hi]`.
fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let raw = (hi - lo) / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).floor() as i64;
    let end = (hi / step).ceil() as i64;
    (start..=end).map(|k| k as f64 * step).collect()
}

fn round_ticks(len: usize) -> Vec<usize> {
    if len <= 1 {
        return vec![1];
    }
    let step = (len / 5).max(1);
    let mut v: Vec<usize> = (1..=len).filter(|t| t % step == 0).collect();
    if v.first() != Some(&1) {
        v.insert(0, 1);
    }
    v
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
