//! Standalone SVG figures with axes, labels and a legend. Coordinates are
//! printed with fixed precision so identical data gives identical bytes.

use std::fmt::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    Line,
    Scatter,
    FieldLines,
    Streamlines,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlotData {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Plot `log10(y)`; non-positive values are dropped.
    pub log_y: bool,
    /// Series sharing a label share a colour and one legend entry.
    pub group_by_label: bool,
}

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("plot has no finite data points")]
    EmptyData,
    #[error("writing {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

/// Render `data` as an SVG document.
pub fn render_svg(kind: PlotKind, data: &PlotData) -> Result<String, PlotError> {
    let series: Vec<(usize, &Series, Vec<[f64; 2]>)> = data
        .series
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let pts = s
                .points
                .iter()
                .filter(|p| !data.log_y || p[1] > 0.0)
                .map(|p| [p[0], if data.log_y { p[1].log10() } else { p[1] }])
                .filter(|p| p[0].is_finite() && p[1].is_finite())
                .collect();
            (k, s, pts)
        })
        .collect();
    let all = series.iter().flat_map(|s| s.2.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in all {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    if !x0.is_finite() {
        return Err(PlotError::EmptyData);
    }
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#, LEFT + pw / 2.0, esc(&data.title)).unwrap();
    writeln!(s, r#"<g class="axes" stroke="black" fill="none"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></g>"#).unwrap();
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let ylab = if data.log_y { format!("1e{fy:.1}") } else { tick(fy) };
        writeln!(s, r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black"/>"#, sx(fx), TOP + ph, TOP + ph + 5.0).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, sx(fx), TOP + ph + 18.0, tick(fx)).unwrap();
        writeln!(s, r#"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="black"/>"#, LEFT - 5.0, sy(fy), LEFT).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, sy(fy) + 4.0, ylab).unwrap();
    }
    writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 10.0, esc(&data.x_label)).unwrap();
    let ylabel = if data.log_y { format!("log10 {}", data.y_label) } else { data.y_label.clone() };
    writeln!(s, r#"<text x="16" y="{0:.1}" text-anchor="middle" transform="rotate(-90 16 {0:.1})">{1}</text>"#, TOP + ph / 2.0, esc(&ylabel)).unwrap();

    let mut labels: Vec<String> = Vec::new();
    let mut colour_of = |k: usize, label: &str| -> usize {
        if !data.group_by_label {
            return k;
        }
        match labels.iter().position(|l| l == label) {
            Some(i) => i,
            None => {
                labels.push(label.to_string());
                labels.len() - 1
            }
        }
    };
    let mut legend: Vec<(usize, String)> = Vec::new();
    for (k, ser, pts) in &series {
        let c = colour_of(*k, &ser.label);
        let colour = PALETTE[c % PALETTE.len()];
        if !legend.iter().any(|(i, _)| *i == c) {
            legend.push((c, ser.label.clone()));
        }
        match kind {
            PlotKind::Scatter => {
                writeln!(s, r#"<g class="series-{k}" data-stroke="{k}" fill="{colour}">"#).unwrap();
                for p in pts {
                    writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2"/>"#, sx(p[0]), sy(p[1])).unwrap();
                }
                writeln!(s, "</g>").unwrap();
            }
            _ => {
                if pts.is_empty() {
                    continue;
                }
                let width = if kind == PlotKind::Line { 2.0 } else { 1.0 };
                let mut d = String::new();
                for p in pts {
                    write!(d, "{:.2},{:.2} ", sx(p[0]), sy(p[1])).unwrap();
                }
                writeln!(
                    s,
                    r#"<polyline class="series-{k}" data-stroke="{k}" fill="none" stroke="{colour}" stroke-width="{width}" points="{}"/>"#,
                    d.trim_end()
                )
                .unwrap();
            }
        }
    }
    for (row, (c, label)) in legend.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * row as f64;
        let colour = PALETTE[c % PALETTE.len()];
        writeln!(s, r#"<rect x="{:.1}" y="{:.1}" width="12" height="12" fill="{colour}"/>"#, W - RIGHT + 12.0, y - 10.0).unwrap();
        writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, W - RIGHT + 30.0, y, esc(label)).unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Render and write an SVG file.
pub fn emit_plot(kind: PlotKind, data: &PlotData, path: &Path) -> Result<(), PlotError> {
    let svg = render_svg(kind, data)?;
    std::fs::write(path, svg).map_err(|source| PlotError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(n: usize) -> PlotData {
        PlotData {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: (0..n).map(|k| Series { label: format!("s{k}"), points: vec![[0.0, k as f64], [1.0, 2.0]] }).collect(),
            ..Default::default()
        }
    }

    #[test]
    fn two_point_line_has_one_polyline() {
        let svg = render_svg(PlotKind::Line, &data(1)).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn byte_deterministic() {
        assert_eq!(render_svg(PlotKind::Scatter, &data(3)).unwrap(), render_svg(PlotKind::Scatter, &data(3)).unwrap());
    }

    #[test]
    fn field_lines_have_distinct_strokes() {
        let svg = render_svg(PlotKind::FieldLines, &data(5)).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 5);
        for k in 0..5 {
            assert_eq!(svg.matches(&format!("data-stroke=\"{k}\"")).count(), 1);
        }
    }

    #[test]
    fn empty_data_rejected() {
        assert!(matches!(render_svg(PlotKind::Line, &PlotData::default()), Err(PlotError::EmptyData)));
        let mut d = data(1);
        d.series[0].points = vec![[f64::NAN, 1.0]];
        assert!(render_svg(PlotKind::Line, &d).is_err());
    }

    #[test]
    fn log_axis_drops_non_positive() {
        let mut d = data(1);
        d.log_y = true;
        d.series[0].points = vec![[0.0, 1e-3], [1.0, 0.0], [2.0, 1e-1]];
        let svg = render_svg(PlotKind::Line, &d).unwrap();
        assert_eq!(svg.matches(',').count(), 2);
    }
}
