use std::fmt::Write;

use super::{LayerKind, PlotDocument};
use crate::error::{invalid, Error, Result};

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn color(style_key: &str, legend_pos: Option<usize>) -> &'static str {
    let idx = style_key
        .strip_prefix('s')
        .and_then(|d| d.parse::<usize>().ok())
        .or(legend_pos)
        .unwrap_or(0);
    PALETTE[idx % PALETTE.len()]
}

/// Up to four significant digits, trailing zeros trimmed.
fn tick_text(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let digits = (3 - v.abs().log10().floor() as i32).clamp(0, 8) as usize;
    let s = format!("{v:.digits$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// Renders a plot document as standalone SVG 1.1. Output depends only on the
/// document and the dimensions.
pub fn render_svg(doc: &PlotDocument, width: u32, height: u32) -> Result<String> {
    if doc.layers.is_empty() {
        return Err(Error::EmptyDocument);
    }
    if doc.axes.len() != 2 {
        return Err(invalid("plot document needs exactly two axes"));
    }
    let (w, h) = (width as f64, height as f64);
    if w <= LEFT + RIGHT + 10.0 || h <= TOP + BOTTOM + 10.0 {
        return Err(invalid(format!("canvas {width}x{height} is too small")));
    }
    let (xa, ya) = (&doc.axes[0], &doc.axes[1]);
    let pw = w - LEFT - RIGHT;
    let ph = h - TOP - BOTTOM;
    let span = |r: [f64; 2]| if r[1] > r[0] { r[1] - r[0] } else { 1.0 };
    let px = |x: f64| LEFT + (x - xa.range[0]) / span(xa.range) * pw;
    let py = |y: f64| TOP + ph - (y - ya.range[0]) / span(ya.range) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="22" font-size="15" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&doc.title)
    );

    let _ = writeln!(s, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
        LEFT,
        TOP + ph,
        LEFT + pw,
        TOP + ph
    );
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
        LEFT,
        TOP,
        LEFT,
        TOP + ph
    );
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g class="ticks" font-size="11">"#);
    for (i, &t) in xa.tick_positions.iter().enumerate() {
        let x = px(t);
        if xa.grid {
            let _ = writeln!(
                s,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#999999"/>"##,
                TOP,
                TOP + ph
            );
        }
        let label = xa
            .tick_labels
            .as_ref()
            .and_then(|l| l.get(i).cloned())
            .unwrap_or_else(|| tick_text(t));
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            TOP + ph,
            TOP + ph + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            escape(&label)
        );
    }
    for (i, &t) in ya.tick_positions.iter().enumerate() {
        let y = py(t);
        if ya.grid {
            let _ = writeln!(
                s,
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#999999"/>"##,
                LEFT,
                LEFT + pw
            );
        }
        let label = ya
            .tick_labels
            .as_ref()
            .and_then(|l| l.get(i).cloned())
            .unwrap_or_else(|| tick_text(t));
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/>"#,
            LEFT - 5.0,
            LEFT
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            y + 4.0,
            escape(&label)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        h - 12.0,
        escape(&xa.label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&ya.label)
    );

    let legend_pos = |group: &str| doc.legend.iter().position(|e| e.group == group);
    let radius = doc.point_size.unwrap_or(3.0) / 2.0;
    let _ = writeln!(s, r#"<g class="layers">"#);
    for layer in &doc.layers {
        let c = color(&layer.style_key, legend_pos(&layer.group_label));
        match layer.kind {
            LayerKind::Curve | LayerKind::Polyline => {
                let pts: Vec<String> = layer
                    .coordinates
                    .iter()
                    .map(|&[x, y]| format!("{:.2},{:.2}", px(x), py(y)))
                    .collect();
                let opacity = if layer.kind == LayerKind::Polyline { "0.5" } else { "1" };
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{c}" stroke-width="1.5" stroke-opacity="{opacity}" points="{}"/>"#,
                    pts.join(" ")
                );
            }
            LayerKind::Points => {
                for &[x, y] in &layer.coordinates {
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="{radius:.2}" fill="{c}" fill-opacity="0.7"/>"#,
                        px(x),
                        py(y)
                    );
                }
            }
        }
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g class="legend" font-size="12">"#);
    for (i, e) in doc.legend.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let x = LEFT + pw + 15.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{:.2}" width="12" height="12" fill="{}"/>"#,
            y - 10.0,
            color(&e.style_key, Some(i))
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{y:.2}">{}</text>"#, x + 18.0, escape(&e.group));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    Ok(s)
}
