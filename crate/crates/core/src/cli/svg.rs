//! Minimal SVG scatter plot for footprints.

use std::fmt::Write;

use crate::relevance::{FootprintMap, OverlayLine};

const SIZE: f64 = 520.0;
const MARGIN: f64 = 44.0;
/// Length of the drawn overlay, in units of the period, per direction.
const OVERLAY_LENGTH: f64 = 6.0;

/// Pieces of the line `origin + t·direction`, `|t| ≤ half_length`, folded into
/// the square `[0, period)²`.
pub fn wrapped_segments(line: &OverlayLine, period: f64, half_length: f64) -> Vec<[[f64; 2]; 2]> {
    let norm = line.direction[0].hypot(line.direction[1]);
    if !(norm > 0.0) || !(period > 0.0) {
        return Vec::new();
    }
    let start = [line.origin[0].rem_euclid(period), line.origin[1].rem_euclid(period)];
    let mut segments = Vec::new();
    for sign in [1.0, -1.0] {
        let d = [sign * line.direction[0] / norm, sign * line.direction[1] / norm];
        let mut p = start;
        let mut remaining = half_length;
        // each piece either exhausts the length or reaches a wall
        for _ in 0..10_000 {
            if remaining <= 1e-12 {
                break;
            }
            for i in 0..2 {
                if d[i] < 0.0 && p[i] <= 0.0 {
                    p[i] = period;
                } else if d[i] > 0.0 && p[i] >= period {
                    p[i] = 0.0;
                }
            }
            let mut t = remaining;
            for i in 0..2 {
                if d[i] > 0.0 {
                    t = t.min((period - p[i]) / d[i]);
                } else if d[i] < 0.0 {
                    t = t.min(-p[i] / d[i]);
                }
            }
            let q = [p[0] + t * d[0], p[1] + t * d[1]];
            segments.push([p, q]);
            remaining -= t;
            p = q;
        }
    }
    segments
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders a footprint on the square `[0, period)²`; the first coordinate is
/// horizontal, the second vertical (increasing upwards).
pub fn footprint_svg(map: &FootprintMap, period: f64, title: &str) -> String {
    let span = SIZE - 2.0 * MARGIN;
    let px = |x: f64| MARGIN + span * x / period;
    let py = |y: f64| SIZE - MARGIN - span * y / period;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        SIZE / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r##"<g fill="#1f4e9c" fill-opacity="0.75">"##
    );
    for p in &map.points {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.2"><title>{} (rank {})</title></circle>"#,
            px(p.coords[0]),
            py(p.coords[1]),
            escape(&p.label),
            p.rank
        );
    }
    let _ = writeln!(s, "</g>");
    if let Some(line) = &map.overlay {
        let _ = writeln!(s, r#"<g stroke="black" stroke-width="1.4" fill="none">"#);
        for [a, b] in wrapped_segments(line, period, OVERLAY_LENGTH * period) {
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
                px(a[0]),
                py(a[1]),
                px(b[0]),
                py(b[1])
            );
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{span}" height="{span}" fill="none" stroke="black"/>"#
    );
    let axis = r#"font-family="sans-serif" font-size="12""#;
    let _ = writeln!(s, r#"<text x="{}" y="{}" {axis} text-anchor="middle">0</text>"#, MARGIN, SIZE - MARGIN + 16.0);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" {axis} text-anchor="middle">{period}</text>"#,
        SIZE - MARGIN,
        SIZE - MARGIN + 16.0
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" {axis} text-anchor="end">{period}</text>"#, MARGIN - 6.0, MARGIN + 4.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" {axis} text-anchor="middle">q</text>"#, SIZE / 2.0, SIZE - 12.0);
    let _ = writeln!(s, r#"<text x="14" y="{}" {axis} text-anchor="middle">p</text>"#, SIZE / 2.0);
    s.push_str("</svg>\n");
    s
}
