//! Minimal SVG line charts.
//!
//! The polyline carries the data values verbatim and a group transform maps
//! them onto the plot area, so the chart can be checked against its CSV.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;

/// `points` are `(t, value)` pairs as their CSV text.
pub fn line_chart(title: &str, x_label: &str, points: &[(String, String)]) -> String {
    let parsed: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
        .filter(|(a, b): &(f64, f64)| a.is_finite() && b.is_finite())
        .collect();
    let (x0, x1) = padded_range(parsed.iter().map(|p| p.0));
    let (y0, y1) = padded_range(parsed.iter().map(|p| p.1));
    let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        MARGIN / 2.0,
        escape(title)
    );
    let bottom = HEIGHT - MARGIN;
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - MARGIN / 3.0,
        escape(x_label)
    );
    for (x, y, anchor, text) in [
        (MARGIN, bottom + 16.0, "start", x0),
        (WIDTH - MARGIN, bottom + 16.0, "end", x1),
        (MARGIN - 4.0, bottom, "end", y0),
        (MARGIN - 4.0, MARGIN + 10.0, "end", y1),
    ] {
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{y}" text-anchor="{anchor}" font-family="sans-serif" font-size="10">{text:.4e}</text>"#
        );
    }
    if !points.is_empty() {
        let coords: Vec<String> = points.iter().map(|(a, b)| format!("{a},{b}")).collect();
        let _ = writeln!(
            s,
            r#"<g transform="translate({MARGIN} {bottom}) scale({} {}) translate({} {})">"#,
            pw / (x1 - x0),
            -ph / (y1 - y0),
            -x0,
            -y0
        );
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" vector-effect="non-scaling-stroke" points="{}"/>"#,
            coords.join(" ")
        );
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}

/// Data range, widened when it collapses to a point.
fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyline_embeds_values_verbatim() {
        let pts = vec![
            ("0.0000000000000000e0".to_string(), "1.5e0".to_string()),
            ("1.0000000000000000e-2".to_string(), "1.25e0".to_string()),
        ];
        let svg = line_chart("lyapunov", "t", &pts);
        assert!(svg.contains(r#"points="0.0000000000000000e0,1.5e0 1.0000000000000000e-2,1.25e0""#));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn flat_series_gets_a_range() {
        assert_eq!(padded_range([2.0, 2.0].into_iter()), (1.0, 3.0));
        assert_eq!(padded_range([0.0].into_iter()), (-1.0, 1.0));
        assert_eq!(padded_range(std::iter::empty()), (0.0, 1.0));
    }
}
