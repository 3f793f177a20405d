//! Minimal SVG line and scatter plots.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Line,
    Points,
}

pub struct Series<'a> {
    pub name: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub style: Style,
}

impl<'a> Series<'a> {
    pub fn line(name: &'a str, x: &'a [f64], y: &'a [f64]) -> Self {
        Self { name, x, y, style: Style::Line }
    }

    pub fn points(name: &'a str, x: &'a [f64], y: &'a [f64]) -> Self {
        Self { name, x, y, style: Style::Points }
    }
}

fn range(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders `series` on shared linear axes.
pub fn plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x0, x1) = range(series.iter().flat_map(|s| s.x.iter().copied()));
    let (y0, y1) = range(series.iter().flat_map(|s| s.y.iter().copied()));
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    let _ = writeln!(out, r#"<text x="{}" y="30" text-anchor="middle" font-size="16">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#, W / 2.0, H - 15.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="15" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 15 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    for (v, anchor, x, y) in [
        (x0, "start", MARGIN, H - MARGIN + 15.0),
        (x1, "end", W - MARGIN, H - MARGIN + 15.0),
        (y0, "end", MARGIN - 5.0, H - MARGIN),
        (y1, "end", MARGIN - 5.0, MARGIN + 10.0),
    ] {
        let _ = writeln!(out, r#"<text x="{x}" y="{y}" text-anchor="{anchor}" font-size="10">{v:.4e}</text>"#);
    }
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<(f64, f64)> = s
            .x
            .iter()
            .zip(s.y)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(&x, &y)| (px(x), py(y)))
            .collect();
        match s.style {
            Style::Line => {
                let mut d = String::new();
                for (x, y) in &pts {
                    let _ = write!(d, "{x:.2},{y:.2} ");
                }
                let _ = writeln!(
                    out,
                    r#"<polyline class="series" data-name="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    escape(s.name),
                    d.trim_end()
                );
            }
            Style::Points => {
                let _ = writeln!(out, r#"<g class="series" data-name="{}" fill="{color}">"#, escape(s.name));
                for (x, y) in &pts {
                    let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3"/>"#);
                }
                let _ = writeln!(out, "</g>");
            }
        }
        let ly = MARGIN + 15.0 + 15.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{ly}" text-anchor="end" font-size="11" fill="{color}">{}</text>"#,
            W - MARGIN - 5.0,
            escape(s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_element_per_series() {
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, 3.0, 2.0];
        let svg = plot("t", "x", "y", &[Series::line("a", &x, &y), Series::points("b<c", &x, &y)]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches(r#"class="series""#).count(), 2);
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("b&lt;c"));
    }

    #[test]
    fn flat_and_empty_series_render() {
        let x = [0.0, 1.0];
        let svg = plot("t", "x", "y", &[Series::line("flat", &x, &[0.0, 0.0]), Series::line("none", &[], &[])]);
        assert!(!svg.contains("NaN"));
    }
}
