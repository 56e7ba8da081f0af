//! Minimal deterministic SVG charts: line overlays and signed bar charts.

use std::fmt::Write;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Line {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PlotSpec {
    Lines {
        title: String,
        x_label: String,
        y_label: String,
        lines: Vec<Line>,
    },
    /// One bar per label, above or below a zero axis.
    Bars {
        title: String,
        labels: Vec<String>,
        values: Vec<f64>,
    },
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

/// Plot area margins: left, right, top, bottom.
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 40.0, 60.0);

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

struct Scale {
    lo: f64,
    hi: f64,
    a: f64,
    b: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, a: f64, b: f64) -> Self {
        let (lo, hi) = if hi > lo {
            (lo, hi)
        } else {
            let pad = lo.abs().max(1.0) * 0.5;
            (lo - pad, hi + pad)
        };
        Scale { lo, hi, a, b }
    }

    fn map(&self, v: f64) -> f64 {
        self.a + (v - self.lo) / (self.hi - self.lo) * (self.b - self.a)
    }

    fn ticks(&self, n: usize) -> Vec<f64> {
        (0..=n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / n as f64)
            .collect()
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, xs: &Scale, ys: &Scale, x_ticks: bool) {
    let (l, r, t, b) = (MARGIN.0, WIDTH - MARGIN.1, MARGIN.2, HEIGHT - MARGIN.3);
    let _ = writeln!(out, r#"<g class="axes" stroke="black" fill="none">"#);
    let _ = writeln!(out, r#"<line x1="{l}" y1="{b}" x2="{r}" y2="{b}"/>"#);
    let _ = writeln!(out, r#"<line x1="{l}" y1="{t}" x2="{l}" y2="{b}"/>"#);
    let _ = writeln!(out, "</g>");
    for v in ys.ticks(5) {
        let y = ys.map(v);
        let _ = writeln!(
            out,
            r##"<line x1="{}" y1="{y:.2}" x2="{l}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            l - 4.0,
            l - 6.0,
            y + 4.0,
            fmt_tick(v)
        );
    }
    if x_ticks {
        for v in xs.ticks(5) {
            let x = xs.map(v);
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
                b + 4.0,
                b + 18.0,
                fmt_tick(v)
            );
        }
    }
}

fn finite_range(values: impl Iterator<Item = f64>) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        if !v.is_finite() {
            return Err(Error::invalid("plot", "data must be finite"));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        return Err(Error::EmptyData);
    }
    Ok((lo, hi))
}

/// Render a standalone SVG document.
pub fn render_svg(spec: &PlotSpec) -> Result<String> {
    let mut out = String::new();
    match spec {
        PlotSpec::Lines {
            title,
            x_label,
            y_label,
            lines,
        } => {
            if lines.iter().all(|l| l.x.is_empty()) {
                return Err(Error::EmptyData);
            }
            for l in lines {
                if l.x.len() != l.y.len() {
                    return Err(Error::LengthMismatch {
                        what: format!("line `{}`", l.label),
                        expected: l.x.len(),
                        actual: l.y.len(),
                    });
                }
            }
            let (x0, x1) = finite_range(lines.iter().flat_map(|l| l.x.iter().copied()))?;
            let (y0, y1) = finite_range(lines.iter().flat_map(|l| l.y.iter().copied()))?;
            let xs = Scale::new(x0, x1, MARGIN.0, WIDTH - MARGIN.1);
            let ys = Scale::new(y0, y1, HEIGHT - MARGIN.3, MARGIN.2);
            header(&mut out, title);
            axes(&mut out, &xs, &ys, true);
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                (MARGIN.0 + WIDTH - MARGIN.1) / 2.0,
                HEIGHT - 20.0,
                escape(x_label)
            );
            let _ = writeln!(
                out,
                r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
                (MARGIN.2 + HEIGHT - MARGIN.3) / 2.0,
                escape(y_label)
            );
            for (i, l) in lines.iter().enumerate() {
                let colour = PALETTE[i % PALETTE.len()];
                let mut pts = String::with_capacity(l.x.len() * 16);
                for (x, y) in l.x.iter().zip(&l.y) {
                    let _ = write!(pts, "{:.2},{:.2} ", xs.map(*x), ys.map(*y));
                }
                let _ = writeln!(
                    out,
                    r#"<polyline class="series" data-label="{}" fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
                    escape(&l.label),
                    pts.trim_end()
                );
                let ly = MARGIN.2 + 8.0 + 16.0 * i as f64;
                let lx = WIDTH - MARGIN.1 - 150.0;
                let _ = writeln!(
                    out,
                    r#"<g class="legend"><line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}">{}</text></g>"#,
                    lx + 20.0,
                    lx + 26.0,
                    ly + 4.0,
                    escape(&l.label)
                );
            }
        }
        PlotSpec::Bars {
            title,
            labels,
            values,
        } => {
            if values.is_empty() {
                return Err(Error::EmptyData);
            }
            if labels.len() != values.len() {
                return Err(Error::LengthMismatch {
                    what: "bar labels".into(),
                    expected: values.len(),
                    actual: labels.len(),
                });
            }
            let (lo, hi) = finite_range(values.iter().copied())?;
            let ys = Scale::new(lo.min(0.0), hi.max(0.0), HEIGHT - MARGIN.3, MARGIN.2);
            let xs = Scale::new(0.0, values.len() as f64, MARGIN.0, WIDTH - MARGIN.1);
            header(&mut out, title);
            axes(&mut out, &xs, &ys, false);
            let zero = ys.map(0.0);
            let slot = xs.map(1.0) - xs.map(0.0);
            for (i, (label, v)) in labels.iter().zip(values).enumerate() {
                let y = ys.map(*v);
                let (top, h) = if y < zero {
                    (y, zero - y)
                } else {
                    (zero, y - zero)
                };
                let x = xs.map(i as f64) + slot * 0.1;
                let colour = if *v >= 0.0 { PALETTE[0] } else { PALETTE[1] };
                let _ = writeln!(
                    out,
                    r#"<rect class="bar" data-label="{}" data-value="{}" x="{x:.2}" y="{top:.2}" width="{:.2}" height="{h:.2}" fill="{colour}"/>"#,
                    escape(label),
                    v,
                    slot * 0.8
                );
                let cx = x + slot * 0.4;
                let ty = HEIGHT - MARGIN.3 + 12.0;
                let _ = writeln!(
                    out,
                    r#"<text x="{cx:.2}" y="{ty:.2}" text-anchor="end" font-size="10" transform="rotate(-35 {cx:.2} {ty:.2})">{}</text>"#,
                    escape(label)
                );
            }
            let _ = writeln!(
                out,
                r#"<line class="zero-axis" x1="{}" y1="{zero:.2}" x2="{}" y2="{zero:.2}" stroke="black" stroke-dasharray="4 2"/>"#,
                MARGIN.0,
                WIDTH - MARGIN.1
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
