//! Minimal standalone SVG charts. Output depends only on the input data, so
//! identical inputs give byte-identical files.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Optional shaded band `(lower, upper)` aligned with `points`.
    pub band: Option<Vec<(f64, f64)>>,
    pub dashed: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
            band: None,
            dashed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Fixed axis ranges; `None` fits the data.
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bar {
    pub label: String,
    pub value: f64,
    pub error: Option<f64>,
    pub highlight: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarChart {
    pub title: String,
    pub y_label: String,
    pub bars: Vec<Bar>,
    /// Horizontal reference line, e.g. a baseline of 1.
    pub reference: Option<f64>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if (hi - lo).abs() < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }
    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (W - RIGHT + LEFT) / 2.0,
        esc(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(out, r#"<path d="M{x0:.1},{y0:.1} V{y1:.1} H{x1:.1}" fill="none" stroke="black"/>"#);
    for k in 0..=5 {
        let t = k as f64 / 5.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        let (px, py) = (f.px(xv), f.py(yv));
        let _ = writeln!(
            out,
            r#"<line x1="{px:.1}" y1="{y1:.1}" x2="{px:.1}" y2="{:.1}" stroke="black"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            y1 + 4.0,
            y1 + 18.0,
            fmt_tick(xv)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{py:.1}" x2="{x0:.1}" y2="{py:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            x0 - 4.0,
            x0 - 6.0,
            py + 4.0,
            fmt_tick(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        H - 14.0,
        esc(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text transform="translate(16,{:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (y0 + y1) / 2.0,
        esc(y_label)
    );
}

pub fn line_svg(chart: &LineChart) -> String {
    let xs = chart.series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let ys = chart.series.iter().flat_map(|s| {
        s.points
            .iter()
            .map(|p| p.1)
            .chain(s.band.iter().flatten().flat_map(|b| [b.0, b.1]))
    });
    let fold = |it: &mut dyn Iterator<Item = f64>| it.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let frame = Frame {
        x: chart.x_range.unwrap_or_else(|| {
            let (lo, hi) = fold(&mut xs.clone());
            padded(lo, hi)
        }),
        y: chart.y_range.unwrap_or_else(|| {
            let (lo, hi) = fold(&mut ys.clone());
            padded(lo, hi)
        }),
    };

    let mut out = String::new();
    header(&mut out, &chart.title);
    axes(&mut out, &frame, &chart.x_label, &chart.y_label);
    for (k, s) in chart.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if let Some(band) = &s.band {
            let mut d = String::new();
            for (i, (p, b)) in s.points.iter().zip(band).enumerate() {
                let _ = write!(d, "{}{:.1},{:.1} ", if i == 0 { "M" } else { "L" }, frame.px(p.0), frame.py(b.1));
            }
            for (p, b) in s.points.iter().zip(band).rev() {
                let _ = write!(d, "L{:.1},{:.1} ", frame.px(p.0), frame.py(b.0));
            }
            let _ = writeln!(out, r#"<path d="{}Z" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, d);
        }
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|p| format!("{:.1},{:.1}", frame.px(p.0), frame.py(p.1)))
            .collect();
        let dash = if s.dashed { r#" stroke-dasharray="5,4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"{dash}/>"#,
            pts.join(" ")
        );
        let ly = TOP + 16.0 * k as f64 + 6.0;
        let lx = W - RIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"{dash}/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 18.0,
            lx + 22.0,
            ly + 4.0,
            esc(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn bar_svg(chart: &BarChart) -> String {
    let mut lo: f64 = 0.0;
    let mut hi: f64 = chart.reference.unwrap_or(0.0);
    for b in &chart.bars {
        let e = b.error.unwrap_or(0.0);
        lo = lo.min(b.value - e);
        hi = hi.max(b.value + e);
    }
    let frame = Frame {
        x: (0.0, chart.bars.len().max(1) as f64),
        y: padded(lo, hi),
    };
    let mut out = String::new();
    header(&mut out, &chart.title);
    let (x0, x1, y1) = (LEFT, W - RIGHT, H - BOTTOM);
    let _ = writeln!(out, r#"<path d="M{x0:.1},{TOP:.1} V{y1:.1} H{x1:.1}" fill="none" stroke="black"/>"#);
    for k in 0..=5 {
        let yv = frame.y.0 + k as f64 / 5.0 * (frame.y.1 - frame.y.0);
        let py = frame.py(yv);
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{py:.1}" x2="{x0:.1}" y2="{py:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            x0 - 4.0,
            x0 - 6.0,
            py + 4.0,
            fmt_tick(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text transform="translate(16,{:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (TOP + y1) / 2.0,
        esc(&chart.y_label)
    );
    let zero = frame.py(0.0_f64.clamp(frame.y.0, frame.y.1));
    let slot = (x1 - x0) / chart.bars.len().max(1) as f64;
    for (i, b) in chart.bars.iter().enumerate() {
        let cx = frame.px(i as f64 + 0.5);
        let top = frame.py(b.value);
        let (y, h) = if top < zero { (top, zero - top) } else { (zero, top - zero) };
        let fill = if b.highlight { "#d62728" } else { "#7f7f7f" };
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{y:.1}" width="{:.1}" height="{h:.1}" fill="{fill}"/>"#,
            cx - slot * 0.35,
            slot * 0.7
        );
        if let Some(e) = b.error {
            let _ = writeln!(
                out,
                r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="black"/>"#,
                frame.py(b.value - e),
                frame.py(b.value + e)
            );
        }
        let _ = writeln!(
            out,
            r#"<text transform="translate({cx:.1},{:.1}) rotate(-45)" text-anchor="end" font-size="10">{}</text>"#,
            y1 + 12.0,
            esc(&b.label)
        );
    }
    if let Some(r) = chart.reference {
        let py = frame.py(r);
        let _ = writeln!(
            out,
            r#"<line x1="{x0:.1}" y1="{py:.1}" x2="{x1:.1}" y2="{py:.1}" stroke="black" stroke-dasharray="4,3"/>"#
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> LineChart {
        let mut s = Series::new("a <b>", vec![(0.0, 0.1), (0.5, 0.6), (1.0, 0.9)]);
        s.band = Some(vec![(0.0, 0.2), (0.5, 0.7), (0.8, 1.0)]);
        LineChart {
            title: "ROC".into(),
            x_label: "FPR".into(),
            y_label: "TPR".into(),
            series: vec![s, Series { dashed: true, ..Series::new("chance", vec![(0.0, 0.0), (1.0, 1.0)]) }],
            x_range: Some((0.0, 1.0)),
            y_range: Some((0.0, 1.0)),
        }
    }

    #[test]
    fn line_chart_is_wellformed_and_stable() {
        let svg = line_svg(&chart());
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a &lt;b&gt;"));
        assert!(svg.contains("stroke-dasharray"));
        assert_eq!(svg, line_svg(&chart()));
    }

    #[test]
    fn bar_chart_and_degenerate_inputs() {
        let c = BarChart {
            title: "relative accuracy".into(),
            y_label: "ratio".into(),
            bars: vec![
                Bar { label: "guess".into(), value: 0.6, error: Some(0.1), highlight: true },
                Bar { label: "so".into(), value: 1.1, error: None, highlight: false },
            ],
            reference: Some(1.0),
        };
        let svg = bar_svg(&c);
        assert_eq!(svg.matches("<rect").count(), 3);
        assert!(svg.contains("#d62728"));
        let empty = LineChart { series: vec![], x_range: None, y_range: None, ..chart() };
        assert!(line_svg(&empty).contains("</svg>"));
        assert!(!line_svg(&empty).contains("NaN"));
        assert!(bar_svg(&BarChart { bars: vec![], ..c }).contains("</svg>"));
    }

    #[test]
    fn tick_formatting() {
        assert_eq!(fmt_tick(0.5), "0.5");
        assert_eq!(fmt_tick(2.0), "2");
        assert_eq!(fmt_tick(-0.001), "0");
    }
}
