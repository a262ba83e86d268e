//! `log S(x)` against its Dickman prediction, as CSV and as an SVG line chart.

use std::fmt::Write;

use dbm_core::heuristics::fmt_sig;
use dbm_core::smoothness::{dickman_rho, least_squares_slope, Alpha, SmoothLedger};
use dbm_core::Result;

/// One row of the figure data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FigurePoint {
    pub x: u64,
    pub log_s: f64,
    pub predicted: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Figure {
    pub alpha: Alpha,
    pub d1: Option<u32>,
    pub points: Vec<FigurePoint>,
    /// Least-squares slope of `log S` over the upper half of the x-range.
    pub observed_slope: Option<f64>,
    /// `rho(d1 / (2 alpha))`.
    pub predicted_slope: Option<f64>,
}

/// Samples every `stride`-th ledger point (the last one is always kept) and
/// attaches the prediction `x * rho(d1 / (2 alpha))` when `d1` is given.
pub fn build_figure(ledger: &SmoothLedger, d1: Option<u32>, stride: usize) -> Result<Figure> {
    let stride = stride.max(1);
    let predicted_slope = match d1 {
        Some(d) => {
            let u = d as f64 * *ledger.alpha.denom() as f64 / (2.0 * *ledger.alpha.numer() as f64);
            Some(dickman_rho(u)?)
        }
        None => None,
    };
    let n = ledger.samples.len();
    let points: Vec<FigurePoint> = ledger
        .samples
        .iter()
        .enumerate()
        .filter(|(i, _)| i % stride == 0 || i + 1 == n)
        .map(|(_, s)| FigurePoint {
            x: s.x,
            log_s: s.log_s,
            predicted: predicted_slope.map(|r| r * s.x as f64),
        })
        .collect();
    let half = ledger.x_max / 2;
    let upper: Vec<(f64, f64)> = ledger
        .samples
        .iter()
        .filter(|s| s.x >= half)
        .map(|s| (s.x as f64, s.log_s))
        .collect();
    Ok(Figure {
        alpha: ledger.alpha,
        d1,
        points,
        observed_slope: least_squares_slope(&upper),
        predicted_slope,
    })
}

impl Figure {
    /// `x,log_S,predicted_logS`; the last column is empty without `d1`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,log_S,predicted_logS\n");
        for p in &self.points {
            let pred = p.predicted.map(fmt_sig).unwrap_or_default();
            let _ = writeln!(out, "{},{},{}", p.x, fmt_sig(p.log_s), pred);
        }
        out
    }

    pub fn to_svg(&self) -> String {
        let observed: Vec<(f64, f64)> = self.points.iter().map(|p| (p.x as f64, p.log_s)).collect();
        let predicted: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter_map(|p| p.predicted.map(|y| (p.x as f64, y)))
            .collect();
        let slope = |s: Option<f64>| s.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
        let mut series = vec![Series {
            label: format!("log S(x), upper-half slope {}", slope(self.observed_slope)),
            color: "#1f77b4",
            points: observed,
        }];
        if !predicted.is_empty() {
            series.push(Series {
                label: format!("x rho(u), slope {}", slope(self.predicted_slope)),
                color: "#d62728",
                points: predicted,
            });
        }
        line_chart(
            &format!("log S(x) with alpha = {}", self.alpha),
            "x",
            "log S(x)",
            &series,
        )
    }
}

pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Linear-axis line chart in a fixed 800x600 viewBox, one polyline per series.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, 0.0f64, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        (x0, x1, y1) = (0.0, 1.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r##"<g stroke="#444" stroke-width="1"><line x1="{LEFT}" y1="{}" x2="{}" y2="{}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}"/></g>"##,
        TOP + ph,
        LEFT + pw,
        TOP + ph,
        TOP + ph
    );
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let xv = x0 + t * (x1 - x0);
        let yv = y0 + t * (y1 - y0);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            sx(xv),
            TOP + ph + 18.0,
            tick(xv)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            sy(yv) + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );
    for (k, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            s.color,
            pts.join(" ")
        );
        let ly = TOP + 15.0 + 18.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="3"/>"#,
            LEFT + 15.0,
            LEFT + 40.0,
            s.color
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            LEFT + 48.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn tick(v: f64) -> String {
    if v.abs() >= 1e5 || (v != 0.0 && v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}
