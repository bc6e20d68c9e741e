//! CSV rows and SVG charts.

use std::fmt::Write as _;
use std::io::Write;

use replica_tradeoff::{Priority, SystemParams};

use crate::error::CliResult;

pub const CSV_HEADER: [&str; 13] = [
    "source",
    "priority",
    "lambda_r",
    "lambda_w",
    "mu_r",
    "mu_w",
    "n",
    "total_servers",
    "mean_read",
    "mean_write",
    "mean_total",
    "ci_halfwidth",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RowSource {
    Analytic,
    Simulation,
    Oracle,
    BoundLb,
    BoundUb,
}

impl RowSource {
    pub fn name(self) -> &'static str {
        match self {
            RowSource::Analytic => "analytic",
            RowSource::Simulation => "simulation",
            RowSource::Oracle => "oracle",
            RowSource::BoundLb => "bound_lb",
            RowSource::BoundUb => "bound_ub",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub source: RowSource,
    pub priority: Priority,
    pub params: SystemParams,
    pub mean_read: f64,
    pub mean_write: f64,
    pub ci_halfwidth: Option<f64>,
    pub seed: Option<u64>,
}

impl Row {
    pub fn new(
        source: RowSource,
        priority: Priority,
        params: SystemParams,
        mean_read: f64,
        mean_write: f64,
    ) -> Self {
        Self {
            source,
            priority,
            params,
            mean_read,
            mean_write,
            ci_halfwidth: None,
            seed: None,
        }
    }

    pub fn mean_total(&self) -> f64 {
        self.mean_read + self.mean_write
    }

    fn record(&self) -> [String; 13] {
        let p = &self.params;
        [
            self.source.name().to_string(),
            priority_name(self.priority).to_string(),
            fmt12(p.lambda_r),
            fmt12(p.lambda_w),
            fmt12(p.mu_r),
            fmt12(p.mu_w),
            p.n.to_string(),
            p.total_servers().to_string(),
            fmt12(self.mean_read),
            fmt12(self.mean_write),
            fmt12(self.mean_total()),
            self.ci_halfwidth.map(fmt12).unwrap_or_default(),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
        ]
    }
}

pub fn priority_name(p: Priority) -> &'static str {
    match p {
        Priority::ReadPriority => "read",
        Priority::WritePriority => "write",
    }
}

/// Shortest decimal form of `x` rounded to 12 significant digits.
pub fn fmt12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let mag = rounded.abs();
    if mag != 0.0 && !(1e-4..1e15).contains(&mag) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[Row]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

/// Line chart with one polyline per series. Output depends only on the
/// inputs, so equal data gives byte-identical files.
pub fn render_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter().copied());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for (x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    let y0 = y0.min(0.0);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<path d="M{m} {b}H{r}M{m} {b}V{m}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    for t in nice_ticks(x0, x1) {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(t),
            HEIGHT - MARGIN + 16.0,
            fmt12(t)
        );
    }
    for t in nice_ticks(y0, y1) {
        let _ = writeln!(
            s,
            r##"<path d="M{m} {y:.2}H{r}" stroke="#ddd"/><text x="{tx}" y="{ty:.2}" text-anchor="end">{v}</text>"##,
            m = MARGIN,
            r = WIDTH - MARGIN,
            y = py(t),
            tx = MARGIN - 6.0,
            ty = py(t) + 4.0,
            v = fmt12(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{y}" text-anchor="middle" transform="rotate(-90 16 {y})">{}</text>"#,
        escape(y_label),
        y = HEIGHT / 2.0
    );
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" stroke="{color}" stroke-width="2" fill="none"/>"#,
            path.join(" ")
        );
        for &(x, y) in &ser.points {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                px(x),
                py(y)
            );
        }
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{ly:.2}" fill="{color}" text-anchor="end">{}</text>"#,
            WIDTH - MARGIN,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
