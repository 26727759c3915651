//! Sweep output: CSV tables and standalone SVG line plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ChannelMode, Detector};
use crate::error::{Error, Result};

/// One aggregated sweep point for one detector. Field order is the CSV
/// column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub snr_db: f64,
    pub detector: Detector,
    pub channel_mode: ChannelMode,
    pub ns: usize,
    pub ber: f64,
    pub ber_ci95_low: f64,
    pub ber_ci95_high: f64,
    pub pee: f64,
    pub amp_mae: f64,
    pub delay_error_rate: f64,
    pub trials: u64,
    pub master_seed: u64,
}

/// Columns that can be plotted against SNR.
pub const PLOT_METRICS: [&str; 6] = [
    "ber",
    "ber_ci95_low",
    "ber_ci95_high",
    "pee",
    "amp_mae",
    "delay_error_rate",
];

impl ResultRow {
    pub fn metric(&self, name: &str) -> Option<f64> {
        Some(match name {
            "ber" => self.ber,
            "ber_ci95_low" => self.ber_ci95_low,
            "ber_ci95_high" => self.ber_ci95_high,
            "pee" => self.pee,
            "amp_mae" => self.amp_mae,
            "delay_error_rate" => self.delay_error_rate,
            _ => return None,
        })
    }
}

fn csv_error(path: &Path, source: csv::Error) -> Error {
    if source.is_io_error() {
        match source.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: path.to_path_buf(),
                source,
            },
            _ => unreachable!("is_io_error checked"),
        }
    } else {
        Error::Csv {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Header line plus one row per result. Floats are written in shortest
/// round-trip form.
pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    writer
        .write_record(HEADER)
        .map_err(|e| csv_error(path, e))?;
    for row in rows {
        writer.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(io)
}

const HEADER: [&str; 12] = [
    "snr_db",
    "detector",
    "channel_mode",
    "ns",
    "ber",
    "ber_ci95_low",
    "ber_ci95_high",
    "pee",
    "amp_mae",
    "delay_error_rate",
    "trials",
    "master_seed",
];

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    reader
        .deserialize()
        .collect::<std::result::Result<Vec<ResultRow>, _>>()
        .map_err(|e| csv_error(path, e))
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// One curve in pixel coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

struct Axes {
    x: (f64, f64),
    decades: (i32, i32),
    floor: f64,
}

impl Axes {
    fn fit(rows: &[ResultRow], metric: &str) -> Self {
        let xs = rows.iter().map(|r| r.snr_db);
        let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        });
        let x = if x0.is_finite() && x1 > x0 {
            (x0, x1)
        } else if x0.is_finite() {
            (x0 - 1.0, x0 + 1.0)
        } else {
            (0.0, 1.0)
        };
        let positive: Vec<f64> = rows
            .iter()
            .filter_map(|r| r.metric(metric))
            .filter(|v| *v > 0.0 && v.is_finite())
            .collect();
        let (lo, hi) = positive
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let (d0, d1) = if lo.is_finite() {
            // one decade below the smallest value holds the zeros
            let d0 = lo.log10().floor() as i32 - 1;
            let d1 = (hi.log10().ceil() as i32).max(d0 + 1);
            (d0, d1)
        } else {
            (-6, 0)
        };
        Self {
            x,
            decades: (d0, d1),
            floor: 10f64.powi(d0),
        }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        let v = v.max(self.floor).log10();
        let (d0, d1) = (f64::from(self.decades.0), f64::from(self.decades.1));
        HEIGHT - BOTTOM - (v - d0) / (d1 - d0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn check_metric(metric: &str) -> Result<()> {
    if PLOT_METRICS.contains(&metric) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "unknown metric {metric:?}; valid columns: {}",
            PLOT_METRICS.join(", ")
        )))
    }
}

/// Pixel-space curves, one per `(detector, channel_mode)` group, ordered by
/// SNR. Zero values sit on the bottom decade of the log axis.
pub fn plot_series(rows: &[ResultRow], metric: &str) -> Result<Vec<PlotSeries>> {
    check_metric(metric)?;
    Ok(series_with_axes(rows, metric, &Axes::fit(rows, metric)))
}

fn series_with_axes(rows: &[ResultRow], metric: &str, axes: &Axes) -> Vec<PlotSeries> {
    let mut groups: BTreeMap<(Detector, ChannelMode), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.detector, r.channel_mode))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((det, mode), mut members)| {
            members.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
            PlotSeries {
                label: format!("{det} ({mode})"),
                points: members
                    .iter()
                    .filter_map(|r| {
                        let v = r.metric(metric)?;
                        v.is_finite().then(|| (axes.px(r.snr_db), axes.py(v)))
                    })
                    .collect(),
            }
        })
        .collect()
}

/// Writes a standalone SVG with `metric` on a log axis against SNR.
pub fn emit_plot(rows: &[ResultRow], metric: &str, path: &Path) -> Result<()> {
    check_metric(metric)?;
    let axes = Axes::fit(rows, metric);
    let series = series_with_axes(rows, metric, &axes);
    let mut svg = String::new();
    let plot_right = WIDTH - RIGHT;
    let plot_bottom = HEIGHT - BOTTOM;

    // writing to a String cannot fail
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        plot_right - LEFT,
        plot_bottom - TOP
    );
    for d in axes.decades.0..=axes.decades.1 {
        let y = axes.py(10f64.powi(d));
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{plot_right}" y2="{y:.2}" stroke="#dddddd"/><text x="{}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let ticks = 5;
    for t in 0..=ticks {
        let snr = axes.x.0 + (axes.x.1 - axes.x.0) * f64::from(t) / f64::from(ticks);
        let x = axes.px(snr);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{plot_bottom}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{snr:.1}</text>"#,
            plot_bottom + 5.0,
            plot_bottom + 18.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text class="x-label" x="{:.2}" y="{}" text-anchor="middle">SNR (dB)</text>"#,
        (LEFT + plot_right) / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text class="y-label" x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{metric}</text>"#,
        (TOP + plot_bottom) / 2.0,
        (TOP + plot_bottom) / 2.0
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = s
            .points
            .iter()
            .map(|(x, y)| format!("{x:.2},{y:.2}"))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        for (x, y) in &s.points {
            let _ = writeln!(
                svg,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{color}"/>"#
            );
        }
        let ly = TOP + 14.0 + 18.0 * i as f64;
        let lx = plot_right + 12.0;
        let _ = writeln!(
            svg,
            r#"<g class="legend-entry"><line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text></g>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
