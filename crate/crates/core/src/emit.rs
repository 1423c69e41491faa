//! Result-table emission: CSV with fixed per-table headers, JSON arrays,
//! and static SVG plots rendered by string assembly with no display loop.
//! All three formats are deterministic functions of the table contents.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::experiment::{
    ConnectivityRow, RewireRow, ScalingResult, ScalingRow, SimpleFractionRow,
};

/// A row type with a fixed CSV schema.
pub trait Table {
    const HEADER: &'static [&'static str];
    fn row(&self) -> Vec<String>;
}

fn f(v: f64) -> String {
    v.to_string()
}

fn opt_f(v: Option<f64>) -> String {
    v.map(f).unwrap_or_default()
}

fn opt_u(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Table for ScalingRow {
    const HEADER: &'static [&'static str] = &[
        "N",
        "band_lo",
        "band_hi",
        "n_iter",
        "p_measured",
        "master_seed",
        "instance_seed",
        "code_version",
    ];

    fn row(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            f(self.band_lo),
            f(self.band_hi),
            opt_u(self.n_iter),
            opt_f(self.p_measured),
            self.master_seed.to_string(),
            self.instance_seed.to_string(),
            self.code_version.clone(),
        ]
    }
}

impl Table for RewireRow {
    const HEADER: &'static [&'static str] = &[
        "N",
        "percent",
        "median_cost",
        "iqr_lo",
        "iqr_hi",
        "p_simple",
        "frustration_mean",
        "unsolved_count",
        "master_seed",
        "instance_seed",
        "code_version",
    ];

    fn row(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            f(self.percent),
            f(self.median_cost),
            f(self.iqr_lo),
            f(self.iqr_hi),
            opt_f(self.p_simple),
            opt_f(self.frustration_mean),
            self.unsolved_count.to_string(),
            self.master_seed.to_string(),
            self.instance_seed.to_string(),
            self.code_version.clone(),
        ]
    }
}

impl Table for ConnectivityRow {
    const HEADER: &'static [&'static str] = &[
        "N",
        "k",
        "p_simple",
        "gap_mean",
        "cost_median",
        "frustration_mean",
        "unsolved_count",
        "master_seed",
        "instance_seed",
        "code_version",
    ];

    fn row(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.k.to_string(),
            opt_f(self.p_simple),
            f(self.gap_mean),
            f(self.cost_median),
            opt_f(self.frustration_mean),
            self.unsolved_count.to_string(),
            self.master_seed.to_string(),
            self.instance_seed.to_string(),
            self.code_version.clone(),
        ]
    }
}

impl Table for SimpleFractionRow {
    const HEADER: &'static [&'static str] = &[
        "model",
        "dist",
        "N",
        "p_simple",
        "frustration_mean",
        "unsolved_count",
        "master_seed",
        "instance_seed",
        "code_version",
    ];

    fn row(&self) -> Vec<String> {
        vec![
            self.model.clone(),
            self.dist.clone(),
            self.n.to_string(),
            opt_f(self.p_simple),
            opt_f(self.frustration_mean),
            self.unsolved_count.to_string(),
            self.master_seed.to_string(),
            self.instance_seed.to_string(),
            self.code_version.clone(),
        ]
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Header line plus one line per row; empty tables yield just the header.
pub fn csv_string<T: Table>(rows: &[T]) -> String {
    let mut out = String::new();
    out.push_str(&T::HEADER.join(","));
    out.push('\n');
    for r in rows {
        let fields: Vec<String> = r.row().iter().map(|c| csv_field(c)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv<T: Table>(path: &Path, rows: &[T]) -> Result<()> {
    fs::write(path, csv_string(rows))?;
    Ok(())
}

pub fn json_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(rows)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    fs::write(path, json_string(rows)?)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// SVG plots

const PLOT_W: f64 = 800.0;
const PLOT_H: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const PALETTE: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// One plotted curve; `band` draws a shaded (x, lo, hi) region behind the
/// points and `markers` toggles per-point circles.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub band: Option<Vec<(f64, f64, f64)>>,
    pub markers: bool,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

struct Axis {
    min: f64,
    max: f64,
    log: bool,
}

impl Axis {
    fn place(&self, v: f64, lo_px: f64, hi_px: f64) -> f64 {
        let (v, min, max) = if self.log {
            (v.ln(), self.min.ln(), self.max.ln())
        } else {
            (v, self.min, self.max)
        };
        let t = if max > min { (v - min) / (max - min) } else { 0.5 };
        lo_px + t * (hi_px - lo_px)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let lo = self.min.log10().floor() as i32;
            let hi = self.max.log10().ceil() as i32;
            (lo..=hi).map(|d| 10f64.powi(d)).collect()
        } else {
            (0..=4)
                .map(|i| self.min + (self.max - self.min) * i as f64 / 4.0)
                .collect()
        }
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(0.001..10000.0).contains(&a) {
        format!("{v:.0e}")
    } else if a >= 100.0 || v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn data_bounds(plot: &Plot) -> Option<(Axis, Axis)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in &plot.series {
        for &(x, y) in &s.points {
            xs.push(x);
            ys.push(y);
        }
        if let Some(band) = &s.band {
            for &(x, lo, hi) in band {
                xs.push(x);
                ys.push(lo);
                ys.push(hi);
            }
        }
    }
    let keep = |v: &f64, log: bool| v.is_finite() && (!log || *v > 0.0);
    xs.retain(|v| keep(v, plot.log_x));
    ys.retain(|v| keep(v, plot.log_y));
    if xs.is_empty() || ys.is_empty() {
        return None;
    }
    let span = |vals: &[f64], log: bool| {
        let mut min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if min == max {
            // degenerate span: widen so the point sits mid-plot
            if log {
                min /= 2.0;
                max *= 2.0;
            } else {
                min -= 1.0;
                max += 1.0;
            }
        }
        (min, max)
    };
    let (xmin, xmax) = span(&xs, plot.log_x);
    let (ymin, ymax) = span(&ys, plot.log_y);
    Some((
        Axis {
            min: xmin,
            max: xmax,
            log: plot.log_x,
        },
        Axis {
            min: ymin,
            max: ymax,
            log: plot.log_y,
        },
    ))
}

/// Renders the plot to a standalone SVG document string.
pub fn svg_plot(plot: &Plot) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PLOT_W}\" height=\"{PLOT_H}\" \
         viewBox=\"0 0 {PLOT_W} {PLOT_H}\" font-family=\"sans-serif\">\n"
    ));
    out.push_str(&format!(
        "<rect width=\"{PLOT_W}\" height=\"{PLOT_H}\" fill=\"white\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        PLOT_W / 2.0,
        esc(&plot.title)
    ));
    let (x0, x1) = (MARGIN_L, PLOT_W - MARGIN_R);
    let (y0, y1) = (PLOT_H - MARGIN_B, MARGIN_T);
    let Some((xa, ya)) = data_bounds(plot) else {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\">no data</text>\n</svg>\n",
            PLOT_W / 2.0,
            PLOT_H / 2.0
        ));
        return out;
    };
    // axes, ticks, grid
    out.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    for t in xa.ticks() {
        if t < xa.min || t > xa.max {
            continue;
        }
        let px = xa.place(t, x0, x1);
        out.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{y0}\" x2=\"{px:.1}\" y2=\"{}\" stroke=\"#ddd\"/>\n\
             <text x=\"{px:.1}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
            y1,
            y0 + 18.0,
            fmt_tick(t)
        ));
    }
    for t in ya.ticks() {
        if t < ya.min || t > ya.max {
            continue;
        }
        let py = ya.place(t, y0, y1);
        out.push_str(&format!(
            "<line x1=\"{x0}\" y1=\"{py:.1}\" x2=\"{x1}\" y2=\"{py:.1}\" stroke=\"#ddd\"/>\n\
             <text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"11\">{}</text>\n",
            x0 - 6.0,
            py + 4.0,
            fmt_tick(t)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
        (x0 + x1) / 2.0,
        PLOT_H - 12.0,
        esc(&plot.x_label)
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\" \
         transform=\"rotate(-90 16 {})\">{}</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        esc(&plot.y_label)
    ));
    // series
    for (si, s) in plot.series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        if let Some(band) = &s.band {
            let mut d = String::new();
            for (i, &(x, lo, _)) in band.iter().enumerate() {
                let px = xa.place(x, x0, x1);
                let py = ya.place(lo.max(if ya.log { ya.min } else { f64::NEG_INFINITY }), y0, y1);
                d.push_str(&format!("{}{px:.1},{py:.1} ", if i == 0 { "M" } else { "L" }));
            }
            for &(x, _, hi) in band.iter().rev() {
                let px = xa.place(x, x0, x1);
                let py = ya.place(hi, y0, y1);
                d.push_str(&format!("L{px:.1},{py:.1} "));
            }
            d.push('Z');
            out.push_str(&format!(
                "<path d=\"{d}\" fill=\"{color}\" opacity=\"0.15\" stroke=\"none\"/>\n"
            ));
        }
        if s.points.len() > 1 {
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| {
                    format!("{:.1},{:.1}", xa.place(x, x0, x1), ya.place(y, y0, y1))
                })
                .collect();
            out.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                pts.join(" ")
            ));
        }
        if s.markers {
            for &(x, y) in &s.points {
                out.push_str(&format!(
                    "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{color}\"/>\n",
                    xa.place(x, x0, x1),
                    ya.place(y, y0, y1)
                ));
            }
        }
        // legend entry
        let ly = MARGIN_T + 16.0 * si as f64;
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{:.1}\" width=\"12\" height=\"4\" fill=\"{color}\"/>\n\
             <text x=\"{}\" y=\"{:.1}\" font-size=\"11\">{}</text>\n",
            x1 - 150.0,
            ly,
            x1 - 132.0,
            ly + 5.0,
            esc(&s.label)
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Bar chart over `(label, value)` pairs with a fixed 0..=1 value axis,
/// for fraction tables.
pub fn svg_bar_chart(title: &str, bars: &[(String, f64)]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PLOT_W}\" height=\"{PLOT_H}\" \
         viewBox=\"0 0 {PLOT_W} {PLOT_H}\" font-family=\"sans-serif\">\n\
         <rect width=\"{PLOT_W}\" height=\"{PLOT_H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        PLOT_W / 2.0,
        esc(title)
    ));
    let (x0, x1) = (MARGIN_L, PLOT_W - MARGIN_R);
    let (y0, y1) = (PLOT_H - MARGIN_B - 40.0, MARGIN_T);
    for i in 0..=4 {
        let v = i as f64 / 4.0;
        let py = y0 + (y1 - y0) * v;
        out.push_str(&format!(
            "<line x1=\"{x0}\" y1=\"{py:.1}\" x2=\"{x1}\" y2=\"{py:.1}\" stroke=\"#ddd\"/>\n\
             <text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"11\">{}</text>\n",
            x0 - 6.0,
            py + 4.0,
            fmt_tick(v)
        ));
    }
    if !bars.is_empty() {
        let slot = (x1 - x0) / bars.len() as f64;
        let width = (slot * 0.7).min(60.0);
        for (i, (label, v)) in bars.iter().enumerate() {
            let cx = x0 + slot * (i as f64 + 0.5);
            let h = (y0 - y1) * v.clamp(0.0, 1.0);
            out.push_str(&format!(
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{width:.1}\" height=\"{h:.1}\" \
                 fill=\"{}\"/>\n",
                cx - width / 2.0,
                y0 - h,
                PALETTE[0]
            ));
            out.push_str(&format!(
                "<text x=\"{cx:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"10\" \
                 transform=\"rotate(-35 {cx:.1} {:.1})\">{}</text>\n",
                y0 + 14.0,
                y0 + 14.0,
                esc(label)
            ));
        }
    }
    out.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n</svg>\n"
    ));
    out
}

/// Log-log iteration scaling: measured points plus the fitted power law.
pub fn scaling_plot(res: &ScalingResult) -> String {
    let points: Vec<(f64, f64)> = res
        .rows
        .iter()
        .filter_map(|r| r.n_iter.map(|it| (r.n as f64, it as f64)))
        .collect();
    let mut series = vec![Series {
        label: "measured".into(),
        points: points.clone(),
        band: None,
        markers: true,
    }];
    if let (Some(fit), false) = (res.fit, points.is_empty()) {
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let line: Vec<(f64, f64)> = (0..=20)
            .map(|i| {
                let x = lo * (hi / lo).powf(i as f64 / 20.0);
                (x, fit.predict(x))
            })
            .collect();
        series.push(Series {
            label: format!("fit: {:.3} N^{:.3}", fit.coefficient, fit.slope),
            points: line,
            band: None,
            markers: false,
        });
    }
    svg_plot(&Plot {
        title: "Iterations to reach the target success band".into(),
        x_label: "problem size N".into(),
        y_label: "iterations".into(),
        log_x: true,
        log_y: true,
        series,
    })
}

/// Median solve cost against rewiring percentage, one curve with IQR band
/// per size.
pub fn rewire_plot(rows: &[RewireRow]) -> String {
    let mut sizes: Vec<usize> = rows.iter().map(|r| r.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let series = sizes
        .iter()
        .map(|&n| {
            let pts: Vec<&RewireRow> = rows.iter().filter(|r| r.n == n).collect();
            Series {
                label: format!("N = {n}"),
                points: pts.iter().map(|r| (r.percent, r.median_cost)).collect(),
                band: Some(pts.iter().map(|r| (r.percent, r.iqr_lo, r.iqr_hi)).collect()),
                markers: true,
            }
        })
        .collect();
    svg_plot(&Plot {
        title: "Solve cost to proven optimum vs rewired edges".into(),
        x_label: "% of seed-graph edges rewired".into(),
        y_label: "median cost (IQR band)".into(),
        log_x: false,
        log_y: true,
        series,
    })
}

/// Hardness profile of the connectivity sweep: median cost and mean
/// attained gap against k.
pub fn connectivity_plot(rows: &[ConnectivityRow]) -> String {
    let cost = Series {
        label: "median cost".into(),
        points: rows.iter().map(|r| (r.k as f64, r.cost_median)).collect(),
        band: None,
        markers: true,
    };
    svg_plot(&Plot {
        title: "Circulant solve cost vs connectivity".into(),
        x_label: "connectivity k".into(),
        y_label: "median cost".into(),
        log_x: false,
        log_y: true,
        series: vec![cost],
    })
}

/// Simplicity-rate bars, one per (model, size) point; unproven points
/// render as zero-height bars.
pub fn simple_fraction_plot(rows: &[SimpleFractionRow]) -> String {
    let bars: Vec<(String, f64)> = rows
        .iter()
        .map(|r| {
            (
                format!("{} {} N={}", r.model, r.dist, r.n),
                r.p_simple.unwrap_or(0.0),
            )
        })
        .collect();
    svg_bar_chart("Fraction of proven-optimal instances that are simple", &bars)
}
