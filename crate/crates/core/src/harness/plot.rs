//! Static SVG panels rendered from a dataset.
//!
//! Sweep datasets give one log-scale error-vs-size panel per
//! (format, metric); NS datasets give one error-vs-iterations panel with a
//! line per matrix size.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::dataset::{Dataset, DatasetKind, Row};
use crate::error::Result;

pub const METRICS: [&str; 3] = ["max_abs", "max_rel", "frob_rel"];

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// A rendered panel before it is written anywhere.
#[derive(Clone, Debug, PartialEq)]
pub struct Panel {
    pub name: String,
    pub svg: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlotOutput {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

fn metric(r: &Row, name: &str) -> f64 {
    match name {
        "max_abs" => r.max_abs,
        "max_rel" => r.max_rel,
        _ => r.frob_rel,
    }
}

fn uniq<T: PartialEq + Clone>(it: impl Iterator<Item = T>) -> Vec<T> {
    let mut v = Vec::new();
    for x in it {
        if !v.contains(&x) {
            v.push(x);
        }
    }
    v
}

/// Median rows if the dataset has them, else every trial row.
fn summary_rows(ds: &Dataset) -> Vec<&Row> {
    let med: Vec<&Row> = ds.median_rows().collect();
    if med.is_empty() { ds.trial_rows().collect() } else { med }
}

pub fn render_panels(ds: &Dataset) -> (Vec<Panel>, Vec<String>) {
    let rows = summary_rows(ds);
    if rows.is_empty() {
        return (Vec::new(), vec!["dataset has no rows; no panels written".into()]);
    }
    let mut panels = Vec::new();
    match ds.kind {
        DatasetKind::NsSweep => {
            for fmt in uniq(rows.iter().map(|r| r.format.clone())) {
                let series = uniq(rows.iter().map(|r| r.n))
                    .into_iter()
                    .map(|n| Series {
                        label: format!("n={n}"),
                        points: rows
                            .iter()
                            .filter(|r| r.n == n && r.format == fmt)
                            .filter_map(|r| Some((r.m? as f64, r.frob_rel)))
                            .collect(),
                    })
                    .filter(|s| !s.points.is_empty())
                    .collect::<Vec<_>>();
                let title = format!("Newton-Schulz, {fmt}: frob_rel vs iterations");
                panels.push(Panel { name: format!("ns_{fmt}_frob_rel"), svg: svg(&title, "iterations", false, &series) });
            }
        }
        DatasetKind::Sweep | DatasetKind::DecaySweep => {
            for fmt in uniq(rows.iter().map(|r| r.format.clone())) {
                for m in METRICS {
                    let keys = uniq(rows.iter().map(|r| (r.method.clone(), r.gamma.map(f64::to_bits))));
                    let series = keys
                        .into_iter()
                        .map(|(method, g)| Series {
                            label: match g {
                                Some(g) => format!("{method} γ={}", f64::from_bits(g)),
                                None => method.clone(),
                            },
                            points: rows
                                .iter()
                                .filter(|r| r.format == fmt && r.method == method && r.gamma.map(f64::to_bits) == g)
                                .map(|r| (r.n as f64, metric(r, m)))
                                .collect(),
                        })
                        .collect::<Vec<_>>();
                    let title = format!("{fmt}: {m} vs n");
                    panels.push(Panel { name: format!("{}_{fmt}_{m}", ds.kind), svg: svg(&title, "n", true, &series) });
                }
            }
        }
    }
    (panels, Vec::new())
}

/// Writes every panel of `ds` into `dir` as `<name>.svg`.
pub fn emit_plots(ds: &Dataset, dir: &Path) -> Result<PlotOutput> {
    let (panels, warnings) = render_panels(ds);
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for p in panels {
        let path = dir.join(format!("{}.svg", p.name));
        std::fs::write(&path, p.svg)?;
        files.push(path);
    }
    Ok(PlotOutput { files, warnings })
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn svg(title: &str, xlabel: &str, log_x: bool, series: &[Series]) -> String {
    let pts = || series.iter().flat_map(|s| s.points.iter()).filter(|(_, y)| y.is_finite() && *y > 0.0);
    let tx = |x: f64| if log_x { x.log2() } else { x };
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts() {
        x0 = x0.min(tx(x));
        x1 = x1.max(tx(x));
        y0 = y0.min(y.log10().floor());
        y1 = y1.max(y.log10().ceil());
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, -1.0, 0.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let px = |x: f64| LEFT + (tx(x) - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + (y1 - y.log10()) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="13">{}</text>"#, LEFT + pw / 2.0, esc(title));
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let mut e = y0;
    while e <= y1 {
        let y = TOP + (y1 - e) / (y1 - y0) * ph;
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">1e{e}</text>"#, LEFT - 6.0, y + 4.0);
        e += 1.0;
    }
    let xs = uniq(series.iter().flat_map(|s| s.points.iter().map(|p| p.0.to_bits())));
    for xb in xs {
        let x = f64::from_bits(xb);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{x}</text>"#, px(x), TOP + ph + 16.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 12.0, esc(xlabel));
    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let good: Vec<String> = ser
            .points
            .iter()
            .filter(|(_, y)| y.is_finite() && *y > 0.0)
            .map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y)))
            .collect();
        if !good.is_empty() {
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, good.join(" "));
            for p in &good {
                let (cx, cy) = p.split_once(',').unwrap_or(("0", "0"));
                let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="2.5" fill="{color}"/>"#);
            }
        }
        let ly = TOP + 12.0 + 16.0 * k as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{:.1}" x2="{}" y2="{:.1}" stroke="{color}" stroke-width="2"/>"#, ly - 4.0, lx + 18.0, ly - 4.0);
        let dropped = ser.points.len() - good.len();
        let note = if dropped > 0 { format!(" ({dropped} non-finite)") } else { String::new() };
        let _ = writeln!(s, r#"<text x="{}" y="{ly:.1}">{}{}</text>"#, lx + 24.0, esc(&ser.label), note);
    }
    s.push_str("</svg>\n");
    s
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
