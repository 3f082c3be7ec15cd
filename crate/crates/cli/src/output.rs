//! CSV and SVG emission.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::record::{Method, ResultRecord};
use crate::spec::ExperimentKind;
use crate::HarnessError;

pub const CSV_COLUMNS: [&str; 12] = [
    "kind",
    "method",
    "sweep_point",
    "trial",
    "seed",
    "ul_rate",
    "dl_rate",
    "sum_rate",
    "kappa_db",
    "iterations",
    "terminal_cost",
    "wall_ms",
];

/// Writes the header and one row per record. Empty input gives a
/// header-only file.
pub fn emit_csv(records: &[ResultRecord], path: &Path) -> Result<(), HarnessError> {
    let io = |e: csv::Error| HarnessError::io(path, e);
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(io)?;
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for r in records {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Reads records back. Sweep-point indices follow the order in which each
/// point first appears, which matches the order the harness writes.
pub fn read_csv(path: &Path) -> Result<Vec<ResultRecord>, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| HarnessError::io(path, e))?;
    let mut records = r
        .deserialize()
        .collect::<Result<Vec<ResultRecord>, _>>()
        .map_err(|e| HarnessError::io(path, e))?;
    let mut seen: Vec<String> = Vec::new();
    for rec in &mut records {
        rec.point_index = match seen.iter().position(|p| *p == rec.sweep_point) {
            Some(i) => i,
            None => {
                seen.push(rec.sweep_point.clone());
                seen.len() - 1
            }
        };
    }
    Ok(records)
}

/// The per-record quantity plotted for a kind, with its axis label.
pub fn plotted_metric(kind: ExperimentKind, r: &ResultRecord) -> f64 {
    match kind {
        ExperimentKind::Convergence => 10.0 * r.terminal_cost.log10(),
        ExperimentKind::KappaVsMd | ExperimentKind::KappaVsBits => r.kappa_db,
        ExperimentKind::RatesVsMd | ExperimentKind::RatesVsEnob | ExperimentKind::PhaseDeviation => r.sum_rate,
    }
}

fn metric_label(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Convergence => "terminal SIM cost (dB)",
        ExperimentKind::KappaVsMd | ExperimentKind::KappaVsBits => "kappa (dB)",
        _ => "sum-rate (bps/Hz)",
    }
}

fn axis_label(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Convergence => "RIS size",
        ExperimentKind::KappaVsMd | ExperimentKind::RatesVsMd => "M_d",
        ExperimentKind::KappaVsBits => "RIS phase resolution (bits)",
        ExperimentKind::RatesVsEnob => "ADC ENOB",
        ExperimentKind::PhaseDeviation => "phase deviation (degrees)",
    }
}

/// Mean and sample standard deviation of the plotted metric for one
/// method at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub method: Method,
    pub sweep_point: String,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

/// Groups by (method, sweep point) in order of first appearance.
pub fn aggregate(records: &[ResultRecord]) -> Result<Vec<SeriesPoint>, HarnessError> {
    let Some(kind) = records.first().map(|r| r.kind) else {
        return Ok(Vec::new());
    };
    if records.iter().any(|r| r.kind != kind) {
        return Err(HarnessError::Config("records mix experiment kinds".into()));
    }
    let mut groups: Vec<(Method, String, Vec<f64>)> = Vec::new();
    for r in records {
        let value = plotted_metric(kind, r);
        match groups
            .iter_mut()
            .find(|(m, p, _)| *m == r.method && *p == r.sweep_point)
        {
            Some(g) => g.2.push(value),
            None => groups.push((r.method, r.sweep_point.clone(), vec![value])),
        }
    }
    Ok(groups
        .into_iter()
        .map(|(method, sweep_point, values)| {
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let std = if values.len() > 1 {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            SeriesPoint {
                method,
                sweep_point,
                mean,
                std,
                count: values.len(),
            }
        })
        .collect())
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#7f7f7f"];

/// Line chart of mean ± sample std per sweep point, one line per method.
/// Each marker carries `data-mean` and `data-std` in round-trip precision.
pub fn emit_svg(records: &[ResultRecord], path: &Path) -> Result<(), HarnessError> {
    let series = aggregate(records)?;
    let kind = records.first().map(|r| r.kind);
    let mut labels: Vec<&str> = Vec::new();
    for p in &series {
        if !labels.contains(&p.sweep_point.as_str()) {
            labels.push(&p.sweep_point);
        }
    }
    let mut methods: Vec<Method> = Vec::new();
    for p in &series {
        if !methods.contains(&p.method) {
            methods.push(p.method);
        }
    }

    let (mut lo, mut hi) = series.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.mean - p.std), hi.max(p.mean + p.std))
    });
    if !lo.is_finite() || !hi.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x_of = |i: usize| {
        if labels.len() <= 1 {
            LEFT + plot_w / 2.0
        } else {
            LEFT + plot_w * i as f64 / (labels.len() - 1) as f64
        }
    };
    let y_of = |v: f64| TOP + plot_h * (hi - v) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let title = kind.map(|k| k.as_str()).unwrap_or("empty");
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#,
        WIDTH / 2.0
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let y = y_of(v);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{v:.3}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    for (i, label) in labels.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{label}</text>"#,
            x_of(i),
            TOP + plot_h + 18.0
        );
    }
    if let Some(k) = kind {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + plot_w / 2.0,
            HEIGHT - 16.0,
            axis_label(k)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
            TOP + plot_h / 2.0,
            TOP + plot_h / 2.0,
            metric_label(k)
        );
    }

    for (mi, method) in methods.iter().enumerate() {
        let color = COLORS[mi % COLORS.len()];
        let pts: Vec<(usize, &SeriesPoint)> = series
            .iter()
            .filter(|p| p.method == *method)
            .map(|p| (labels.iter().position(|l| *l == p.sweep_point).unwrap_or(0), p))
            .collect();
        let path: Vec<String> = pts
            .iter()
            .map(|(i, p)| format!("{},{}", x_of(*i), y_of(p.mean)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        for (i, p) in &pts {
            let x = x_of(*i);
            let _ = writeln!(
                s,
                r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="{color}"/>"#,
                y_of(p.mean - p.std),
                y_of(p.mean + p.std)
            );
            let _ = writeln!(
                s,
                r#"<circle cx="{x}" cy="{}" r="3" fill="{color}" data-method="{}" data-point="{}" data-mean="{}" data-std="{}" data-n="{}"/>"#,
                y_of(p.mean),
                method.as_str(),
                p.sweep_point,
                p.mean,
                p.std,
                p.count
            );
        }
        let ly = TOP + 16.0 + 18.0 * mi as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            method.as_str()
        );
    }
    if kind == Some(ExperimentKind::RatesVsEnob) {
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{}" font-size="10" fill="#555">Literature values, not simulated: RAFDD relative gaps 48% and 23%</text>"##,
            LEFT,
            HEIGHT - 2.0
        );
    }
    s.push_str("</svg>\n");
    fs::write(path, s).map_err(|e| HarnessError::io(path, e))
}
