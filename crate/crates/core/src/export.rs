//! Text renderings of analysis results: CSV tables, GeoJSON point
//! collections and self-contained SVG charts. Every renderer is a pure
//! function of its input, so repeated runs produce identical bytes.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::cluster::{ClusterSummary, LnpvClustering};
use crate::extremes::{classify_pdsi, LnpvSet};
use crate::grid::MonthStamp;
use crate::spectral::WaveletSpectrum;
use crate::trend::{CountSeries, MannKendallResult, NullBand};

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub fn coverage_csv(profile: &[(MonthStamp, f64)]) -> String {
    let mut out = String::from("year,month,percent_missing\n");
    for (m, pct) in profile {
        let _ = writeln!(out, "{},{},{:.6}", m.year(), m.month(), pct);
    }
    out
}

/// `lon,lat,rank,year,month,pdsi`, rank 1 being the most negative event.
pub fn lnpv_csv(sets: &[LnpvSet]) -> String {
    let mut out = String::from("lon,lat,rank,year,month,pdsi\n");
    for set in sets {
        let c = set.cell();
        for (rank, e) in set.events().iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                c.lon_deg(),
                c.lat_deg(),
                rank + 1,
                e.when.year(),
                e.when.month(),
                e.value
            );
        }
    }
    out
}

fn point_feature(lon: f64, lat: f64, properties: Value) -> Value {
    json!({
        "type": "Feature",
        "geometry": { "type": "Point", "coordinates": [lon, lat] },
        "properties": properties,
    })
}

fn collection(features: Vec<Value>) -> String {
    let fc = json!({ "type": "FeatureCollection", "features": features });
    let mut s = serde_json::to_string_pretty(&fc).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// One point per cell at its lattice centre, carrying the leading event.
pub fn lnpv_geojson(sets: &[LnpvSet]) -> String {
    let features = sets
        .iter()
        .map(|set| {
            let c = set.cell();
            let lead = set.leading();
            let class = classify_pdsi(lead.value).map(|c| c.label()).unwrap_or("unclassified");
            point_feature(
                c.lon_deg(),
                c.lat_deg(),
                json!({
                    "lnpv": lead.value,
                    "fractional_year": lead.fractional_year(),
                    "year": lead.when.year(),
                    "month": lead.when.month(),
                    "palmer_class": class,
                    "events": set.events().len(),
                }),
            )
        })
        .collect();
    collection(features)
}

/// `lon,lat,cluster,t,v`, one row per clustered point.
pub fn cluster_csv(clustering: &LnpvClustering) -> String {
    let mut out = String::from("lon,lat,cluster,t,v\n");
    for ((cell, p), label) in clustering.points.iter().zip(&clustering.model.assignments) {
        let _ = writeln!(out, "{},{},{},{:.6},{}", cell.lon_deg(), cell.lat_deg(), label, p.t, p.v);
    }
    out
}

pub fn cluster_geojson(clustering: &LnpvClustering) -> String {
    let features = clustering
        .cell_assignments
        .iter()
        .map(|(cell, &cluster)| point_feature(cell.lon_deg(), cell.lat_deg(), json!({ "cluster": cluster })))
        .collect();
    collection(features)
}

pub fn silhouette_csv(scores: &[(usize, f64)]) -> String {
    let mut out = String::from("k,mean_silhouette\n");
    for (k, s) in scores {
        let _ = writeln!(out, "{k},{s:.6}");
    }
    out
}

pub fn cluster_summary_csv(clustering: &LnpvClustering) -> String {
    let mut out = String::from(
        "cluster,centroid_t,centroid_v,cells,events,\
         v_min,v_q1,v_median,v_q3,v_max,t_min,t_q1,t_median,t_q3,t_max\n",
    );
    for ClusterSummary {
        cluster,
        cells,
        events,
        value: v,
        time: t,
    } in &clustering.summaries
    {
        let c = clustering.model.centroids[*cluster];
        let _ = writeln!(
            out,
            "{cluster},{:.4},{:.4},{cells},{events},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
            c.t, c.v, v.min, v.q1, v.median, v.q3, v.max, t.min, t.q1, t.median, t.q3, t.max
        );
    }
    out
}

pub fn monthly_counts_csv(counts: &CountSeries) -> String {
    let mut out = String::from("month_serial,year,month,count\n");
    for (m, c) in &counts.monthly {
        let _ = writeln!(out, "{},{},{},{}", m.serial(), m.year(), m.month(), c);
    }
    out
}

/// `year,count,ma10,ma20,ma30,band_lo,band_hi`. Each moving-average column
/// is empty until its window fills; band columns are empty without a band.
pub fn annual_table_csv(counts: &CountSeries, band: Option<&NullBand>) -> String {
    let values = counts.annual_values();
    let trailing = |w: usize| -> Vec<Option<f64>> {
        match crate::trend::moving_average(&values, w) {
            Ok(ma) => (0..values.len())
                .map(|i| (i + 1 >= w).then(|| ma[i + 1 - w]))
                .collect(),
            Err(_) => vec![None; values.len()],
        }
    };
    let (ma10, ma20, ma30) = (trailing(10), trailing(20), trailing(30));
    let mut out = String::from("year,count,ma10,ma20,ma30,band_lo,band_hi\n");
    for (i, (year, count)) in counts.annual.iter().enumerate() {
        let (lo, hi) = band
            .and_then(|b| b.years.iter().find(|y| y.year == *year))
            .map(|y| (y.lower.to_string(), y.upper.to_string()))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{year},{count},{},{},{},{lo},{hi}",
            opt(ma10[i]),
            opt(ma20[i]),
            opt(ma30[i])
        );
    }
    out
}

pub fn mann_kendall_csv(label: &str, r: &MannKendallResult) -> String {
    format!(
        "series,n,s,var_s,z,p_two_sided,alpha,direction\n{label},{},{},{:.6},{:.6},{:.6e},{},{}\n",
        r.n,
        r.s,
        r.var_s,
        r.z,
        r.p_two_sided,
        r.alpha,
        r.direction.as_str()
    )
}

pub fn mann_kendall_text(label: &str, r: &MannKendallResult) -> String {
    format!(
        "Mann-Kendall ({label}): n = {}, S = {}, Var(S) = {:.2}, Z = {:.4}, p = {:.3e}, trend at alpha {}: {}\n",
        r.n,
        r.s,
        r.var_s,
        r.z,
        r.p_two_sided,
        r.alpha,
        r.direction.as_str()
    )
}

pub fn wavelet_global_csv(spectrum: &WaveletSpectrum) -> String {
    let mut out = String::from("period_years,power,significance\n");
    for ((p, g), s) in spectrum.periods.iter().zip(&spectrum.global).zip(&spectrum.significance) {
        let _ = writeln!(out, "{p:.6},{g:.6},{s:.6}");
    }
    out
}

/// How a chart series is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mark {
    Line,
    Dashed,
    Dots,
}

#[derive(Clone, Debug)]
pub struct ChartSeries {
    pub label: String,
    pub color: &'static str,
    pub mark: Mark,
    pub points: Vec<(f64, f64)>,
}

impl ChartSeries {
    pub fn new(label: impl Into<String>, color: &'static str, mark: Mark, points: Vec<(f64, f64)>) -> Self {
        ChartSeries {
            label: label.into(),
            color,
            mark,
            points,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub series: Vec<ChartSeries>,
}

pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
];

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 450.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(f64::EPSILON);
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() * step;
    (0..)
        .map(|i| first + i as f64 * step)
        .take_while(|v| *v <= hi + step * 1e-9)
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    pub fn to_svg(&self) -> String {
        let tx = |x: f64| if self.log_x { x.max(f64::MIN_POSITIVE).log10() } else { x };
        let pts = self.series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(tx(x));
            x1 = x1.max(tx(x));
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        let pad = 0.05 * (y1 - y0);
        let (y0, y1) = (y0 - pad, y1 + pad);
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (tx(x) - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            svg,
            r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##
        );

        for t in nice_ticks(y0, y1, 6) {
            let y = sy(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                LEFT + pw,
                LEFT - 6.0,
                y + 4.0,
                fmt_tick(t)
            );
        }
        for t in nice_ticks(x0, x1, 8) {
            let x = LEFT + (t - x0) / (x1 - x0) * pw;
            let label = if self.log_x { fmt_tick(10f64.powf(t)) } else { fmt_tick(t) };
            let _ = writeln!(
                svg,
                r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#eee"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
                TOP + ph,
                TOP + ph + 16.0
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );

        for (i, s) in self.series.iter().enumerate() {
            let finite: Vec<(f64, f64)> = s
                .points
                .iter()
                .copied()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .collect();
            match s.mark {
                Mark::Line | Mark::Dashed => {
                    let path: Vec<String> = finite.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
                    let dash = if s.mark == Mark::Dashed { r#" stroke-dasharray="6 4""# } else { "" };
                    let _ = writeln!(
                        svg,
                        r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
                        s.color,
                        path.join(" ")
                    );
                }
                Mark::Dots => {
                    let _ = writeln!(svg, r#"<g fill="{}" fill-opacity="0.7">"#, s.color);
                    for &(x, y) in &finite {
                        let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2.2"/>"#, sx(x), sy(y));
                    }
                    svg.push_str("</g>\n");
                }
            }
            let ly = TOP + 10.0 + 18.0 * i as f64;
            let lx = LEFT + pw + 12.0;
            let _ = writeln!(
                svg,
                r#"<rect x="{lx:.2}" y="{:.2}" width="14" height="4" fill="{}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
                ly - 2.0,
                s.color,
                lx + 20.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 1000.0 || (v.fract().abs() < 1e-9) {
        format!("{}", v.round())
    } else if v.abs() >= 1.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.2}")
    }
}
