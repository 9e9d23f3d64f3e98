//! The full pipeline, rendered into an in-memory file tree.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::cluster::{cluster_lnpv_sets, ClusterCount};
use crate::config::{ProbabilityMode, RunConfig};
use crate::export::{self, Chart, ChartSeries, Mark, PALETTE};
use crate::extremes::{classify_pdsi, leading_year_counts, lnpv_map, PalmerClass};
use crate::grid::{coverage_profile, GridDataset};
use crate::spectral::{cwt_morlet, dominant_period, CwtOptions};
use crate::trend::{band_exceedance, mann_kendall, moving_average, null_band, ols_trend, CountSeries, NullBandParams};
use crate::Result;

/// Relative path to file contents.
pub type FileTree = BTreeMap<String, Vec<u8>>;

#[derive(Clone, Debug)]
pub struct Report {
    pub files: FileTree,
    pub summary: String,
}

/// Shortest annual series the wavelet stage accepts.
const MIN_WAVELET_YEARS: usize = 16;

/// Runs every stage on `dataset` (already restricted to `config.period`).
pub fn run_report(dataset: &GridDataset, config: &RunConfig) -> Result<Report> {
    let mut files = FileTree::new();
    let mut put = |name: &str, body: String| {
        files.insert(name.to_string(), body.into_bytes());
    };
    let fmt = config.formats;
    let period = dataset.period();

    let coverage = coverage_profile(dataset);
    if fmt.csv {
        put("coverage.csv", export::coverage_csv(&coverage));
    }
    if fmt.svg {
        put(
            "coverage.svg",
            Chart {
                title: "Share of cells without data".into(),
                x_label: "year".into(),
                y_label: "% missing".into(),
                log_x: false,
                series: vec![ChartSeries::new(
                    "missing",
                    PALETTE[0],
                    Mark::Line,
                    coverage.iter().map(|(m, p)| (m.fractional_year(), *p)).collect(),
                )],
            }
            .to_svg(),
        );
    }

    let sets = lnpv_map(dataset, config.k)?;
    let rank1_years = leading_year_counts(&sets);
    let mut classes: BTreeMap<PalmerClass, usize> = BTreeMap::new();
    for s in &sets {
        *classes.entry(classify_pdsi(s.leading().value)?).or_insert(0) += 1;
    }
    if fmt.csv {
        put("lnpv.csv", export::lnpv_csv(&sets));
        let mut t = String::from("year,cells\n");
        for (y, c) in &rank1_years {
            let _ = writeln!(t, "{y},{c}");
        }
        put("rank1_years.csv", t);
        let mut t = String::from("class,cells\n");
        for (c, n) in &classes {
            let _ = writeln!(t, "{},{n}", c.label());
        }
        put("rank1_classes.csv", t);
    }
    if fmt.geojson {
        put("lnpv.geojson", export::lnpv_geojson(&sets));
    }

    let clustering = cluster_lnpv_sets(&sets, &config.cluster_options(), config.seed)?;
    if fmt.csv {
        put("clusters.csv", export::cluster_csv(&clustering));
        put("cluster_summary.csv", export::cluster_summary_csv(&clustering));
        if let Some(scores) = &clustering.silhouette_scores {
            put("silhouette.csv", export::silhouette_csv(scores));
        }
    }
    if fmt.geojson {
        put("clusters.geojson", export::cluster_geojson(&clustering));
    }
    if fmt.svg {
        let mut by_cluster: Vec<Vec<(f64, f64)>> = vec![Vec::new(); clustering.model.k];
        for ((_, p), &c) in clustering.points.iter().zip(&clustering.model.assignments) {
            by_cluster[c].push((p.t, p.v));
        }
        put(
            "clusters.svg",
            Chart {
                title: format!("Extreme events, k = {}", clustering.model.k),
                x_label: "year".into(),
                y_label: "PDSI".into(),
                log_x: false,
                series: by_cluster
                    .into_iter()
                    .enumerate()
                    .map(|(c, pts)| ChartSeries::new(format!("cluster {c}"), PALETTE[c % PALETTE.len()], Mark::Dots, pts))
                    .collect(),
            }
            .to_svg(),
        );
    }

    let counts = CountSeries::from_sets(period, &sets);
    let monthly = counts.monthly_values();
    let annual = counts.annual_values();
    let ols = ols_trend(&monthly, 12.0)?;
    let mk_monthly = mann_kendall(&monthly, config.alpha)?;
    let mk_annual = mann_kendall(&annual, config.alpha)?;

    let mut band_params = NullBandParams::for_dataset(dataset, config.k, config.band_p == ProbabilityMode::Availability);
    band_params.reps = config.band_reps;
    band_params.lower_pct = config.band_lower_pct;
    band_params.upper_pct = config.band_upper_pct;
    let band = null_band(&band_params, config.seed)?;
    let exceedance = band_exceedance(&counts.annual, &band)?;

    if fmt.csv {
        put("monthly_counts.csv", export::monthly_counts_csv(&counts));
        put("annual_counts.csv", export::annual_table_csv(&counts, Some(&band)));
        put("mann_kendall_monthly.csv", export::mann_kendall_csv("monthly", &mk_monthly));
        put("mann_kendall_annual.csv", export::mann_kendall_csv("annual", &mk_annual));
    }
    if fmt.svg {
        put(
            "monthly_counts.svg",
            Chart {
                title: "Cells at one of their extremes, per month".into(),
                x_label: "year".into(),
                y_label: "cells".into(),
                log_x: false,
                series: vec![
                    ChartSeries::new(
                        "count",
                        PALETTE[0],
                        Mark::Line,
                        counts.monthly.iter().map(|(m, c)| (m.fractional_year(), *c as f64)).collect(),
                    ),
                    ChartSeries::new(
                        "OLS fit",
                        PALETTE[1],
                        Mark::Dashed,
                        [0, monthly.len() - 1]
                            .iter()
                            .map(|&i| {
                                let t = counts.monthly[i].0.fractional_year();
                                (t, ols.intercept + ols.slope * i as f64)
                            })
                            .collect(),
                    ),
                ],
            }
            .to_svg(),
        );
        let years: Vec<f64> = counts.annual.iter().map(|(y, _)| *y as f64).collect();
        let mut series = vec![ChartSeries::new(
            "annual count",
            PALETTE[0],
            Mark::Line,
            years.iter().copied().zip(annual.iter().copied()).collect(),
        )];
        for (w, color) in [(10, PALETTE[2]), (20, PALETTE[3]), (30, PALETTE[4])] {
            if let Ok(ma) = moving_average(&annual, w) {
                let pts = ma.iter().enumerate().map(|(j, v)| (years[j + w - 1], *v)).collect();
                series.push(ChartSeries::new(format!("{w}-yr mean"), color, Mark::Line, pts));
            }
        }
        series.push(ChartSeries::new(
            "null 5%",
            PALETTE[8],
            Mark::Dashed,
            band.years.iter().map(|b| (b.year as f64, b.lower as f64)).collect(),
        ));
        series.push(ChartSeries::new(
            "null 95%",
            PALETTE[1],
            Mark::Dashed,
            band.years.iter().map(|b| (b.year as f64, b.upper as f64)).collect(),
        ));
        put(
            "annual_counts.svg",
            Chart {
                title: "Annual extreme counts against random timing".into(),
                x_label: "year".into(),
                y_label: "cell-months".into(),
                log_x: false,
                series,
            }
            .to_svg(),
        );
    }

    let wavelet = if annual.len() >= MIN_WAVELET_YEARS {
        let spectrum = cwt_morlet(&annual, &CwtOptions::default())?;
        if fmt.csv {
            put("wavelet_global.csv", export::wavelet_global_csv(&spectrum));
        }
        if fmt.svg {
            put(
                "wavelet_global.svg",
                Chart {
                    title: "Global wavelet spectrum of annual counts".into(),
                    x_label: "period (years)".into(),
                    y_label: "power".into(),
                    log_x: true,
                    series: vec![
                        ChartSeries::new(
                            "global power",
                            PALETTE[0],
                            Mark::Line,
                            spectrum.periods.iter().copied().zip(spectrum.global.iter().copied()).collect(),
                        ),
                        ChartSeries::new(
                            "95% level",
                            PALETTE[1],
                            Mark::Dashed,
                            spectrum
                                .periods
                                .iter()
                                .copied()
                                .zip(spectrum.significance.iter().copied())
                                .collect(),
                        ),
                    ],
                }
                .to_svg(),
            );
        }
        Some(dominant_period(&spectrum))
    } else {
        None
    };

    let mut s = String::new();
    let _ = writeln!(s, "cells processed: {}", dataset.len());
    let _ = writeln!(s, "period: {} ({} months)", period, period.len());
    let _ = writeln!(s, "extremes per cell: {}", config.k);
    let _ = writeln!(s, "extreme cell-months: {}", counts.total());
    let mut top: Vec<(i32, usize)> = rank1_years.iter().map(|(y, c)| (*y, *c)).collect();
    top.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let top: Vec<String> = top.iter().take(3).map(|(y, c)| format!("{y} ({c})")).collect();
    let _ = writeln!(s, "years with most rank-1 extremes: {}", top.join(", "));
    let empty: Vec<String> = counts
        .monthly
        .iter()
        .filter(|(_, c)| *c == 0)
        .map(|(m, _)| m.to_string())
        .collect();
    let _ = writeln!(s, "months with no extremes: {}", if empty.is_empty() { "none".into() } else { empty.join(", ") });
    match clustering.silhouette_scores {
        Some(_) => {
            let _ = writeln!(
                s,
                "clusters: k = {} chosen by mean silhouette ({:.4})",
                clustering.model.k,
                clustering.model.mean_silhouette.unwrap_or(f64::NAN)
            );
        }
        None => {
            let k = match config.clusters {
                ClusterCount::Fixed(k) => k,
                ClusterCount::Auto { .. } => clustering.model.k,
            };
            let _ = writeln!(s, "clusters: k = {k} (fixed)");
        }
    }
    for (c, p) in clustering.model.centroids.iter().enumerate() {
        let _ = writeln!(s, "  centroid {c}: year {:.2}, PDSI {:.2}", p.t, p.v);
    }
    let _ = writeln!(s, "OLS slope: {:.4} cells per decade", ols.slope_per_decade);
    s.push_str(&export::mann_kendall_text("monthly", &mk_monthly));
    s.push_str(&export::mann_kendall_text("annual", &mk_annual));
    let _ = writeln!(
        s,
        "null band: {} replicates, years inside {:.1}%, sustained exceedance from {}",
        band_params.reps,
        100.0 * exceedance.fraction_inside(),
        exceedance.sustained_onset.map(|y| y.to_string()).unwrap_or_else(|| "never".into())
    );
    match wavelet {
        Some(d) => {
            let _ = writeln!(
                s,
                "wavelet: dominant period {}, significant: {}",
                d.period.map(|p| format!("{p:.2} years")).unwrap_or_else(|| "none".into()),
                d.significant
            );
        }
        None => {
            let _ = writeln!(s, "wavelet: skipped, fewer than {MIN_WAVELET_YEARS} years");
        }
    }

    files.insert("summary.txt".into(), s.clone().into_bytes());
    files.insert("run.conf".into(), config.replay_text().into_bytes());
    Ok(Report { files, summary: s })
}
