//! `droughtscan` command-line interface.

mod output;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use droughtscan::cluster::{cluster_lnpv_sets, Init, PointSet, Scaling};
use droughtscan::config::{ProbabilityMode, RunConfig};
use droughtscan::export::{self, Chart, ChartSeries, Mark, PALETTE};
use droughtscan::extremes::{classify_pdsi, lnpv_map};
use droughtscan::grid::{
    coverage_profile, generate_synthetic, ingest_csv, write_csv, GridDataset, IngestOptions, LateDrop, Period,
    SyntheticSpec, DEFAULT_SENTINEL,
};
use droughtscan::report::run_report;
use droughtscan::spectral::{cwt_morlet, dominant_period, CwtOptions};
use droughtscan::trend::{
    band_exceedance, mann_kendall, monthly_lnpv_counts, null_band, ols_trend, CellProbabilities, NullBandParams,
};

#[derive(Parser, Debug)]
#[command(name = "droughtscan", version, about = "Extreme-drought analysis of gridded monthly PDSI")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Only log errors.
    #[arg(long, short, global = true, conflicts_with = "verbose")]
    quiet: bool,
    /// More logging; repeat for debug output.
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// key = value config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Analysis period, `YYYY-MM..YYYY-MM` or `YYYY..YYYY`.
    #[arg(long, global = true)]
    period: Option<String>,
}

#[derive(Args, Debug, Default)]
struct InputArgs {
    /// PDSI CSV (`lon,lat,year,month,pdsi`); falls back to `input` in the config.
    input: Option<PathBuf>,
    /// Abort on malformed or duplicate rows instead of skipping them.
    #[arg(long)]
    strict: bool,
    /// Value that marks a missing month.
    #[arg(long, default_value_t = DEFAULT_SENTINEL, allow_hyphen_values = true)]
    sentinel: f64,
}

#[derive(Args, Debug, Default)]
struct ExtremeArgs {
    /// Extremes kept per cell.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PointsArg {
    Rank1,
    All10,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScalingArg {
    None,
    Standardize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InitArg {
    #[value(name = "kmeans++")]
    KMeansPlusPlus,
    Random,
}

#[derive(Args, Debug, Default)]
struct ClusterArgs {
    /// Number of clusters, or `auto` to pick by mean silhouette.
    #[arg(long)]
    clusters: Option<String>,
    #[arg(long)]
    points: Option<PointsArg>,
    #[arg(long)]
    scaling: Option<ScalingArg>,
    #[arg(long)]
    init: Option<InitArg>,
    #[arg(long)]
    restarts: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct BandArgs {
    /// Monte Carlo replicates per year.
    #[arg(long)]
    reps: Option<usize>,
    /// Use each cell's own record length for its extreme probability.
    #[arg(long)]
    respect_availability: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a CSV and write its normalized form.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Per-month share of the lattice without data.
    Coverage {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Each cell's k most negative months.
    Extract {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        extremes: ExtremeArgs,
    },
    /// Palmer class of values, or of every extracted extreme with --input.
    Classify {
        #[arg(allow_hyphen_values = true)]
        values: Vec<f64>,
        /// Classify the extremes of this CSV instead.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        extremes: ExtremeArgs,
    },
    /// K-means on the per-cell extremes.
    Cluster {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        extremes: ExtremeArgs,
        #[command(flatten)]
        cluster: ClusterArgs,
    },
    /// Monthly and annual extreme counts with OLS and Mann-Kendall.
    Trend {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        extremes: ExtremeArgs,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Random-timing band for annual counts, and exceedance when given data.
    Nullband {
        /// Dataset whose counts are placed against the band.
        input: Option<PathBuf>,
        #[command(flatten)]
        extremes: ExtremeArgs,
        #[command(flatten)]
        band: BandArgs,
        /// Cells to simulate when no dataset is given.
        #[arg(long, default_value_t = 2755)]
        cells: usize,
        /// Per-month extreme probability when no dataset is given (default k / months).
        #[arg(long)]
        p: Option<f64>,
    },
    /// Morlet wavelet scan of the annual counts.
    Wavelet {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        extremes: ExtremeArgs,
        /// Analyze a plain one-value-per-line series instead of a dataset.
        #[arg(long, conflicts_with = "input")]
        series: Option<PathBuf>,
    },
    /// Generate a synthetic AR(1) dataset.
    Synth {
        #[arg(long, default_value_t = 500)]
        cells: usize,
        #[arg(long, default_value_t = 0.9)]
        phi: f64,
        #[arg(long, default_value_t = 1.0)]
        noise_sd: f64,
        /// Linear drift, PDSI units per century.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        trend: f64,
        #[arg(long, default_value_t = 0.0)]
        missing: f64,
        /// Start year of a late drying ramp.
        #[arg(long, requires = "late_depth")]
        late_from: Option<i32>,
        /// PDSI drop reached at the end of the period.
        #[arg(long, requires = "late_from")]
        late_depth: Option<f64>,
        /// File name inside the output directory.
        #[arg(long, default_value = "synthetic.csv")]
        name: String,
    },
    /// Full pipeline: every table, map and plot.
    Report {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        extremes: ExtremeArgs,
        #[command(flatten)]
        cluster: ClusterArgs,
        #[command(flatten)]
        band: BandArgs,
        #[arg(long)]
        alpha: Option<f64>,
    },
}

/// Failures sorted by exit status.
enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl From<droughtscan::Error> for Failure {
    fn from(e: droughtscan::Error) -> Self {
        match e {
            droughtscan::Error::Config { .. } => Failure::Usage(e.into()),
            _ => Failure::Data(e.into()),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow!("{msg}"))
}

fn data(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Data(e.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion
                | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };

    let level = if cli.global.quiet {
        log::LevelFilter::Error
    } else {
        match cli.global.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            _ => log::LevelFilter::Debug,
        }
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Outcome<()> {
    if let Some(n) = cli.global.threads {
        set_threads(n)?;
    }
    let mut config = RunConfig::default();
    if let Some(path) = &cli.global.config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(Failure::Usage)?;
        config
            .apply_text(&text)
            .map_err(|e| Failure::Usage(anyhow!("{}: {e}", path.display())))?;
    }
    if let Some(seed) = cli.global.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.global.out {
        config.out = out.clone();
    }
    if let Some(p) = &cli.global.period {
        config.period = p.parse().map_err(|e| usage(format!("--period: {e}")))?;
    }
    dispatch(cli.command, config)
}

#[cfg(feature = "parallel")]
fn set_threads(n: usize) -> Outcome<()> {
    if n == 0 {
        return Err(usage("--threads must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(format!("--threads: {e}")))
}

#[cfg(not(feature = "parallel"))]
fn set_threads(n: usize) -> Outcome<()> {
    if n == 0 {
        return Err(usage("--threads must be at least 1"));
    }
    log::info!("built without parallelism; --threads {n} ignored");
    Ok(())
}

fn apply_input(config: &mut RunConfig, input: &Option<PathBuf>) {
    if let Some(p) = input {
        config.input = Some(p.clone());
    }
}

fn apply_extremes(config: &mut RunConfig, args: &ExtremeArgs) -> Outcome<()> {
    if let Some(k) = args.k {
        if k == 0 {
            return Err(usage("--k must be at least 1"));
        }
        config.k = k;
    }
    Ok(())
}

fn apply_cluster(config: &mut RunConfig, args: &ClusterArgs) -> Outcome<()> {
    if let Some(c) = &args.clusters {
        config
            .set("clusters", c, 0)
            .map_err(|_| usage(format!("--clusters expects a number, auto or auto:MIN..MAX, got `{c}`")))?;
    }
    if let Some(p) = args.points {
        config.points = match p {
            PointsArg::Rank1 => PointSet::Leading,
            PointsArg::All10 => PointSet::All,
        };
    }
    if let Some(s) = args.scaling {
        config.scaling = match s {
            ScalingArg::None => Scaling::None,
            ScalingArg::Standardize => Scaling::Standardize,
        };
    }
    if let Some(i) = args.init {
        config.init = match i {
            InitArg::KMeansPlusPlus => Init::KMeansPlusPlus,
            InitArg::Random => Init::Random,
        };
    }
    if let Some(r) = args.restarts {
        config.restarts = r;
    }
    Ok(())
}

fn apply_band(config: &mut RunConfig, args: &BandArgs) {
    if let Some(r) = args.reps {
        config.band_reps = r;
    }
    if args.respect_availability {
        config.band_p = ProbabilityMode::Availability;
    }
}

fn load(config: &RunConfig, args: &InputArgs) -> Outcome<GridDataset> {
    let path = config
        .input
        .as_ref()
        .ok_or_else(|| usage("no input file given (positional INPUT or `input` in --config)"))?;
    load_path(path, config.period, args.strict, args.sentinel).map(|(ds, _)| ds)
}

fn load_path(
    path: &Path,
    period: Period,
    strict: bool,
    sentinel: f64,
) -> Outcome<(GridDataset, droughtscan::grid::IngestReport)> {
    let file = File::open(path)
        .with_context(|| format!("opening {}", path.display()))
        .map_err(Failure::Data)?;
    let opts = IngestOptions {
        missing_sentinel: sentinel,
        strict,
        period,
    };
    let ingested = ingest_csv(BufReader::new(file), &opts)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Data)?;
    let r = &ingested.report;
    if !r.malformed_rows.is_empty() {
        log::warn!("skipped {} malformed rows", r.malformed_rows.len());
    }
    if r.duplicate_rows > 0 {
        log::warn!("{} duplicate rows, last value kept", r.duplicate_rows);
    }
    if r.out_of_range_values > 0 {
        log::warn!("{} values outside [-10, 10]", r.out_of_range_values);
    }
    log::info!(
        "{}: {} rows, {} cells over {}",
        path.display(),
        r.rows,
        ingested.dataset.len(),
        period
    );
    Ok((ingested.dataset, ingested.report))
}

type Files = BTreeMap<String, Vec<u8>>;

fn put(files: &mut Files, name: &str, body: String) {
    files.insert(name.to_string(), body.into_bytes());
}

fn finish(config: &RunConfig, mut files: Files) -> Outcome<()> {
    files.insert("run.conf".into(), config.replay_text().into_bytes());
    output::write_tree(&config.out, &files).map_err(Failure::Data)?;
    log::info!("wrote {} files to {}", files.len(), config.out.display());
    Ok(())
}

fn dispatch(command: Command, mut config: RunConfig) -> Outcome<()> {
    let mut files = Files::new();
    match command {
        Command::Ingest { input } => {
            apply_input(&mut config, &input.input);
            let path = config.input.clone().ok_or_else(|| usage("no input file given"))?;
            let (ds, r) = load_path(&path, config.period, input.strict, input.sentinel)?;
            let mut csv = Vec::new();
            write_csv(&ds, &mut csv).map_err(data)?;
            files.insert("dataset.csv".into(), csv);
            let text = format!(
                "rows: {}\nsentinel rows: {}\nmalformed rows: {}\nduplicate rows: {}\nrows outside period: {}\n\
                 values outside [-10, 10]: {}\ncells: {}\nperiod: {}\n",
                r.rows,
                r.sentinel_rows,
                r.malformed_rows.len(),
                r.duplicate_rows,
                r.outside_period_rows,
                r.out_of_range_values,
                ds.len(),
                ds.period()
            );
            print!("{text}");
            put(&mut files, "ingest_report.txt", text);
        }
        Command::Coverage { input } => {
            apply_input(&mut config, &input.input);
            let ds = load(&config, &input)?;
            let profile = coverage_profile(&ds);
            put(&mut files, "coverage.csv", export::coverage_csv(&profile));
            if config.formats.svg {
                let chart = Chart {
                    title: "Share of cells without data".into(),
                    x_label: "year".into(),
                    y_label: "% missing".into(),
                    log_x: false,
                    series: vec![ChartSeries::new(
                        "missing",
                        PALETTE[0],
                        Mark::Line,
                        profile.iter().map(|(m, p)| (m.fractional_year(), *p)).collect(),
                    )],
                };
                put(&mut files, "coverage.svg", chart.to_svg());
            }
        }
        Command::Extract { input, extremes } => {
            apply_input(&mut config, &input.input);
            apply_extremes(&mut config, &extremes)?;
            let ds = load(&config, &input)?;
            let sets = lnpv_map(&ds, config.k)?;
            put(&mut files, "lnpv.csv", export::lnpv_csv(&sets));
            if config.formats.geojson {
                put(&mut files, "lnpv.geojson", export::lnpv_geojson(&sets));
            }
            println!("{} cells, {} events", sets.len(), sets.iter().map(|s| s.events().len()).sum::<usize>());
        }
        Command::Classify { values, input, extremes } => {
            apply_extremes(&mut config, &extremes)?;
            if input.is_none() && values.is_empty() {
                return Err(usage("give PDSI values or --input"));
            }
            for v in &values {
                println!("{v},{}", classify_pdsi(*v)?);
            }
            let Some(path) = input else { return Ok(()) };
            config.input = Some(path.clone());
            let (ds, _) = load_path(&path, config.period, false, DEFAULT_SENTINEL)?;
            let sets = lnpv_map(&ds, config.k)?;
            let mut csv = String::from("lon,lat,rank,year,month,pdsi,class\n");
            for set in &sets {
                for (rank, e) in set.events().iter().enumerate() {
                    csv.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        e.cell.lon_deg(),
                        e.cell.lat_deg(),
                        rank + 1,
                        e.when.year(),
                        e.when.month(),
                        e.value,
                        classify_pdsi(e.value)?
                    ));
                }
            }
            put(&mut files, "classes.csv", csv);
        }
        Command::Cluster {
            input,
            extremes,
            cluster,
        } => {
            apply_input(&mut config, &input.input);
            apply_extremes(&mut config, &extremes)?;
            apply_cluster(&mut config, &cluster)?;
            let ds = load(&config, &input)?;
            let sets = lnpv_map(&ds, config.k)?;
            let out = cluster_lnpv_sets(&sets, &config.cluster_options(), config.seed)?;
            put(&mut files, "clusters.csv", export::cluster_csv(&out));
            put(&mut files, "cluster_summary.csv", export::cluster_summary_csv(&out));
            if let Some(scores) = &out.silhouette_scores {
                put(&mut files, "silhouette.csv", export::silhouette_csv(scores));
            }
            if config.formats.geojson {
                put(&mut files, "clusters.geojson", export::cluster_geojson(&out));
            }
            println!("k = {}", out.model.k);
            for (c, p) in out.model.centroids.iter().enumerate() {
                println!("centroid {c}: year {:.2}, PDSI {:.2}", p.t, p.v);
            }
        }
        Command::Trend { input, extremes, alpha } => {
            apply_input(&mut config, &input.input);
            apply_extremes(&mut config, &extremes)?;
            if let Some(a) = alpha {
                config.alpha = a;
            }
            let ds = load(&config, &input)?;
            let counts = monthly_lnpv_counts(&ds, config.k)?;
            let monthly = counts.monthly_values();
            let ols = ols_trend(&monthly, 12.0)?;
            let mk_m = mann_kendall(&monthly, config.alpha)?;
            let mk_a = mann_kendall(&counts.annual_values(), config.alpha)?;
            put(&mut files, "monthly_counts.csv", export::monthly_counts_csv(&counts));
            put(&mut files, "annual_counts.csv", export::annual_table_csv(&counts, None));
            put(&mut files, "mann_kendall_monthly.csv", export::mann_kendall_csv("monthly", &mk_m));
            put(&mut files, "mann_kendall_annual.csv", export::mann_kendall_csv("annual", &mk_a));
            let text = format!(
                "OLS slope: {:.4} cells per decade\n{}{}",
                ols.slope_per_decade,
                export::mann_kendall_text("monthly", &mk_m),
                export::mann_kendall_text("annual", &mk_a)
            );
            print!("{text}");
            put(&mut files, "trend.txt", text);
        }
        Command::Nullband {
            input,
            extremes,
            band,
            cells,
            p,
        } => {
            apply_extremes(&mut config, &extremes)?;
            apply_band(&mut config, &band);
            let dataset = match &input {
                Some(path) => {
                    config.input = Some(path.clone());
                    Some(load_path(path, config.period, false, DEFAULT_SENTINEL)?.0)
                }
                None => None,
            };
            let mut params = match &dataset {
                Some(ds) => NullBandParams::for_dataset(ds, config.k, config.band_p == ProbabilityMode::Availability),
                None => NullBandParams {
                    cells: CellProbabilities::Uniform {
                        n_cells: cells,
                        p: p.unwrap_or(config.k as f64 / config.period.len() as f64),
                    },
                    start_year: config.period.first_year(),
                    years: config.period.year_count(),
                    ..NullBandParams::default()
                },
            };
            params.reps = config.band_reps;
            params.lower_pct = config.band_lower_pct;
            params.upper_pct = config.band_upper_pct;
            let nb = null_band(&params, config.seed)?;
            let mut csv = String::from("year,band_lo,band_hi\n");
            for b in &nb.years {
                csv.push_str(&format!("{},{},{}\n", b.year, b.lower, b.upper));
            }
            put(&mut files, "nullband.csv", csv);
            if let Some(ds) = &dataset {
                let counts = monthly_lnpv_counts(ds, config.k)?;
                let ex = band_exceedance(&counts.annual, &nb)?;
                let mut csv = String::from("year,count,band_lo,band_hi,position\n");
                for (((year, count), b), (_, pos)) in counts.annual.iter().zip(&nb.years).zip(&ex.positions) {
                    csv.push_str(&format!("{year},{count},{},{},{}\n", b.lower, b.upper, pos.as_str()));
                }
                put(&mut files, "exceedance.csv", csv);
                println!(
                    "years inside band: {:.1}%, sustained exceedance from {}",
                    100.0 * ex.fraction_inside(),
                    ex.sustained_onset.map(|y| y.to_string()).unwrap_or_else(|| "never".into())
                );
            }
        }
        Command::Wavelet {
            input,
            extremes,
            series,
        } => {
            apply_extremes(&mut config, &extremes)?;
            let values = match &series {
                Some(path) => read_series(path)?,
                None => {
                    apply_input(&mut config, &input.input);
                    let ds = load(&config, &input)?;
                    monthly_lnpv_counts(&ds, config.k)?.annual_values()
                }
            };
            let spectrum = cwt_morlet(&values, &CwtOptions::default())?;
            put(&mut files, "wavelet_global.csv", export::wavelet_global_csv(&spectrum));
            let d = dominant_period(&spectrum);
            match d.period {
                Some(p) => println!("dominant period {p:.2} years (significant)"),
                None => println!("no significant period"),
            }
        }
        Command::Synth {
            cells,
            phi,
            noise_sd,
            trend,
            missing,
            late_from,
            late_depth,
            name,
        } => {
            let spec = SyntheticSpec {
                n_cells: cells,
                period: config.period,
                ar1_phi: phi,
                noise_sd,
                trend_per_century: trend,
                missing_fraction: missing,
                late_drop: late_from.zip(late_depth).map(|(from_year, depth)| LateDrop { from_year, depth }),
            };
            let ds = generate_synthetic(&spec, config.seed).map_err(|e| usage(e.to_string()))?;
            let mut csv = Vec::new();
            write_csv(&ds, &mut csv).map_err(data)?;
            files.insert(name.clone(), csv);
            // The replay config points at the generated file so `report` can follow.
            config.input = Some(config.out.join(&name));
        }
        Command::Report {
            input,
            extremes,
            cluster,
            band,
            alpha,
        } => {
            apply_input(&mut config, &input.input);
            apply_extremes(&mut config, &extremes)?;
            apply_cluster(&mut config, &cluster)?;
            apply_band(&mut config, &band);
            if let Some(a) = alpha {
                config.alpha = a;
            }
            let ds = load(&config, &input)?;
            let report = run_report(&ds, &config)?;
            print!("{}", report.summary);
            output::write_tree(&config.out, &report.files).map_err(Failure::Data)?;
            return Ok(());
        }
    }
    finish(&config, files)
}

fn read_series(path: &Path) -> Outcome<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Data)?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
        .map(|(i, l)| {
            l.parse::<f64>()
                .map_err(|_| data(anyhow!("{}: value {} is not a number: `{l}`", path.display(), i + 1)))
        })
        .collect()
}
