//! Run configuration as a flat `key = value` text file.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are an
//! error so typos never silently fall back to defaults.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::cluster::{ClusterCount, Init, KMeansOptions, LnpvClusterOptions, PointSet, Scaling};
use crate::grid::Period;
use crate::trend::NullBandParams;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbabilityMode {
    /// `k / period length` for every cell.
    Uniform,
    /// `min(k, valid) / valid` per cell.
    Availability,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub geojson: bool,
    pub svg: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Formats {
            csv: true,
            geojson: true,
            svg: true,
        }
    }
}

impl Formats {
    fn parse(s: &str) -> std::result::Result<Self, String> {
        let mut f = Formats {
            csv: false,
            geojson: false,
            svg: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "csv" => f.csv = true,
                "geojson" => f.geojson = true,
                "svg" => f.svg = true,
                other => return Err(format!("unknown format `{other}`")),
            }
        }
        Ok(f)
    }

    fn render(&self) -> String {
        let mut parts = Vec::new();
        if self.csv {
            parts.push("csv");
        }
        if self.geojson {
            parts.push("geojson");
        }
        if self.svg {
            parts.push("svg");
        }
        parts.join(",")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub period: Period,
    /// Extremes kept per cell.
    pub k: usize,
    pub clusters: ClusterCount,
    pub points: PointSet,
    pub scaling: Scaling,
    pub init: Init,
    pub restarts: usize,
    pub band_reps: usize,
    pub band_p: ProbabilityMode,
    pub band_lower_pct: f64,
    pub band_upper_pct: f64,
    pub alpha: f64,
    pub out: PathBuf,
    pub formats: Formats,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let band = NullBandParams::default();
        let km = KMeansOptions::default();
        RunConfig {
            input: None,
            period: Period::default(),
            k: crate::extremes::DEFAULT_CAPACITY,
            clusters: ClusterCount::Auto { min: 2, max: 10 },
            points: PointSet::Leading,
            scaling: km.scaling,
            init: km.init,
            restarts: km.n_restarts,
            band_reps: band.reps,
            band_p: ProbabilityMode::Uniform,
            band_lower_pct: band.lower_pct,
            band_upper_pct: band.upper_pct,
            alpha: 0.05,
            out: PathBuf::from("out"),
            formats: Formats::default(),
            seed: 0,
        }
    }
}

fn bad(line: usize, reason: impl Into<String>) -> Error {
    Error::Config {
        line,
        reason: reason.into(),
    }
}

impl RunConfig {
    pub fn kmeans_options(&self) -> KMeansOptions {
        KMeansOptions {
            init: self.init,
            n_restarts: self.restarts,
            scaling: self.scaling,
            ..KMeansOptions::default()
        }
    }

    pub fn cluster_options(&self) -> LnpvClusterOptions {
        LnpvClusterOptions {
            count: self.clusters,
            points: self.points,
            kmeans: self.kmeans_options(),
        }
    }

    /// Sets one key from its textual value. `line` is only used in errors.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let num = |v: &str| v.parse::<usize>().map_err(|_| bad(line, format!("`{key}` expects an integer, got `{v}`")));
        let real = |v: &str| v.parse::<f64>().map_err(|_| bad(line, format!("`{key}` expects a number, got `{v}`")));
        match key {
            "input" => self.input = (!value.is_empty()).then(|| PathBuf::from(value)),
            "period" => self.period = value.parse().map_err(|e: Error| bad(line, e.to_string()))?,
            "k" => self.k = num(value)?,
            "clusters" => self.clusters = parse_clusters(value).map_err(|r| bad(line, r))?,
            "points" => {
                self.points = match value {
                    "rank1" => PointSet::Leading,
                    "all10" | "all" => PointSet::All,
                    _ => return Err(bad(line, format!("points must be rank1 or all10, got `{value}`"))),
                }
            }
            "scaling" => {
                self.scaling = match value {
                    "none" => Scaling::None,
                    "standardize" => Scaling::Standardize,
                    _ => return Err(bad(line, format!("scaling must be none or standardize, got `{value}`"))),
                }
            }
            "init" => {
                self.init = match value {
                    "kmeans++" => Init::KMeansPlusPlus,
                    "random" => Init::Random,
                    _ => return Err(bad(line, format!("init must be kmeans++ or random, got `{value}`"))),
                }
            }
            "restarts" => self.restarts = num(value)?,
            "band_reps" => self.band_reps = num(value)?,
            "band_p" => {
                self.band_p = match value {
                    "uniform" => ProbabilityMode::Uniform,
                    "availability" => ProbabilityMode::Availability,
                    _ => return Err(bad(line, format!("band_p must be uniform or availability, got `{value}`"))),
                }
            }
            "band_lower_pct" => self.band_lower_pct = real(value)?,
            "band_upper_pct" => self.band_upper_pct = real(value)?,
            "alpha" => self.alpha = real(value)?,
            "out" => self.out = PathBuf::from(value),
            "formats" => self.formats = Formats::parse(value).map_err(|r| bad(line, r))?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| bad(line, format!("seed expects an unsigned integer, got `{value}`")))?
            }
            _ => return Err(bad(line, format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a config file's text on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(i + 1, format!("expected key = value, got `{line}`")))?;
            self.set(key.trim(), value.trim(), i + 1)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    /// The config as written next to a run's outputs. The output directory is
    /// left out so a tree replayed elsewhere is byte-identical.
    pub fn replay_text(&self) -> String {
        self.to_text()
            .lines()
            .filter(|l| !l.starts_with("out ="))
            .map(|l| format!("{l}\n"))
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let input = self.input.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let clusters = match self.clusters {
            ClusterCount::Fixed(k) => k.to_string(),
            ClusterCount::Auto { min, max } => format!("auto:{min}..{max}"),
        };
        let points = match self.points {
            PointSet::Leading => "rank1",
            PointSet::All => "all10",
        };
        let scaling = match self.scaling {
            Scaling::None => "none",
            Scaling::Standardize => "standardize",
        };
        let init = match self.init {
            Init::KMeansPlusPlus => "kmeans++",
            Init::Random => "random",
        };
        let band_p = match self.band_p {
            ProbabilityMode::Uniform => "uniform",
            ProbabilityMode::Availability => "availability",
        };
        let _ = writeln!(s, "input = {input}");
        let _ = writeln!(s, "period = {}", self.period);
        let _ = writeln!(s, "k = {}", self.k);
        let _ = writeln!(s, "clusters = {clusters}");
        let _ = writeln!(s, "points = {points}");
        let _ = writeln!(s, "scaling = {scaling}");
        let _ = writeln!(s, "init = {init}");
        let _ = writeln!(s, "restarts = {}", self.restarts);
        let _ = writeln!(s, "band_reps = {}", self.band_reps);
        let _ = writeln!(s, "band_p = {band_p}");
        let _ = writeln!(s, "band_lower_pct = {}", self.band_lower_pct);
        let _ = writeln!(s, "band_upper_pct = {}", self.band_upper_pct);
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "out = {}", self.out.display());
        let _ = writeln!(s, "formats = {}", self.formats.render());
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }
}

fn parse_clusters(v: &str) -> std::result::Result<ClusterCount, String> {
    if v == "auto" {
        return Ok(ClusterCount::Auto { min: 2, max: 10 });
    }
    if let Some(range) = v.strip_prefix("auto:") {
        let (a, b) = range
            .split_once("..")
            .ok_or_else(|| format!("expected auto:MIN..MAX, got `{v}`"))?;
        let n = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad bound `{t}` in `{v}`"));
        return Ok(ClusterCount::Auto { min: n(a)?, max: n(b)? });
    }
    v.parse()
        .map(ClusterCount::Fixed)
        .map_err(|_| format!("clusters must be an integer, auto or auto:MIN..MAX, got `{v}`"))
}
