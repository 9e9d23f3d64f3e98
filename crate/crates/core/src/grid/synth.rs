//! Seeded AR(1) stand-in for real gridded PDSI.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{GridCoordinate, GridDataset, PdsiSeries, Period, LATTICE_SIZE};
use crate::rng::{domain, substream};
use crate::{par, Error, Result};

/// Stationary standard deviation every synthetic series is rescaled to.
const TARGET_SD: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub n_cells: usize,
    pub period: Period,
    /// Lag-one autocorrelation, in `[0, 1)`.
    pub ar1_phi: f64,
    pub noise_sd: f64,
    /// Linear drift added to every cell, PDSI units per 100 years.
    pub trend_per_century: f64,
    /// Independent per-month probability of a gap, in `[0, 1)`.
    pub missing_fraction: f64,
    /// Optional drying ramp concentrated at the end of the period.
    pub late_drop: Option<LateDrop>,
}

/// Subtracts a ramp growing linearly from 0 at January of `from_year` to
/// `depth` at the last month of the period.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LateDrop {
    pub from_year: i32,
    pub depth: f64,
}

impl LateDrop {
    fn offset(&self, period: &Period, t: usize) -> f64 {
        let start = (self.from_year - period.first_year()) as f64 * 12.0 - (period.start().month() as f64 - 1.0);
        let end = (period.len() - 1) as f64;
        let t = t as f64;
        if t < start || end <= start {
            0.0
        } else {
            -self.depth * (t - start + 1.0) / (end - start + 1.0)
        }
    }
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_cells: 500,
            period: Period::default(),
            ar1_phi: 0.9,
            noise_sd: 1.0,
            trend_per_century: 0.0,
            missing_fraction: 0.0,
            late_drop: None,
        }
    }
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        if self.n_cells == 0 || self.n_cells > LATTICE_SIZE {
            return Err(Error::invalid(format!(
                "n_cells must be in 1..={LATTICE_SIZE}, got {}",
                self.n_cells
            )));
        }
        if !(0.0..1.0).contains(&self.ar1_phi) {
            return Err(Error::invalid(format!("ar1_phi must be in [0, 1), got {}", self.ar1_phi)));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd > 0.0) {
            return Err(Error::invalid(format!("noise_sd must be > 0, got {}", self.noise_sd)));
        }
        if !self.trend_per_century.is_finite() {
            return Err(Error::invalid("trend_per_century must be finite"));
        }
        if !(0.0..1.0).contains(&self.missing_fraction) {
            return Err(Error::invalid(format!(
                "missing_fraction must be in [0, 1), got {}",
                self.missing_fraction
            )));
        }
        if let Some(d) = self.late_drop {
            if !(d.depth.is_finite() && d.depth >= 0.0) {
                return Err(Error::invalid(format!("late drop depth must be >= 0, got {}", d.depth)));
            }
        }
        Ok(())
    }
}

/// Builds a dataset of `n_cells` AR(1) series at distinct lattice positions.
///
/// Each series is rescaled so its stationary standard deviation is 2.0, then
/// drifted, clipped to ±10, and punched with independent gaps. Output is a
/// pure function of `(spec, seed)`. Cells whose every month came out missing
/// are dropped like any other empty cell.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<GridDataset> {
    spec.validate()?;
    let mut layout_rng = substream(seed, domain::SYNTHETIC_LAYOUT, 0);
    let mut cells: Vec<GridCoordinate> = index::sample(&mut layout_rng, LATTICE_SIZE, spec.n_cells)
        .into_iter()
        .map(|i| GridCoordinate::from_flat(i).expect("sampled below lattice size"))
        .collect();
    cells.sort();

    let series = par::map_collect(&cells, |&cell| synth_series(spec, seed, cell));
    GridDataset::new(spec.period, series)
}

fn synth_series(spec: &SyntheticSpec, seed: u64, cell: GridCoordinate) -> PdsiSeries {
    let mut rng = substream(seed, domain::SYNTHETIC_CELL, cell.flat() as u64);
    let phi = spec.ar1_phi;
    let stationary_sd = spec.noise_sd / (1.0 - phi * phi).sqrt();
    let scale = TARGET_SD / stationary_sd;
    let innovation = Normal::new(0.0, spec.noise_sd).expect("validated noise_sd");

    let n = spec.period.len();
    let mut values = Vec::with_capacity(n);
    let mut x = Normal::new(0.0, stationary_sd).expect("finite sd").sample(&mut rng);
    for t in 0..n {
        if t > 0 {
            x = phi * x + innovation.sample(&mut rng);
        }
        let mut drift = spec.trend_per_century * t as f64 / 1200.0;
        if let Some(d) = &spec.late_drop {
            drift += d.offset(&spec.period, t);
        }
        let value = (x * scale + drift).clamp(-10.0, 10.0);
        // Always draw so the gap mask never shifts the value stream.
        let gap: f64 = rng.random();
        values.push((gap >= spec.missing_fraction).then_some(value));
    }
    PdsiSeries::new(cell, spec.period, values).expect("finite values over the spec period")
}
