//! Monte Carlo envelope for annual extreme counts when each cell's extreme
//! months fall at random.
//!
//! For one simulated year every cell draws 12 uniforms on (0, 1) and scores
//! one per draw below its per-month probability; the replicate count is the
//! sum over cells. Repeating that `reps` times per year and taking
//! nearest-rank percentiles gives the band.

use rand::Rng;
use rand_distr::Open01;

use crate::grid::GridDataset;
use crate::rng::{domain, pair_index, substream};
use crate::stats::nearest_rank;
use crate::{par, Error, Result};

/// Per-month probability that a given month is one of a cell's extremes.
#[derive(Clone, Debug, PartialEq)]
pub enum CellProbabilities {
    /// The same probability for every cell.
    Uniform { n_cells: usize, p: f64 },
    /// One probability per cell.
    PerCell(Vec<f64>),
}

impl CellProbabilities {
    fn n_cells(&self) -> usize {
        match self {
            CellProbabilities::Uniform { n_cells, .. } => *n_cells,
            CellProbabilities::PerCell(p) => p.len(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |p: f64| (0.0..=1.0).contains(&p);
        match self {
            CellProbabilities::Uniform { p, .. } if !ok(*p) => {
                Err(Error::invalid(format!("probability {p} outside [0, 1]")))
            }
            CellProbabilities::PerCell(ps) => match ps.iter().find(|&&p| !ok(p)) {
                Some(p) => Err(Error::invalid(format!("probability {p} outside [0, 1]"))),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NullBandParams {
    pub cells: CellProbabilities,
    pub reps: usize,
    pub start_year: i32,
    pub years: usize,
    pub lower_pct: f64,
    pub upper_pct: f64,
}

impl Default for NullBandParams {
    /// 2755 cells, p = 10/1380, 100 replicates, 1900..=2014, 5th/95th percentiles.
    fn default() -> Self {
        NullBandParams {
            cells: CellProbabilities::Uniform {
                n_cells: 2755,
                p: 10.0 / 1380.0,
            },
            reps: 100,
            start_year: 1900,
            years: 115,
            lower_pct: 5.0,
            upper_pct: 95.0,
        }
    }
}

impl NullBandParams {
    /// Parameters matching a dataset: one cell per populated cell, its whole
    /// period, and `k` extremes per cell.
    ///
    /// With `respect_availability` each cell uses `min(k, valid)/valid`
    /// instead of `k / period length`.
    pub fn for_dataset(dataset: &GridDataset, k: usize, respect_availability: bool) -> Self {
        let period = dataset.period();
        let cells = if respect_availability {
            CellProbabilities::PerCell(
                dataset
                    .series()
                    .map(|s| {
                        let valid = s.valid_count();
                        k.min(valid) as f64 / valid as f64
                    })
                    .collect(),
            )
        } else {
            CellProbabilities::Uniform {
                n_cells: dataset.len(),
                p: (k as f64 / period.len() as f64).min(1.0),
            }
        };
        NullBandParams {
            cells,
            start_year: period.first_year(),
            years: period.year_count(),
            ..NullBandParams::default()
        }
    }

    fn validate(&self) -> Result<()> {
        self.cells.validate()?;
        if self.reps < 2 {
            return Err(Error::invalid("reps must be at least 2"));
        }
        if self.years == 0 {
            return Err(Error::invalid("years must be at least 1"));
        }
        if !(0.0 <= self.lower_pct && self.lower_pct <= self.upper_pct && self.upper_pct <= 100.0) {
            return Err(Error::invalid(format!(
                "percentiles must satisfy 0 <= {} <= {} <= 100",
                self.lower_pct, self.upper_pct
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BandYear {
    pub year: i32,
    pub lower: u32,
    pub upper: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NullBand {
    pub years: Vec<BandYear>,
    /// Replicate counts per year, in replicate order.
    pub replicates: Vec<Vec<u32>>,
    pub params: NullBandParams,
    pub seed: u64,
}

impl NullBand {
    pub fn year_range(&self) -> (i32, i32) {
        (self.years[0].year, self.years[self.years.len() - 1].year)
    }
}

/// Simulates the random-timing band.
///
/// Replicate `r` of year index `y` draws from the substream keyed on
/// `(seed, y, r)`, so the band is identical for any thread count.
pub fn null_band(params: &NullBandParams, seed: u64) -> Result<NullBand> {
    params.validate()?;
    let probs: Vec<f64> = match &params.cells {
        CellProbabilities::Uniform { n_cells, p } => vec![*p; *n_cells],
        CellProbabilities::PerCell(ps) => ps.clone(),
    };
    debug_assert_eq!(probs.len(), params.cells.n_cells());

    let replicates: Vec<Vec<u32>> = par::map_range(params.years, |y| {
        (0..params.reps)
            .map(|r| {
                let mut rng = substream(seed, domain::NULL_BAND, pair_index(y as u64, r as u64));
                let mut count = 0u32;
                for &p in &probs {
                    for _ in 0..12 {
                        let u: f64 = rng.sample(Open01);
                        count += (u < p) as u32;
                    }
                }
                count
            })
            .collect()
    });

    let years = replicates
        .iter()
        .enumerate()
        .map(|(y, counts)| {
            let mut sorted = counts.clone();
            sorted.sort_unstable();
            BandYear {
                year: params.start_year + y as i32,
                lower: nearest_rank(&sorted, params.lower_pct),
                upper: nearest_rank(&sorted, params.upper_pct),
            }
        })
        .collect();

    Ok(NullBand {
        years,
        replicates,
        params: params.clone(),
        seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BandPosition {
    Below,
    Inside,
    Above,
}

impl BandPosition {
    pub fn as_str(&self) -> &'static str {
        match self {
            BandPosition::Below => "below",
            BandPosition::Inside => "inside",
            BandPosition::Above => "above",
        }
    }
}

/// Minimum run of consecutive years above the band that counts as sustained.
pub const SUSTAINED_RUN: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct Exceedance {
    pub positions: Vec<(i32, BandPosition)>,
    /// First year of the first run of at least three years above the band.
    pub sustained_onset: Option<i32>,
}

impl Exceedance {
    pub fn fraction_inside(&self) -> f64 {
        let inside = self
            .positions
            .iter()
            .filter(|(_, p)| *p == BandPosition::Inside)
            .count();
        inside as f64 / self.positions.len() as f64
    }
}

/// Places each annual count relative to the band (bounds inclusive).
pub fn band_exceedance(annual: &[(i32, u32)], band: &NullBand) -> Result<Exceedance> {
    let counts_range = match (annual.first(), annual.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => return Err(Error::invalid("no annual counts")),
    };
    let same_years = annual.len() == band.years.len()
        && annual.iter().zip(&band.years).all(|((y, _), b)| *y == b.year);
    if !same_years {
        return Err(Error::YearMismatch {
            counts: counts_range,
            band: band.year_range(),
        });
    }
    let positions: Vec<(i32, BandPosition)> = annual
        .iter()
        .zip(&band.years)
        .map(|(&(year, count), b)| {
            let pos = if count < b.lower {
                BandPosition::Below
            } else if count > b.upper {
                BandPosition::Above
            } else {
                BandPosition::Inside
            };
            (year, pos)
        })
        .collect();

    let mut sustained_onset = None;
    let mut run = 0;
    for (i, (_, pos)) in positions.iter().enumerate() {
        if *pos == BandPosition::Above {
            run += 1;
            if run == SUSTAINED_RUN {
                sustained_onset = Some(positions[i + 1 - SUSTAINED_RUN].0);
                break;
            }
        } else {
            run = 0;
        }
    }
    Ok(Exceedance {
        positions,
        sustained_onset,
    })
}
