//! Gridded monthly PDSI: lattice geometry, the dataset model, CSV ingestion,
//! coverage profiling and a synthetic generator.
//!
//! The lattice is 144 × 55 cells of 2.5°, centred from 178.75°W to 178.75°E
//! and from 58.75°S to 76.25°N.

mod csv;
mod synth;

pub use self::csv::{ingest_csv, write_csv, IngestOptions, IngestReport, Ingested, DEFAULT_SENTINEL};
pub use self::synth::{generate_synthetic, LateDrop, SyntheticSpec};

use std::collections::BTreeMap;
use std::fmt;

use crate::{Error, Result};

pub const LON_COUNT: u16 = 144;
pub const LAT_COUNT: u16 = 55;
pub const LATTICE_SIZE: usize = LON_COUNT as usize * LAT_COUNT as usize;

const LON_ORIGIN: f64 = -178.75;
const LAT_ORIGIN: f64 = -58.75;
const STEP: f64 = 2.5;

/// Position of one cell on the global lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridCoordinate {
    lon_index: u16,
    lat_index: u16,
}

impl GridCoordinate {
    pub fn new(lon_index: u16, lat_index: u16) -> Result<Self> {
        if lon_index >= LON_COUNT || lat_index >= LAT_COUNT {
            return Err(Error::invalid(format!(
                "lattice index ({lon_index}, {lat_index}) outside 144 x 55"
            )));
        }
        Ok(GridCoordinate { lon_index, lat_index })
    }

    /// Row-major position in `0..LATTICE_SIZE` (latitude rows of 144).
    pub fn from_flat(index: usize) -> Result<Self> {
        if index >= LATTICE_SIZE {
            return Err(Error::invalid(format!("flat lattice index {index} >= {LATTICE_SIZE}")));
        }
        Ok(GridCoordinate {
            lon_index: (index % LON_COUNT as usize) as u16,
            lat_index: (index / LON_COUNT as usize) as u16,
        })
    }

    pub fn flat(&self) -> usize {
        self.lat_index as usize * LON_COUNT as usize + self.lon_index as usize
    }

    pub fn lon_index(&self) -> u16 {
        self.lon_index
    }

    pub fn lat_index(&self) -> u16 {
        self.lat_index
    }

    pub fn lon_deg(&self) -> f64 {
        LON_ORIGIN + STEP * self.lon_index as f64
    }

    pub fn lat_deg(&self) -> f64 {
        LAT_ORIGIN + STEP * self.lat_index as f64
    }

    /// Exact inverse of [`lon_deg`](Self::lon_deg)/[`lat_deg`](Self::lat_deg).
    /// Returns which axis failed and the offending value otherwise.
    pub fn from_degrees(lon: f64, lat: f64) -> std::result::Result<Self, (&'static str, f64)> {
        let lon_index = snap(lon, LON_ORIGIN, LON_COUNT).ok_or(("lon", lon))?;
        let lat_index = snap(lat, LAT_ORIGIN, LAT_COUNT).ok_or(("lat", lat))?;
        Ok(GridCoordinate { lon_index, lat_index })
    }
}

fn snap(deg: f64, origin: f64, count: u16) -> Option<u16> {
    if !deg.is_finite() {
        return None;
    }
    let idx = ((deg - origin) / STEP).round();
    if idx < 0.0 || idx >= count as f64 {
        return None;
    }
    // Lattice values are multiples of 0.25 and therefore exact in binary.
    (origin + STEP * idx == deg).then_some(idx as u16)
}

impl fmt::Display for GridCoordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lon_deg(), self.lat_deg())
    }
}

/// A calendar month.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonthStamp {
    year: i32,
    month: u8,
}

impl MonthStamp {
    pub fn new(year: i32, month: u8) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::invalid(format!("month {month} outside 1..=12")));
        }
        Ok(MonthStamp { year, month })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u8 {
        self.month
    }

    /// Months since January 1900.
    pub fn serial(&self) -> i64 {
        (self.year as i64 - 1900) * 12 + (self.month as i64 - 1)
    }

    pub fn from_serial(serial: i64) -> Self {
        MonthStamp {
            year: 1900 + serial.div_euclid(12) as i32,
            month: serial.rem_euclid(12) as u8 + 1,
        }
    }

    /// Mid-month position on a continuous year axis.
    pub fn fractional_year(&self) -> f64 {
        self.year as f64 + (self.month as f64 - 0.5) / 12.0
    }

    pub fn offset(&self, months: i64) -> Self {
        Self::from_serial(self.serial() + months)
    }
}

impl fmt::Display for MonthStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{:02}", self.year, self.month)
    }
}

impl std::str::FromStr for MonthStamp {
    type Err = Error;

    /// Parses `YYYY-MM`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("expected YYYY-MM, got {s:?}"));
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        let year = y.parse().map_err(|_| bad())?;
        let month = m.parse().map_err(|_| bad())?;
        MonthStamp::new(year, month)
    }
}

/// Inclusive month range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Period {
    start: MonthStamp,
    end: MonthStamp,
}

impl Period {
    pub fn new(start: MonthStamp, end: MonthStamp) -> Result<Self> {
        if end < start {
            return Err(Error::invalid(format!("period end {end} precedes start {start}")));
        }
        Ok(Period { start, end })
    }

    /// Whole calendar years `first..=last`.
    pub fn years(first: i32, last: i32) -> Result<Self> {
        Period::new(MonthStamp::new(first, 1)?, MonthStamp::new(last, 12)?)
    }

    pub fn start(&self) -> MonthStamp {
        self.start
    }

    pub fn end(&self) -> MonthStamp {
        self.end
    }

    pub fn len(&self) -> usize {
        (self.end.serial() - self.start.serial() + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, stamp: MonthStamp) -> bool {
        self.start <= stamp && stamp <= self.end
    }

    pub fn index_of(&self, stamp: MonthStamp) -> Option<usize> {
        self.contains(stamp)
            .then(|| (stamp.serial() - self.start.serial()) as usize)
    }

    pub fn stamp_at(&self, index: usize) -> MonthStamp {
        self.start.offset(index as i64)
    }

    pub fn months(&self) -> impl Iterator<Item = MonthStamp> + '_ {
        (0..self.len()).map(move |i| self.stamp_at(i))
    }

    pub fn first_year(&self) -> i32 {
        self.start.year
    }

    pub fn last_year(&self) -> i32 {
        self.end.year
    }

    pub fn year_count(&self) -> usize {
        (self.end.year - self.start.year + 1) as usize
    }
}

impl Default for Period {
    /// January 1900 through December 2014 (1380 months).
    fn default() -> Self {
        Period {
            start: MonthStamp { year: 1900, month: 1 },
            end: MonthStamp { year: 2014, month: 12 },
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl std::str::FromStr for Period {
    type Err = Error;

    /// `YYYY-MM..YYYY-MM`, or `YYYY..YYYY` for whole years.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| Error::invalid(format!("period `{s}` is not START..END")))?;
        let (a, b) = (a.trim(), b.trim());
        if !a.contains('-') && !b.contains('-') {
            let year = |t: &str| {
                t.parse::<i32>()
                    .map_err(|_| Error::invalid(format!("bad year `{t}` in period `{s}`")))
            };
            return Period::years(year(a)?, year(b)?);
        }
        Period::new(a.parse()?, b.parse()?)
    }
}

/// Monthly PDSI for one cell, dense over the dataset period.
#[derive(Clone, Debug, PartialEq)]
pub struct PdsiSeries {
    cell: GridCoordinate,
    period: Period,
    values: Vec<Option<f64>>,
}

impl PdsiSeries {
    /// `values[i]` belongs to month `period.start() + i`. Present values must
    /// be finite.
    pub fn new(cell: GridCoordinate, period: Period, values: Vec<Option<f64>>) -> Result<Self> {
        if values.len() != period.len() {
            return Err(Error::invalid(format!(
                "series has {} values for a {}-month period",
                values.len(),
                period.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| v.is_some_and(|x| !x.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(PdsiSeries { cell, period, values })
    }

    pub fn cell(&self) -> GridCoordinate {
        self.cell
    }

    pub fn period(&self) -> Period {
        self.period
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn get(&self, stamp: MonthStamp) -> Option<f64> {
        self.period.index_of(stamp).and_then(|i| self.values[i])
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// Present `(month, value)` pairs in time order.
    pub fn present(&self) -> impl Iterator<Item = (MonthStamp, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(move |(i, v)| v.map(|x| (self.period.stamp_at(i), x)))
    }
}

/// The set of populated cells over a common period.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDataset {
    period: Period,
    cells: BTreeMap<GridCoordinate, PdsiSeries>,
}

impl GridDataset {
    /// Cells without any present value are dropped. Fails when nothing is left.
    pub fn new(period: Period, series: impl IntoIterator<Item = PdsiSeries>) -> Result<Self> {
        let mut cells = BTreeMap::new();
        for s in series {
            if s.period != period {
                return Err(Error::invalid(format!(
                    "series for {} covers {}, dataset covers {period}",
                    s.cell, s.period
                )));
            }
            if s.valid_count() == 0 {
                continue;
            }
            let cell = s.cell;
            if cells.insert(cell, s).is_some() {
                return Err(Error::invalid(format!("two series for cell {cell}")));
            }
        }
        if cells.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(GridDataset { period, cells })
    }

    pub fn period(&self) -> Period {
        self.period
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, cell: &GridCoordinate) -> Option<&PdsiSeries> {
        self.cells.get(cell)
    }

    /// Series in `GridCoordinate` order.
    pub fn series(&self) -> impl Iterator<Item = &PdsiSeries> {
        self.cells.values()
    }

    pub fn cells(&self) -> impl Iterator<Item = GridCoordinate> + '_ {
        self.cells.keys().copied()
    }

    /// Same cells restricted (or padded with gaps) to another period.
    pub fn with_period(&self, period: Period) -> Result<Self> {
        let series = self.cells.values().map(|s| {
            let values = period.months().map(|m| s.get(m)).collect();
            PdsiSeries { cell: s.cell, period, values }
        });
        GridDataset::new(period, series)
    }
}

/// Percent of the full 7920-cell lattice without a value, month by month.
pub fn coverage_profile(dataset: &GridDataset) -> Vec<(MonthStamp, f64)> {
    let mut present = vec![0usize; dataset.period.len()];
    for s in dataset.series() {
        for (i, v) in s.values.iter().enumerate() {
            if v.is_some() {
                present[i] += 1;
            }
        }
    }
    present
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let missing = 100.0 * (LATTICE_SIZE - n) as f64 / LATTICE_SIZE as f64;
            (dataset.period.stamp_at(i), missing)
        })
        .collect()
}
