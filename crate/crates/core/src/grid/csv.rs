//! Flat CSV interchange: header `lon,lat,year,month,pdsi`, one record per
//! cell-month, rows in any order, LF or CRLF line endings.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};

use super::{GridCoordinate, GridDataset, MonthStamp, PdsiSeries, Period};
use crate::{Error, Result};

pub const DEFAULT_SENTINEL: f64 = -99.99;
const HEADER: &str = "lon,lat,year,month,pdsi";
const PLAUSIBLE_RANGE: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IngestOptions {
    pub missing_sentinel: f64,
    /// Abort on malformed or duplicate rows instead of skipping them.
    pub strict: bool,
    /// Records outside this window are ignored.
    pub period: Period,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            missing_sentinel: DEFAULT_SENTINEL,
            strict: false,
            period: Period::default(),
        }
    }
}

/// Row-level bookkeeping from one ingestion.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub rows: usize,
    pub sentinel_rows: usize,
    pub malformed_rows: Vec<usize>,
    /// Duplicate (cell, month) rows resolved last-wins.
    pub duplicate_rows: usize,
    pub outside_period_rows: usize,
    /// Present values beyond ±10, kept but worth a look.
    pub out_of_range_values: usize,
}

#[derive(Clone, Debug)]
pub struct Ingested {
    pub dataset: GridDataset,
    pub report: IngestReport,
}

struct Row {
    lon: f64,
    lat: f64,
    year: i32,
    month: u8,
    pdsi: f64,
}

fn parse_row(line: &str) -> std::result::Result<Row, String> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 5 {
        return Err(format!("expected 5 fields, found {}", fields.len()));
    }
    let num = |i: usize, name: &str| -> std::result::Result<f64, String> {
        let v: f64 = fields[i]
            .parse()
            .map_err(|_| format!("{name} {:?} is not a number", fields[i]))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("{name} {:?} is not finite", fields[i]))
        }
    };
    let year: i32 = fields[2]
        .parse()
        .map_err(|_| format!("year {:?} is not an integer", fields[2]))?;
    let month: u8 = fields[3]
        .parse()
        .ok()
        .filter(|m| (1..=12).contains(m))
        .ok_or_else(|| format!("month {:?} is not in 1..=12", fields[3]))?;
    Ok(Row {
        lon: num(0, "lon")?,
        lat: num(1, "lat")?,
        year,
        month,
        pdsi: num(4, "pdsi")?,
    })
}

/// Reads a gridded PDSI CSV.
///
/// Sentinel rows mark a month absent; cells left with no values are
/// dropped. Off-lattice coordinates always abort. Malformed and duplicate
/// rows abort in strict mode and are skipped (malformed) or resolved
/// last-wins (duplicates) otherwise.
pub fn ingest_csv<R: Read>(source: R, options: &IngestOptions) -> Result<Ingested> {
    let period = options.period;
    let mut report = IngestReport::default();
    let mut cells: BTreeMap<GridCoordinate, Vec<Option<f64>>> = BTreeMap::new();
    // Months seen per cell, including sentinel rows, for duplicate detection.
    let mut seen: BTreeMap<GridCoordinate, Vec<bool>> = BTreeMap::new();

    let reader = BufReader::new(source);
    let mut header_seen = false;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if !header_seen {
            if line.trim_start_matches('\u{feff}').trim() != HEADER {
                return Err(Error::MalformedRow {
                    line: line_no,
                    reason: format!("expected header {HEADER:?}"),
                });
            }
            header_seen = true;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        report.rows += 1;
        let row = match parse_row(line) {
            Ok(r) => r,
            Err(reason) if options.strict => return Err(Error::MalformedRow { line: line_no, reason }),
            Err(_) => {
                report.malformed_rows.push(line_no);
                continue;
            }
        };
        let cell = GridCoordinate::from_degrees(row.lon, row.lat).map_err(|(axis, value)| {
            Error::OffLattice {
                line: line_no,
                axis,
                value,
            }
        })?;
        let stamp = MonthStamp::new(row.year, row.month)?;
        let Some(idx) = period.index_of(stamp) else {
            report.outside_period_rows += 1;
            continue;
        };

        let seen_months = seen.entry(cell).or_insert_with(|| vec![false; period.len()]);
        if seen_months[idx] {
            if options.strict {
                return Err(Error::DuplicateRecord {
                    line: line_no,
                    lon: row.lon,
                    lat: row.lat,
                    year: row.year,
                    month: row.month,
                });
            }
            report.duplicate_rows += 1;
        }
        seen_months[idx] = true;

        let slot = &mut cells.entry(cell).or_insert_with(|| vec![None; period.len()])[idx];
        if (row.pdsi - options.missing_sentinel).abs() < 1e-9 {
            report.sentinel_rows += 1;
            *slot = None;
        } else {
            *slot = Some(row.pdsi);
        }
    }
    if !header_seen {
        return Err(Error::MalformedRow {
            line: 1,
            reason: "input is empty".into(),
        });
    }

    report.out_of_range_values = cells
        .values()
        .flatten()
        .flatten()
        .filter(|v| v.abs() > PLAUSIBLE_RANGE)
        .count();

    let series = cells
        .into_iter()
        .map(|(cell, values)| PdsiSeries::new(cell, period, values))
        .collect::<Result<Vec<_>>>()?;
    let dataset = GridDataset::new(period, series)?;
    Ok(Ingested { dataset, report })
}

/// Writes the present values of `dataset` in the ingestion format, cells in
/// lattice order and months ascending. Floats use the shortest repr that
/// parses back to the same value.
pub fn write_csv<W: Write>(dataset: &GridDataset, mut out: W) -> Result<()> {
    writeln!(out, "{HEADER}")?;
    for s in dataset.series() {
        let c = s.cell();
        for (m, v) in s.present() {
            writeln!(out, "{},{},{},{},{}", c.lon_deg(), c.lat_deg(), m.year(), m.month(), v)?;
        }
    }
    Ok(())
}
