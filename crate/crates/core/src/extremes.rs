//! Per-cell extreme events (the k most negative monthly PDSI values) and the
//! Palmer classification scale.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::grid::{GridCoordinate, GridDataset, MonthStamp, PdsiSeries};
use crate::{par, Error, Result};

/// Default number of events kept per cell.
pub const DEFAULT_CAPACITY: usize = 10;

/// Palmer moisture classes, driest first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PalmerClass {
    ExtremeDrought,
    SevereDrought,
    ModerateDrought,
    MildDrought,
    IncipientDrySpell,
    NearNormal,
    IncipientWetSpell,
    SlightlyWet,
    ModeratelyWet,
    VeryWet,
    ExtremelyWet,
}

impl PalmerClass {
    pub const ALL: [PalmerClass; 11] = [
        PalmerClass::ExtremeDrought,
        PalmerClass::SevereDrought,
        PalmerClass::ModerateDrought,
        PalmerClass::MildDrought,
        PalmerClass::IncipientDrySpell,
        PalmerClass::NearNormal,
        PalmerClass::IncipientWetSpell,
        PalmerClass::SlightlyWet,
        PalmerClass::ModeratelyWet,
        PalmerClass::VeryWet,
        PalmerClass::ExtremelyWet,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            PalmerClass::ExtremeDrought => "extreme drought",
            PalmerClass::SevereDrought => "severe drought",
            PalmerClass::ModerateDrought => "moderate drought",
            PalmerClass::MildDrought => "mild drought",
            PalmerClass::IncipientDrySpell => "incipient dry spell",
            PalmerClass::NearNormal => "near normal",
            PalmerClass::IncipientWetSpell => "incipient wet spell",
            PalmerClass::SlightlyWet => "slightly wet",
            PalmerClass::ModeratelyWet => "moderately wet",
            PalmerClass::VeryWet => "very wet",
            PalmerClass::ExtremelyWet => "extremely wet",
        }
    }
}

impl fmt::Display for PalmerClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Places a PDSI value on the Palmer scale.
///
/// Intervals are contiguous. Shared dry-side boundaries go to the drier
/// class (−3.0 is severe, −0.5 is an incipient dry spell) and wet-side
/// boundaries to the wetter class (0.5 is an incipient wet spell).
pub fn classify_pdsi(value: f64) -> Result<PalmerClass> {
    use PalmerClass::*;
    if !value.is_finite() {
        return Err(Error::NonFinite(0));
    }
    let class = if value <= -4.0 {
        ExtremeDrought
    } else if value <= -3.0 {
        SevereDrought
    } else if value <= -2.0 {
        ModerateDrought
    } else if value <= -1.0 {
        MildDrought
    } else if value <= -0.5 {
        IncipientDrySpell
    } else if value < 0.5 {
        NearNormal
    } else if value < 1.0 {
        IncipientWetSpell
    } else if value < 2.0 {
        SlightlyWet
    } else if value < 3.0 {
        ModeratelyWet
    } else if value < 4.0 {
        VeryWet
    } else {
        ExtremelyWet
    };
    Ok(class)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtremeEvent {
    pub cell: GridCoordinate,
    pub when: MonthStamp,
    pub value: f64,
}

impl ExtremeEvent {
    pub fn fractional_year(&self) -> f64 {
        self.when.fractional_year()
    }
}

/// Most negative first, earlier month first among equal values.
fn event_order(a: &(f64, MonthStamp), b: &(f64, MonthStamp)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// A cell's k most negative months, most negative first.
#[derive(Clone, Debug, PartialEq)]
pub struct LnpvSet {
    cell: GridCoordinate,
    capacity: usize,
    events: Vec<ExtremeEvent>,
}

impl LnpvSet {
    pub fn cell(&self) -> GridCoordinate {
        self.cell
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn events(&self) -> &[ExtremeEvent] {
        &self.events
    }

    /// The cell's single most negative event.
    pub fn leading(&self) -> &ExtremeEvent {
        &self.events[0]
    }

    /// True when the cell never reached extreme drought (all events above −4).
    pub fn never_extreme(&self) -> bool {
        self.leading().value > -4.0
    }

    pub fn contains_month(&self, when: MonthStamp) -> bool {
        self.events.iter().any(|e| e.when == when)
    }
}

/// The `k` smallest present values of `series` with their months.
///
/// Cells with fewer than `k` present months yield all of them.
pub fn extract_lnpv(series: &PdsiSeries, k: usize) -> Result<LnpvSet> {
    if k == 0 {
        return Err(Error::invalid("LNPV capacity must be at least 1"));
    }
    let mut pairs: Vec<(f64, MonthStamp)> = series.present().map(|(m, v)| (v, m)).collect();
    if pairs.is_empty() {
        return Err(Error::invalid(format!("cell {} has no present values", series.cell())));
    }
    let take = k.min(pairs.len());
    if take < pairs.len() {
        pairs.select_nth_unstable_by(take - 1, event_order);
        pairs.truncate(take);
    }
    pairs.sort_by(event_order);
    let cell = series.cell();
    Ok(LnpvSet {
        cell,
        capacity: k,
        events: pairs
            .into_iter()
            .map(|(value, when)| ExtremeEvent { cell, when, value })
            .collect(),
    })
}

/// One [`LnpvSet`] per cell, in cell order.
pub fn lnpv_map(dataset: &GridDataset, k: usize) -> Result<Vec<LnpvSet>> {
    let series: Vec<&PdsiSeries> = dataset.series().collect();
    par::map_collect(&series, |s| extract_lnpv(s, k))
        .into_iter()
        .collect()
}

/// Number of cells whose single most negative event falls in each year.
pub fn leading_year_counts(sets: &[LnpvSet]) -> BTreeMap<i32, usize> {
    let mut counts = BTreeMap::new();
    for set in sets {
        *counts.entry(set.leading().when.year()).or_insert(0) += 1;
    }
    counts
}

/// Cells whose leading event falls in `year`.
pub fn leading_in_year(sets: &[LnpvSet], year: i32) -> Vec<GridCoordinate> {
    sets.iter()
        .filter(|s| s.leading().when.year() == year)
        .map(|s| s.cell())
        .collect()
}
