//! Clustering of per-cell extreme events.

use std::collections::BTreeMap;

use super::{kmeans, select_k, ClusterModel, KMeansOptions, Point2};
use crate::extremes::{lnpv_map, LnpvSet};
use crate::grid::{GridCoordinate, GridDataset};
use crate::stats::FiveNumber;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClusterCount {
    Fixed(usize),
    /// Choose by mean silhouette within `min..=max` (clipped to the number of points).
    Auto { min: usize, max: usize },
}

/// Which events become clustering points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointSet {
    /// One point per cell: its most negative event.
    Leading,
    /// Every stored event of every cell.
    All,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LnpvClusterOptions {
    pub count: ClusterCount,
    pub points: PointSet,
    pub kmeans: KMeansOptions,
}

impl Default for LnpvClusterOptions {
    fn default() -> Self {
        LnpvClusterOptions {
            count: ClusterCount::Auto { min: 2, max: 10 },
            points: PointSet::Leading,
            kmeans: KMeansOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub cells: usize,
    pub events: usize,
    /// Spread of the PDSI values of the summarized events.
    pub value: FiveNumber,
    /// Spread of their fractional years.
    pub time: FiveNumber,
}

#[derive(Clone, Debug)]
pub struct LnpvClustering {
    pub model: ClusterModel,
    /// Silhouette table when k was chosen automatically.
    pub silhouette_scores: Option<Vec<(usize, f64)>>,
    /// Clustered points and the cell each came from, parallel to `model.assignments`.
    pub points: Vec<(GridCoordinate, Point2)>,
    /// Cluster of each cell's leading event.
    pub cell_assignments: BTreeMap<GridCoordinate, usize>,
    pub summaries: Vec<ClusterSummary>,
}

/// Extracts `capacity` events per cell and clusters them.
pub fn cluster_lnpv(
    dataset: &GridDataset,
    capacity: usize,
    options: &LnpvClusterOptions,
    seed: u64,
) -> Result<LnpvClustering> {
    let sets = lnpv_map(dataset, capacity)?;
    cluster_lnpv_sets(&sets, options, seed)
}

/// Clusters already-extracted event sets.
///
/// With [`PointSet::Leading`] each cluster summary aggregates all stored
/// events of its member cells; with [`PointSet::All`] it aggregates the
/// events assigned to it.
pub fn cluster_lnpv_sets(sets: &[LnpvSet], options: &LnpvClusterOptions, seed: u64) -> Result<LnpvClustering> {
    if sets.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let points: Vec<(GridCoordinate, Point2)> = match options.points {
        PointSet::Leading => sets
            .iter()
            .map(|s| (s.cell(), Point2::new(s.leading().fractional_year(), s.leading().value)))
            .collect(),
        PointSet::All => sets
            .iter()
            .flat_map(|s| {
                s.events()
                    .iter()
                    .map(|e| (e.cell, Point2::new(e.fractional_year(), e.value)))
            })
            .collect(),
    };
    let coords: Vec<Point2> = points.iter().map(|(_, p)| *p).collect();

    let (model, silhouette_scores) = match options.count {
        ClusterCount::Fixed(k) => (kmeans(&coords, k, &options.kmeans, seed)?, None),
        ClusterCount::Auto { min, max } => {
            let max = max.min(coords.len());
            let sel = select_k(&coords, min, max, &options.kmeans, seed)?;
            (sel.model, Some(sel.scores))
        }
    };

    let mut cell_assignments = BTreeMap::new();
    match options.points {
        PointSet::Leading => {
            for ((cell, _), &label) in points.iter().zip(&model.assignments) {
                cell_assignments.insert(*cell, label);
            }
        }
        PointSet::All => {
            // Events are laid out set by set, leading event first.
            let mut offset = 0;
            for s in sets {
                cell_assignments.insert(s.cell(), model.assignments[offset]);
                offset += s.events().len();
            }
        }
    }

    let mut values: Vec<Vec<f64>> = vec![Vec::new(); model.k];
    let mut times: Vec<Vec<f64>> = vec![Vec::new(); model.k];
    let mut cells = vec![0usize; model.k];
    match options.points {
        PointSet::Leading => {
            for s in sets {
                let c = cell_assignments[&s.cell()];
                cells[c] += 1;
                for e in s.events() {
                    values[c].push(e.value);
                    times[c].push(e.fractional_year());
                }
            }
        }
        PointSet::All => {
            for ((_, p), &label) in points.iter().zip(&model.assignments) {
                values[label].push(p.v);
                times[label].push(p.t);
            }
            for &c in cell_assignments.values() {
                cells[c] += 1;
            }
        }
    }
    let summaries = (0..model.k)
        .filter(|&c| !values[c].is_empty())
        .map(|c| {
            Ok(ClusterSummary {
                cluster: c,
                cells: cells[c],
                events: values[c].len(),
                value: FiveNumber::from_values(&values[c])?,
                time: FiveNumber::from_values(&times[c])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(LnpvClustering {
        model,
        silhouette_scores,
        points,
        cell_assignments,
        summaries,
    })
}
