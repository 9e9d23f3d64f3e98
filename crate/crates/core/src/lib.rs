//! Extreme-drought analysis over gridded monthly PDSI.
//!
//! The pipeline runs in five stages, each in its own module:
//!
//! 1. [`grid`] ingests (or synthesizes) a 2.5° lattice of monthly PDSI series.
//! 2. [`extremes`] picks every cell's k most negative months and classifies
//!    values on the Palmer scale.
//! 3. [`cluster`] partitions the per-cell extremes in (fractional year, PDSI)
//!    space with K-means, choosing k by mean silhouette.
//! 4. [`trend`] counts how many cells hit one of their historical extremes in
//!    each month, then tests that series (OLS, Mann-Kendall, moving averages)
//!    against a Monte Carlo band built under purely random timing.
//! 5. [`spectral`] scans the annual counts for periodicity with a Morlet CWT.
//!
//! [`report`] chains all stages and renders every table and plot in memory so
//! callers decide how to persist them.
//!
//! ```
//! use droughtscan::grid::{generate_synthetic, SyntheticSpec};
//! use droughtscan::trend::monthly_lnpv_counts;
//!
//! let spec = SyntheticSpec { n_cells: 20, ..SyntheticSpec::default() };
//! let dataset = generate_synthetic(&spec, 7).unwrap();
//! let counts = monthly_lnpv_counts(&dataset, 10).unwrap();
//! assert_eq!(counts.total(), 200);
//! ```

pub mod cluster;
pub mod config;
mod error;
pub mod export;
pub mod extremes;
pub mod grid;
mod par;
pub mod report;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod trend;

pub use error::{Error, Result};
