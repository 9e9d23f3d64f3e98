//! K-means over extreme events in (fractional year, PDSI) space, silhouette
//! scoring, silhouette-driven choice of k, and per-cluster summaries.

mod kmeans;
mod lnpv;
mod silhouette;

pub use kmeans::{kmeans, ClusterModel, Init, KMeansOptions, Scaling};
pub use lnpv::{
    cluster_lnpv, cluster_lnpv_sets, ClusterCount, ClusterSummary, LnpvClusterOptions, LnpvClustering, PointSet,
};
pub use silhouette::silhouette_mean;

use crate::{Error, Result};

/// One event in clustering space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point2 {
    /// Fractional year.
    pub t: f64,
    /// PDSI.
    pub v: f64,
}

impl Point2 {
    pub fn new(t: f64, v: f64) -> Self {
        Point2 { t, v }
    }

    pub(crate) fn dist2(&self, other: &Point2) -> f64 {
        let dt = self.t - other.t;
        let dv = self.v - other.v;
        dt * dt + dv * dv
    }
}

/// Outcome of scanning k for the best mean silhouette.
#[derive(Clone, Debug)]
pub struct SelectK {
    pub best_k: usize,
    /// `(k, mean silhouette)` for every candidate, ascending in k.
    pub scores: Vec<(usize, f64)>,
    /// The fitted model for `best_k`.
    pub model: ClusterModel,
}

/// Fits K-means for every k in `k_min..=k_max` and keeps the one with the
/// highest mean silhouette. Ties go to the smaller k.
pub fn select_k(
    points: &[Point2],
    k_min: usize,
    k_max: usize,
    options: &KMeansOptions,
    seed: u64,
) -> Result<SelectK> {
    if k_min < 2 || k_min > k_max || k_max > points.len() {
        return Err(Error::invalid(format!(
            "k range {k_min}..={k_max} must lie within 2..={}",
            points.len()
        )));
    }
    let mut scores = Vec::with_capacity(k_max - k_min + 1);
    let mut best: Option<(f64, ClusterModel)> = None;
    for k in k_min..=k_max {
        let model = kmeans(points, k, options, seed)?;
        let score = model.mean_silhouette.ok_or(Error::SingleCluster)?;
        scores.push((k, score));
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, model));
        }
    }
    let (_, model) = best.expect("nonempty k range");
    Ok(SelectK {
        best_k: model.k,
        scores,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blobs(centres: &[(f64, f64)], per: usize, spread: f64, seed: u64) -> Vec<Point2> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        centres
            .iter()
            .flat_map(|&(t, v)| {
                (0..per)
                    .map(|_| {
                        Point2::new(
                            t + spread * (rng.random::<f64>() - 0.5),
                            v + spread * (rng.random::<f64>() - 0.5),
                        )
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    #[test]
    fn planted_three_blobs() {
        let pts = blobs(&[(0.0, 0.0), (50.0, 0.0), (0.0, 50.0)], 15, 2.0, 1);
        let sel = select_k(&pts, 2, 6, &KMeansOptions::default(), 9).unwrap();
        assert_eq!(sel.best_k, 3);
        assert_eq!(sel.scores.len(), 5);
        assert_eq!(sel.scores[0].0, 2);
        assert_eq!(sel.model.k, 3);
    }

    #[test]
    fn two_points_only_candidate() {
        let pts = [Point2::new(1900.0, -5.0), Point2::new(2000.0, -5.0)];
        let sel = select_k(&pts, 2, 2, &KMeansOptions::default(), 0).unwrap();
        assert_eq!(sel.best_k, 2);
        assert_eq!(sel.scores, vec![(2, 0.0)]);
    }

    #[test]
    fn bad_ranges() {
        let pts = blobs(&[(0.0, 0.0)], 5, 1.0, 2);
        let opts = KMeansOptions::default();
        assert!(select_k(&pts, 1, 3, &opts, 0).is_err());
        assert!(select_k(&pts, 3, 2, &opts, 0).is_err());
        assert!(select_k(&pts, 2, 6, &opts, 0).is_err());
    }
}
