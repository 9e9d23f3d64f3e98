use super::Point2;
use crate::{par, Error, Result};

/// Mean silhouette coefficient of a labelling, Euclidean distance.
///
/// For point i, `a` is its mean distance to the rest of its cluster and `b`
/// the smallest mean distance to another cluster; `s = (b - a) / max(a, b)`.
/// Members of singleton clusters score 0.
pub fn silhouette_mean(points: &[Point2], assignments: &[usize]) -> Result<f64> {
    if points.len() != assignments.len() {
        return Err(Error::invalid(format!(
            "{} points but {} labels",
            points.len(),
            assignments.len()
        )));
    }
    silhouette_in(points, assignments)
}

pub(crate) fn silhouette_in(points: &[Point2], labels: &[usize]) -> Result<f64> {
    let n = points.len();
    if n < 2 {
        return Err(Error::invalid("silhouette needs at least two points"));
    }
    let k = labels.iter().copied().max().unwrap_or(0) + 1;
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::SingleCluster);
    }

    let scores = par::map_range(n, |i| {
        let own = labels[i];
        if sizes[own] == 1 {
            return 0.0;
        }
        let mut sums = vec![0.0; k];
        let p = &points[i];
        for (q, &l) in points.iter().zip(labels) {
            sums[l] += p.dist2(q).sqrt();
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            (b - a) / denom
        } else {
            0.0
        }
    });
    Ok(scores.iter().sum::<f64>() / n as f64)
}
