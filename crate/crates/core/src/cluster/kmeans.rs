//! Lloyd's algorithm with k-means++ (or uniform) seeding and restarts.

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::silhouette::silhouette_in;
use super::Point2;
use crate::rng::{domain, pair_index, substream};
use crate::{par, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Init {
    KMeansPlusPlus,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scaling {
    None,
    /// Center each feature and divide by its (population) standard deviation.
    Standardize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KMeansOptions {
    pub init: Init,
    pub n_restarts: usize,
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this in one iteration.
    pub tol: f64,
    pub scaling: Scaling,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        KMeansOptions {
            init: Init::KMeansPlusPlus,
            n_restarts: 10,
            max_iter: 300,
            tol: 1e-6,
            scaling: Scaling::None,
        }
    }
}

/// A fitted partition.
///
/// `inertia`, the trace and the silhouette are measured in the clustering
/// feature space (standardized units when scaling is on); `centroids` are
/// always reported in original units.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterModel {
    pub k: usize,
    pub centroids: Vec<Point2>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    /// `None` when fewer than two clusters exist.
    pub mean_silhouette: Option<f64>,
    pub seed: u64,
    pub iterations: usize,
    pub scaling: Scaling,
    /// Inertia after every assignment step of the winning restart.
    pub inertia_trace: Vec<f64>,
    /// Final inertia of every restart, in restart order.
    pub restart_inertias: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
struct Standardizer {
    mean: Point2,
    sd: Point2,
}

impl Standardizer {
    fn identity() -> Self {
        Standardizer {
            mean: Point2::new(0.0, 0.0),
            sd: Point2::new(1.0, 1.0),
        }
    }

    fn fit(points: &[Point2]) -> Self {
        let n = points.len() as f64;
        let mt = points.iter().map(|p| p.t).sum::<f64>() / n;
        let mv = points.iter().map(|p| p.v).sum::<f64>() / n;
        let st = (points.iter().map(|p| (p.t - mt).powi(2)).sum::<f64>() / n).sqrt();
        let sv = (points.iter().map(|p| (p.v - mv).powi(2)).sum::<f64>() / n).sqrt();
        let guard = |s: f64| if s > 0.0 { s } else { 1.0 };
        Standardizer {
            mean: Point2::new(mt, mv),
            sd: Point2::new(guard(st), guard(sv)),
        }
    }

    fn forward(&self, p: &Point2) -> Point2 {
        Point2::new((p.t - self.mean.t) / self.sd.t, (p.v - self.mean.v) / self.sd.v)
    }

    fn inverse(&self, p: &Point2) -> Point2 {
        Point2::new(p.t * self.sd.t + self.mean.t, p.v * self.sd.v + self.mean.v)
    }
}

struct Run {
    centroids: Vec<Point2>,
    labels: Vec<usize>,
    inertia: f64,
    iterations: usize,
    trace: Vec<f64>,
}

/// Partitions `points` into `k` clusters, keeping the lowest-inertia result
/// over `n_restarts` independently seeded runs.
///
/// Restart `r` draws from its own substream keyed on `(seed, k, r)`, so the
/// result does not depend on thread scheduling.
pub fn kmeans(points: &[Point2], k: usize, options: &KMeansOptions, seed: u64) -> Result<ClusterModel> {
    if points.is_empty() {
        return Err(Error::invalid("no points to cluster"));
    }
    if k < 1 || k > points.len() {
        return Err(Error::invalid(format!("k = {k} must be in 1..={}", points.len())));
    }
    if options.n_restarts == 0 {
        return Err(Error::invalid("n_restarts must be at least 1"));
    }
    if !(options.tol >= 0.0) {
        return Err(Error::invalid("tol must be non-negative"));
    }
    if let Some(i) = points.iter().position(|p| !(p.t.is_finite() && p.v.is_finite())) {
        return Err(Error::NonFinite(i));
    }

    let scaler = match options.scaling {
        Scaling::None => Standardizer::identity(),
        Scaling::Standardize => Standardizer::fit(points),
    };
    let features: Vec<Point2> = match options.scaling {
        Scaling::None => points.to_vec(),
        Scaling::Standardize => points.iter().map(|p| scaler.forward(p)).collect(),
    };

    let runs = par::map_range(options.n_restarts, |r| {
        let mut rng = substream(seed, domain::KMEANS, pair_index(k as u64, r as u64));
        lloyd(&features, k, options, &mut rng)
    });
    let restart_inertias: Vec<f64> = runs.iter().map(|r| r.inertia).collect();
    let best = runs
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.inertia.total_cmp(&b.inertia).then(i.cmp(j)))
        .map(|(_, r)| r)
        .expect("at least one restart");

    let mean_silhouette = if k >= 2 && points.len() >= 2 {
        Some(silhouette_in(&features, &best.labels)?)
    } else {
        None
    };

    Ok(ClusterModel {
        k,
        centroids: best.centroids.iter().map(|c| scaler.inverse(c)).collect(),
        assignments: best.labels,
        inertia: best.inertia,
        mean_silhouette,
        seed,
        iterations: best.iterations,
        scaling: options.scaling,
        inertia_trace: best.trace,
        restart_inertias,
    })
}

fn lloyd(points: &[Point2], k: usize, options: &KMeansOptions, rng: &mut ChaCha8Rng) -> Run {
    let mut centroids = match options.init {
        Init::KMeansPlusPlus => seed_plus_plus(points, k, rng),
        Init::Random => index::sample(rng, points.len(), k)
            .into_iter()
            .map(|i| points[i])
            .collect(),
    };
    let mut labels = vec![usize::MAX; points.len()];
    assign(points, &centroids, &mut labels);
    repair_empty(points, &mut centroids, &mut labels);

    let mut trace = vec![inertia(points, &centroids, &labels)];
    let mut iterations = 0;
    while iterations < options.max_iter {
        let updated = means(points, &labels, &centroids);
        let shift = centroids
            .iter()
            .zip(&updated)
            .map(|(a, b)| a.dist2(b).sqrt())
            .fold(0.0, f64::max);
        centroids = updated;
        iterations += 1;
        let changed = assign(points, &centroids, &mut labels);
        let repaired = repair_empty(points, &mut centroids, &mut labels);
        trace.push(inertia(points, &centroids, &labels));
        if (!changed && !repaired) || shift <= options.tol {
            break;
        }
    }
    // Leave every centroid at the mean of its members.
    let settled = means(points, &labels, &centroids);
    if settled != centroids {
        centroids = settled;
        trace.push(inertia(points, &centroids, &labels));
    }
    Run {
        inertia: *trace.last().expect("trace has the initial entry"),
        centroids,
        labels,
        iterations,
        trace,
    }
}

fn seed_plus_plus(points: &[Point2], k: usize, rng: &mut ChaCha8Rng) -> Vec<Point2> {
    let n = points.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..n)]);
    let mut d2: Vec<f64> = points.iter().map(|p| p.dist2(&centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = points[pick];
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(p.dist2(&c));
        }
        centroids.push(c);
    }
    centroids
}

/// Nearest-centroid assignment. A point tied between its current centroid
/// and another keeps its current label; otherwise ties go to the lowest
/// index. Returns whether any label changed.
fn assign(points: &[Point2], centroids: &[Point2], labels: &mut [usize]) -> bool {
    let mut changed = false;
    for (p, label) in points.iter().zip(labels.iter_mut()) {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (j, c) in centroids.iter().enumerate() {
            let d = p.dist2(c);
            if d < best_d {
                best = j;
                best_d = d;
            }
        }
        if *label < centroids.len() && p.dist2(&centroids[*label]) == best_d {
            best = *label;
        }
        if *label != best {
            *label = best;
            changed = true;
        }
    }
    changed
}

/// Reseeds every empty cluster at the point farthest from its centroid
/// (among clusters that can spare a member). Returns whether anything moved.
fn repair_empty(points: &[Point2], centroids: &mut [Point2], labels: &mut [usize]) -> bool {
    let k = centroids.len();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    let mut repaired = false;
    for j in 0..k {
        if sizes[j] > 0 {
            continue;
        }
        let donor = (0..points.len())
            .filter(|&i| sizes[labels[i]] > 1)
            .max_by(|&a, &b| {
                let da = points[a].dist2(&centroids[labels[a]]);
                let db = points[b].dist2(&centroids[labels[b]]);
                da.total_cmp(&db).then(b.cmp(&a))
            });
        let Some(i) = donor else { break };
        sizes[labels[i]] -= 1;
        labels[i] = j;
        sizes[j] = 1;
        centroids[j] = points[i];
        repaired = true;
    }
    repaired
}

fn means(points: &[Point2], labels: &[usize], previous: &[Point2]) -> Vec<Point2> {
    let k = previous.len();
    let mut sum = vec![(0.0, 0.0, 0usize); k];
    for (p, &l) in points.iter().zip(labels) {
        sum[l].0 += p.t;
        sum[l].1 += p.v;
        sum[l].2 += 1;
    }
    sum.iter()
        .zip(previous)
        .map(|(&(t, v, n), prev)| {
            if n == 0 {
                *prev
            } else {
                Point2::new(t / n as f64, v / n as f64)
            }
        })
        .collect()
}

fn inertia(points: &[Point2], centroids: &[Point2], labels: &[usize]) -> f64 {
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| p.dist2(&centroids[l]))
        .sum()
}
