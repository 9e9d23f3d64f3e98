//! Browser bindings for three interactive views: the random-timing band, the
//! K-means partition of synthetic extremes, and a wavelet scan of a noisy
//! sinusoid. Every function returns a JSON string; failures come back as
//! `{"error": "..."}` so the page never has to catch exceptions.

use droughtscan::cluster::{cluster_lnpv, ClusterCount, KMeansOptions, LnpvClusterOptions, Scaling};
use droughtscan::grid::{generate_synthetic, LateDrop, SyntheticSpec};
use droughtscan::spectral::{cwt_morlet, dominant_period, CwtOptions};
use droughtscan::trend::{band_exceedance, monthly_lnpv_counts, null_band, CellProbabilities, NullBandParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn respond(result: droughtscan::Result<Value>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

/// Band for `n_cells` cells of uniform probability over 1900..=2014.
#[wasm_bindgen]
pub fn null_band_view(n_cells: u32, k: u32, reps: u32, seed: u32) -> String {
    respond((|| {
        let params = NullBandParams {
            cells: CellProbabilities::Uniform {
                n_cells: n_cells as usize,
                p: (k as f64 / 1380.0).min(1.0),
            },
            reps: reps as usize,
            ..NullBandParams::default()
        };
        let band = null_band(&params, seed as u64)?;
        let mean: Vec<f64> = band
            .replicates
            .iter()
            .map(|r| r.iter().map(|&c| c as f64).sum::<f64>() / r.len() as f64)
            .collect();
        Ok(json!({
            "years": band.years.iter().map(|b| b.year).collect::<Vec<_>>(),
            "lower": band.years.iter().map(|b| b.lower).collect::<Vec<_>>(),
            "upper": band.years.iter().map(|b| b.upper).collect::<Vec<_>>(),
            "mean": mean,
            "expected": 12.0 * n_cells as f64 * (k as f64 / 1380.0).min(1.0),
        }))
    })())
}

/// Synthetic cells, optionally dried after `late_from`; their leading
/// extremes clustered with `k` clusters (0 picks k by silhouette).
#[wasm_bindgen]
pub fn cluster_view(n_cells: u32, k: u32, standardize: bool, late_depth: f64, seed: u32) -> String {
    respond((|| {
        let spec = SyntheticSpec {
            n_cells: n_cells as usize,
            late_drop: (late_depth > 0.0).then_some(LateDrop {
                from_year: 1975,
                depth: late_depth,
            }),
            ..SyntheticSpec::default()
        };
        let ds = generate_synthetic(&spec, seed as u64)?;
        let options = LnpvClusterOptions {
            count: if k == 0 {
                ClusterCount::Auto { min: 2, max: 8 }
            } else {
                ClusterCount::Fixed(k as usize)
            },
            kmeans: KMeansOptions {
                scaling: if standardize { Scaling::Standardize } else { Scaling::None },
                ..KMeansOptions::default()
            },
            ..LnpvClusterOptions::default()
        };
        let out = cluster_lnpv(&ds, 10, &options, seed as u64)?;
        let counts = monthly_lnpv_counts(&ds, 10)?;
        let band = null_band(&NullBandParams::for_dataset(&ds, 10, false), seed as u64)?;
        let exceed = band_exceedance(&counts.annual, &band)?;
        Ok(json!({
            "points": out.points.iter().zip(&out.model.assignments)
                .map(|((_, p), c)| json!([p.t, p.v, c])).collect::<Vec<_>>(),
            "centroids": out.model.centroids.iter().map(|c| json!([c.t, c.v])).collect::<Vec<_>>(),
            "k": out.model.k,
            "silhouette": out.model.mean_silhouette,
            "scores": out.silhouette_scores,
            "inside_band": exceed.fraction_inside(),
            "onset": exceed.sustained_onset,
        }))
    })())
}

/// Global wavelet spectrum of `sin(2πt/period) + Normal(0, noise_sd)` over 115 years.
#[wasm_bindgen]
pub fn wavelet_view(period: f64, noise_sd: f64, seed: u32) -> String {
    respond((|| {
        if !(period > 0.0) || !(noise_sd >= 0.0) {
            return Err(droughtscan::Error::InvalidParameter("period must be > 0 and noise >= 0".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
        let noise = Normal::new(0.0, noise_sd).map_err(|e| droughtscan::Error::InvalidParameter(e.to_string()))?;
        let series: Vec<f64> = (0..115)
            .map(|t| (2.0 * std::f64::consts::PI * t as f64 / period).sin() + noise.sample(&mut rng))
            .collect();
        let spectrum = cwt_morlet(&series, &CwtOptions::default())?;
        let d = dominant_period(&spectrum);
        Ok(json!({
            "series": series,
            "periods": spectrum.periods,
            "global": spectrum.global,
            "significance": spectrum.significance,
            "dominant": d.period,
            "significant": d.significant,
        }))
    })())
}
