//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails. The dataset-gated criterion runs only when
//! `DROUGHTSCAN_PDSI_CSV` points at a full PDSI export.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use droughtscan::cluster::{
    cluster_lnpv, kmeans, select_k, silhouette_mean, ClusterCount, KMeansOptions, LnpvClusterOptions, Point2,
};
use droughtscan::extremes::{classify_pdsi, leading_year_counts, lnpv_map, PalmerClass};
use droughtscan::grid::{generate_synthetic, ingest_csv, IngestOptions, LateDrop, SyntheticSpec};
use droughtscan::spectral::{cwt_morlet, dominant_period, CwtOptions};
use droughtscan::trend::{
    band_exceedance, mann_kendall, monthly_lnpv_counts, null_band, NullBandParams, TrendDirection,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Verdict,
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

/// Table lookup on integer hundredths, written independently of the library.
fn class_of_hundredths(h: i64) -> PalmerClass {
    use PalmerClass::*;
    match h {
        i64::MIN..=-400 => ExtremeDrought,
        -399..=-300 => SevereDrought,
        -299..=-200 => ModerateDrought,
        -199..=-100 => MildDrought,
        -99..=-50 => IncipientDrySpell,
        -49..=49 => NearNormal,
        50..=99 => IncipientWetSpell,
        100..=199 => SlightlyWet,
        200..=299 => ModeratelyWet,
        300..=399 => VeryWet,
        _ => ExtremelyWet,
    }
}

fn palmer_sweep() -> Verdict {
    let mut mismatches = 0;
    for h in -1100i64..=1100 {
        let v = h as f64 / 100.0;
        if classify_pdsi(v).unwrap() != class_of_hundredths(h) {
            mismatches += 1;
        }
    }
    let extreme = classify_pdsi(-4.5).unwrap() == PalmerClass::ExtremeDrought;
    verdict(
        mismatches == 0 && extreme,
        format!("2201 values, {mismatches} mismatches, -4.5 extreme: {extreme}"),
    )
}

fn mk_oracle(series: &[f64]) -> (i64, f64) {
    let n = series.len();
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            if series[j] > series[i] {
                s += 1;
            } else if series[j] < series[i] {
                s -= 1;
            }
        }
    }
    let mut groups: HashMap<u64, usize> = HashMap::new();
    for v in series {
        *groups.entry(v.to_bits()).or_default() += 1;
    }
    let nf = n as f64;
    let ties: f64 = groups
        .values()
        .map(|&t| {
            let t = t as f64;
            t * (t - 1.0) * (2.0 * t + 5.0)
        })
        .sum();
    (s, (nf * (nf - 1.0) * (2.0 * nf + 5.0) - ties) / 18.0)
}

fn mann_kendall_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_var = 0.0f64;
    let mut s_bad = 0;
    for _ in 0..200 {
        let n = rng.random_range(3..=200);
        let levels = rng.random_range(2..=30);
        let series: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 * 0.5).collect();
        let r = mann_kendall(&series, 0.05).unwrap();
        let (s, var) = mk_oracle(&series);
        s_bad += (r.s != s) as usize;
        worst_var = worst_var.max((r.var_s - var).abs());
    }
    let inc: Vec<f64> = (1..=10).map(|x| x as f64).collect();
    let r = mann_kendall(&inc, 0.05).unwrap();
    let z_expected = 44.0 / 125f64.sqrt();
    let fixed = r.s == 45 && r.var_s == 125.0 && (r.z - 3.9355).abs() < 1e-4 && (r.z - z_expected).abs() < 1e-12;
    verdict(
        s_bad == 0 && worst_var <= 1e-9 && fixed,
        format!(
            "200 series: S mismatches {s_bad}, max |dVar| {worst_var:.1e}; n=10: S {}, Var {}, Z {:.5}",
            r.s, r.var_s, r.z
        ),
    )
}

fn brute_inertia(points: &[Point2], k: usize) -> f64 {
    let n = points.len();
    let mut best = f64::INFINITY;
    let mut labels = vec![0usize; n];
    loop {
        let mut sums = vec![(0.0, 0.0, 0usize); k];
        for (p, &l) in points.iter().zip(&labels) {
            sums[l].0 += p.t;
            sums[l].1 += p.v;
            sums[l].2 += 1;
        }
        let inertia: f64 = points
            .iter()
            .zip(&labels)
            .map(|(p, &l)| {
                let (st, sv, c) = sums[l];
                let (mt, mv) = (st / c as f64, sv / c as f64);
                (p.t - mt).powi(2) + (p.v - mv).powi(2)
            })
            .sum();
        best = best.min(inertia);
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

fn kmeans_optimality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut misses = 0;
    for instance in 0..50u64 {
        let n = rng.random_range(3..=8);
        let k = rng.random_range(1..=3usize.min(n));
        let points: Vec<Point2> = (0..n)
            .map(|_| Point2::new(rng.random_range(0.0..10.0), rng.random_range(-5.0..0.0)))
            .collect();
        let model = kmeans(&points, k, &KMeansOptions::default(), instance).unwrap();
        let gap = (model.inertia - brute_inertia(&points, k)).abs();
        worst = worst.max(gap);
        misses += (gap > 1e-9) as usize;
    }
    verdict(misses == 0, format!("50 instances, {misses} above 1e-9, max gap {worst:.1e}"))
}

fn silhouette_direct(points: &[Point2], labels: &[usize]) -> f64 {
    let d = |a: &Point2, b: &Point2| ((a.t - b.t).powi(2) + (a.v - b.v).powi(2)).sqrt();
    let clusters: Vec<usize> = {
        let mut c: Vec<usize> = labels.to_vec();
        c.sort();
        c.dedup();
        c
    };
    let mut total = 0.0;
    for (i, p) in points.iter().enumerate() {
        let mean_to = |c: usize| {
            let members: Vec<usize> = (0..points.len()).filter(|&j| labels[j] == c && j != i).collect();
            members.iter().map(|&j| d(p, &points[j])).sum::<f64>() / members.len() as f64
        };
        let own = labels[i];
        if labels.iter().filter(|&&l| l == own).count() == 1 {
            continue;
        }
        let a = mean_to(own);
        let b = clusters
            .iter()
            .filter(|&&c| c != own)
            .map(|&c| {
                let members: Vec<usize> = (0..points.len()).filter(|&j| labels[j] == c).collect();
                members.iter().map(|&j| d(p, &points[j])).sum::<f64>() / members.len() as f64
            })
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        total += if m > 0.0 { (b - a) / m } else { 0.0 };
    }
    total / points.len() as f64
}

fn silhouette_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=50);
        let k = rng.random_range(2..=5usize.min(n));
        let points: Vec<Point2> = (0..n)
            .map(|_| Point2::new(rng.random_range(1900.0..2015.0), rng.random_range(-9.0..-3.0)))
            .collect();
        let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        labels[0] = 0;
        labels[1] = 1;
        let got = silhouette_mean(&points, &labels).unwrap();
        worst = worst.max((got - silhouette_direct(&points, &labels)).abs());
    }
    verdict(worst <= 1e-12, format!("100 instances, max |diff| {worst:.1e}"))
}

/// Binomial quantile by summing the pmf in log space.
fn binomial_quantile(n: u64, p: f64, q: f64) -> u64 {
    let ln_choose = |k: u64| -> f64 {
        let lg = |x: u64| statrs::function::gamma::ln_gamma(x as f64 + 1.0);
        lg(n) - lg(k) - lg(n - k)
    };
    let mut cdf = 0.0;
    for k in 0..=n {
        cdf += (ln_choose(k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp();
        if cdf >= q {
            return k;
        }
    }
    n
}

fn null_band_binomial() -> Verdict {
    let params = NullBandParams::default();
    let band = null_band(&params, 5).unwrap();
    let trials = 2755 * 12;
    let p = 10.0 / 1380.0;
    let (lo, hi) = (binomial_quantile(trials, p, 0.05), binomial_quantile(trials, p, 0.95));
    let all: Vec<u32> = band.replicates.iter().flatten().copied().collect();
    let mean = all.iter().map(|&c| c as f64).sum::<f64>() / all.len() as f64;
    let close = band
        .years
        .iter()
        .filter(|b| (b.lower as i64 - lo as i64).abs() <= 10 && (b.upper as i64 - hi as i64).abs() <= 10)
        .count();
    let frac = close as f64 / band.years.len() as f64;
    verdict(
        (mean - 239.565).abs() <= 2.0 && frac >= 0.9,
        format!("mean {mean:.3}, analytic {lo}/{hi}, endpoints within 10 in {close}/115 years"),
    )
}

fn count_conservation() -> Verdict {
    let mut bad = 0;
    let mut detail = Vec::new();
    // 0.993 leaves about ten valid months per cell, so min(10, valid) binds.
    for (i, missing) in [0.0, 0.3, 0.993].into_iter().enumerate() {
        let ds = generate_synthetic(
            &SyntheticSpec {
                missing_fraction: missing,
                ..SyntheticSpec::default()
            },
            60 + i as u64,
        )
        .unwrap();
        let counts = monthly_lnpv_counts(&ds, 10).unwrap();
        let expected: u64 = ds.series().map(|s| s.valid_count().min(10) as u64).sum();
        bad += (counts.total() != expected) as usize;
        detail.push(format!("{}={}", counts.total(), expected));
    }
    verdict(bad == 0, format!("missing 0/0.3/0.993: {}", detail.join(", ")))
}

fn null_coverage() -> Verdict {
    let spec = SyntheticSpec::default();
    let mut covered = 0;
    let mut quiet = 0;
    let mut fractions = Vec::new();
    for seed in 0..10u64 {
        let ds = generate_synthetic(&spec, 700 + seed).unwrap();
        let counts = monthly_lnpv_counts(&ds, 10).unwrap();
        let band = null_band(&NullBandParams::for_dataset(&ds, 10, false), 700 + seed).unwrap();
        let frac = band_exceedance(&counts.annual, &band).unwrap().fraction_inside();
        fractions.push(format!("{frac:.2}"));
        covered += (frac >= 0.8) as usize;
        let mk = mann_kendall(&counts.annual_values(), 0.05).unwrap();
        quiet += (mk.direction == TrendDirection::None) as usize;
    }
    verdict(
        covered >= 8 && quiet >= 8,
        format!(
            "seeds with >=80% inside: {covered}/10 [{}], MK non-significant: {quiet}/10",
            fractions.join(" ")
        ),
    )
}

fn planted_trend() -> Verdict {
    let spec = SyntheticSpec {
        late_drop: Some(LateDrop {
            from_year: 1975,
            depth: 6.0,
        }),
        ..SyntheticSpec::default()
    };
    let final_third = 1900.0 + 115.0 * 2.0 / 3.0;
    let mut ok = 0;
    let mut onsets = Vec::new();
    for seed in 0..10u64 {
        let ds = generate_synthetic(&spec, 800 + seed).unwrap();
        let counts = monthly_lnpv_counts(&ds, 10).unwrap();
        let mk = mann_kendall(&counts.annual_values(), 0.01).unwrap();
        let band = null_band(&NullBandParams::for_dataset(&ds, 10, false), 800 + seed).unwrap();
        let onset = band_exceedance(&counts.annual, &band).unwrap().sustained_onset;
        onsets.push(onset.map(|y| y.to_string()).unwrap_or_else(|| "-".into()));
        let late = onset.is_some_and(|y| y as f64 >= final_third);
        ok += (mk.direction == TrendDirection::Increasing && mk.p_two_sided < 0.01 && late) as usize;
    }
    verdict(ok == 10, format!("{ok}/10 seeds, onsets [{}]", onsets.join(" ")))
}

fn wavelet_planted() -> Verdict {
    let mut hits = 0;
    let mut found = Vec::new();
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
        let noise = Normal::new(0.0, 0.3).unwrap();
        let x: Vec<f64> = (0..115)
            .map(|t| (2.0 * std::f64::consts::PI * t as f64 / 8.0).sin() + noise.sample(&mut rng))
            .collect();
        let d = dominant_period(&cwt_morlet(&x, &CwtOptions::default()).unwrap());
        found.push(d.period.map(|p| format!("{p:.2}")).unwrap_or_else(|| "-".into()));
        hits += (d.significant && d.period.is_some_and(|p| (7.0..=9.0).contains(&p))) as usize;
    }
    let zero = dominant_period(&cwt_morlet(&[0.0; 115], &CwtOptions::default()).unwrap());
    verdict(
        hits >= 9 && !zero.significant,
        format!("{hits}/10 in [7, 9] [{}], zero series significant: {}", found.join(" "), zero.significant),
    )
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_droughtscan");
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let status = Command::new(bin).args(args).current_dir(dir.path()).output().unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    };
    run(&["synth", "--cells", "500", "--seed", "7", "--out", "data", "-q"]);
    run(&["report", "data/synthetic.csv", "--seed", "7", "--threads", "1", "--out", "a", "-q"]);
    run(&["report", "data/synthetic.csv", "--seed", "7", "--threads", "4", "--out", "b", "-q"]);
    let (a, b) = (tree(&dir.path().join("a")), tree(&dir.path().join("b")));
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
    verdict(
        a.len() > 10 && a == b,
        format!("{} files, {} differ between --threads 1 and 4", a.len(), differing.len()),
    )
}

const DATASET_VAR: &str = "DROUGHTSCAN_PDSI_CSV";

fn reference_dataset() -> Verdict {
    let Some(path) = std::env::var_os(DATASET_VAR) else {
        return Verdict::Skip(format!("set {DATASET_VAR} to run"));
    };
    let file = std::fs::File::open(&path).unwrap();
    let ds = ingest_csv(std::io::BufReader::new(file), &IngestOptions::default()).unwrap().dataset;
    let sets = lnpv_map(&ds, 10).unwrap();
    let mut years: Vec<(i32, usize)> = leading_year_counts(&sets).into_iter().collect();
    years.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let top: Vec<(i32, usize)> = years.iter().take(3).copied().collect();
    let expect = [(2012, 617.0), (1984, 613.0), (1983, 602.0)];
    let top_ok = top.len() == 3
        && expect.iter().all(|(y, c)| {
            top.iter()
                .any(|(ty, tc)| ty == y && (*tc as f64 - c).abs() <= 0.02 * c)
        });
    let points: Vec<Point2> = sets
        .iter()
        .map(|s| Point2::new(s.leading().fractional_year(), s.leading().value))
        .collect();
    let sel = select_k(&points, 2, 10, &KMeansOptions::default(), 0).unwrap();
    let fixed = cluster_lnpv(
        &ds,
        10,
        &LnpvClusterOptions {
            count: ClusterCount::Fixed(4),
            ..LnpvClusterOptions::default()
        },
        0,
    )
    .unwrap();
    let targets = [(1978.11, -6.07), (1913.75, -6.87), (1943.53, -6.20), (2004.34, -6.84)];
    let centroids_ok = targets.iter().all(|(t, v)| {
        fixed
            .model
            .centroids
            .iter()
            .any(|c| (c.t - t).abs() <= 3.0 && (c.v - v).abs() <= 0.3)
    });
    let counts = monthly_lnpv_counts(&ds, 10).unwrap();
    let empty: Vec<String> = counts
        .monthly
        .iter()
        .filter(|(_, c)| *c == 0)
        .map(|(m, _)| m.to_string())
        .collect();
    let months_ok = empty == ["1970-08"];
    verdict(
        ds.len() == 2755 && top_ok && sel.best_k == 4 && centroids_ok && months_ok,
        format!(
            "cells {}, top years {top:?}, k {}, centroids ok {centroids_ok}, empty months {empty:?}",
            ds.len(),
            sel.best_k
        ),
    )
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "Palmer classification sweep", budget: Duration::from_secs(1), run: palmer_sweep },
        Criterion { id: 2, name: "Mann-Kendall oracle", budget: Duration::from_secs(5), run: mann_kendall_oracle },
        Criterion { id: 3, name: "K-means exhaustive optimum", budget: Duration::from_secs(30), run: kmeans_optimality },
        Criterion { id: 4, name: "Silhouette oracle", budget: Duration::from_secs(10), run: silhouette_oracle },
        Criterion { id: 5, name: "Null band vs binomial", budget: Duration::from_secs(60), run: null_band_binomial },
        Criterion { id: 6, name: "Count conservation", budget: Duration::from_secs(5), run: count_conservation },
        Criterion { id: 7, name: "Null coverage", budget: Duration::from_secs(120), run: null_coverage },
        Criterion { id: 8, name: "Planted trend detection", budget: Duration::from_secs(120), run: planted_trend },
        Criterion { id: 9, name: "Wavelet planted frequency", budget: Duration::from_secs(10), run: wavelet_planted },
        Criterion { id: 10, name: "Report determinism across threads", budget: Duration::from_secs(180), run: determinism },
        Criterion { id: 11, name: "Reference dataset (optional)", budget: Duration::from_secs(600), run: reference_dataset },
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let v = (c.run)();
        let took = start.elapsed();
        let slow = took > c.budget;
        let (tag, detail) = match v {
            Verdict::Pass(d) if slow => ("FAIL", format!("{d}; over budget {:?}", c.budget)),
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => ("FAIL", d),
            Verdict::Skip(d) => ("SKIP", d),
        };
        if tag == "FAIL" {
            failed.push(c.id);
        }
        println!("[{tag}] {:>2}. {} ({:.2?}): {detail}", c.id, c.name, took);
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
