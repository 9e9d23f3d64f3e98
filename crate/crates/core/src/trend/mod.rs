//! Counts of cells hitting one of their historical extremes, and the tests
//! applied to that series: OLS slope, Mann-Kendall, trailing moving averages
//! and a Monte Carlo band under random timing.

mod null_band;

pub use null_band::{band_exceedance, null_band, BandPosition, BandYear, CellProbabilities, Exceedance, NullBand, NullBandParams};

use crate::extremes::{lnpv_map, LnpvSet};
use crate::grid::{GridDataset, MonthStamp, Period};
use crate::stats::normal_two_sided_p;
use crate::{Error, Result};

/// Number of cells with an extreme event in each month, plus annual totals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountSeries {
    pub monthly: Vec<(MonthStamp, u32)>,
    pub annual: Vec<(i32, u32)>,
}

impl CountSeries {
    /// Tallies the events of `sets` over `period`. Events outside the period
    /// are ignored.
    pub fn from_sets(period: Period, sets: &[LnpvSet]) -> Self {
        let mut monthly = vec![0u32; period.len()];
        for set in sets {
            for e in set.events() {
                if let Some(i) = period.index_of(e.when) {
                    monthly[i] += 1;
                }
            }
        }
        let mut annual: Vec<(i32, u32)> = (period.first_year()..=period.last_year()).map(|y| (y, 0)).collect();
        for (i, &c) in monthly.iter().enumerate() {
            let y = period.stamp_at(i).year();
            annual[(y - period.first_year()) as usize].1 += c;
        }
        CountSeries {
            monthly: monthly
                .into_iter()
                .enumerate()
                .map(|(i, c)| (period.stamp_at(i), c))
                .collect(),
            annual,
        }
    }

    pub fn total(&self) -> u64 {
        self.monthly.iter().map(|&(_, c)| c as u64).sum()
    }

    pub fn monthly_values(&self) -> Vec<f64> {
        self.monthly.iter().map(|&(_, c)| c as f64).collect()
    }

    pub fn annual_values(&self) -> Vec<f64> {
        self.annual.iter().map(|&(_, c)| c as f64).collect()
    }
}

/// For every month, the number of cells whose `k` most negative months
/// include it.
pub fn monthly_lnpv_counts(dataset: &GridDataset, k: usize) -> Result<CountSeries> {
    let sets = lnpv_map(dataset, k)?;
    Ok(CountSeries::from_sets(dataset.period(), &sets))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OlsFit {
    /// Change per time step.
    pub slope: f64,
    /// Fitted value at index 0.
    pub intercept: f64,
    pub slope_per_decade: f64,
}

/// Least-squares line through `(i, series[i])`. `steps_per_year` converts
/// the slope to a per-decade rate (12 for monthly data, 1 for annual).
pub fn ols_trend(series: &[f64], steps_per_year: f64) -> Result<OlsFit> {
    let n = series.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { len: n, min: 2 });
    }
    if let Some(i) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let nf = n as f64;
    let mean_x = (nf - 1.0) / 2.0;
    let mean_y = series.iter().sum::<f64>() / nf;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, &y) in series.iter().enumerate() {
        let dx = i as f64 - mean_x;
        sxy += dx * (y - mean_y);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    Ok(OlsFit {
        slope,
        intercept: mean_y - slope * mean_x,
        slope_per_decade: slope * steps_per_year * 10.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrendDirection {
    Increasing,
    Decreasing,
    None,
}

impl TrendDirection {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrendDirection::Increasing => "increasing",
            TrendDirection::Decreasing => "decreasing",
            TrendDirection::None => "none",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MannKendallResult {
    pub n: usize,
    pub s: i64,
    pub var_s: f64,
    pub z: f64,
    pub p_two_sided: f64,
    pub alpha: f64,
    pub direction: TrendDirection,
}

/// Mann-Kendall monotonic trend test with tie-corrected variance and the
/// continuity-corrected normal approximation.
pub fn mann_kendall(series: &[f64], alpha: f64) -> Result<MannKendallResult> {
    let n = series.len();
    if n < 3 {
        return Err(Error::SeriesTooShort { len: n, min: 3 });
    }
    if let Some(i) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must be in (0, 1), got {alpha}")));
    }

    let mut s: i64 = 0;
    for i in 0..n - 1 {
        let xi = series[i];
        for &xj in &series[i + 1..] {
            s += (xj > xi) as i64 - (xj < xi) as i64;
        }
    }

    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut run = 1usize;
    for i in 1..=n {
        if i < n && sorted[i] == sorted[i - 1] {
            run += 1;
        } else {
            if run > 1 {
                let t = run as f64;
                tie_term += t * (t - 1.0) * (2.0 * t + 5.0);
            }
            run = 1;
        }
    }
    let nf = n as f64;
    let var_s = ((nf * (nf - 1.0) * (2.0 * nf + 5.0) - tie_term) / 18.0).max(0.0);

    let z = if s == 0 || var_s == 0.0 {
        0.0
    } else if s > 0 {
        (s - 1) as f64 / var_s.sqrt()
    } else {
        (s + 1) as f64 / var_s.sqrt()
    };
    let p_two_sided = normal_two_sided_p(z);
    let direction = if p_two_sided < alpha && z > 0.0 {
        TrendDirection::Increasing
    } else if p_two_sided < alpha && z < 0.0 {
        TrendDirection::Decreasing
    } else {
        TrendDirection::None
    };
    Ok(MannKendallResult {
        n,
        s,
        var_s,
        z,
        p_two_sided,
        alpha,
        direction,
    })
}

/// Trailing mean: output `j` averages `series[j..j + window]`, i.e. it is
/// aligned to input index `j + window - 1`.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window < 1 {
        return Err(Error::invalid("moving-average window must be at least 1"));
    }
    if window > series.len() {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            min: window,
        });
    }
    Ok(series
        .windows(window)
        .map(|w| {
            let lo = w.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (w.iter().sum::<f64>() / window as f64).clamp(lo, hi)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremes::extract_lnpv;
    use crate::grid::{GridCoordinate, PdsiSeries};

    #[test]
    fn twelve_of_twelve() {
        let period = Period::years(1900, 1900).unwrap();
        let values = (0..12).map(|i| Some(i as f64)).collect();
        let s = PdsiSeries::new(GridCoordinate::new(0, 0).unwrap(), period, values).unwrap();
        let ds = GridDataset::new(period, [s]).unwrap();
        let c = monthly_lnpv_counts(&ds, 12).unwrap();
        assert!(c.monthly.iter().all(|&(_, n)| n == 1));
        assert_eq!(c.total(), 12);
        assert_eq!(c.annual, vec![(1900, 12)]);
    }

    #[test]
    fn disjoint_cells() {
        let period = Period::years(1900, 1901).unwrap();
        let a: Vec<Option<f64>> = (0..24).map(|i| Some(if i < 12 { -1.0 - i as f64 } else { 1.0 })).collect();
        let b: Vec<Option<f64>> = (0..24).map(|i| Some(if i >= 12 { -1.0 - i as f64 } else { 1.0 })).collect();
        let ds = GridDataset::new(
            period,
            [
                PdsiSeries::new(GridCoordinate::new(0, 0).unwrap(), period, a).unwrap(),
                PdsiSeries::new(GridCoordinate::new(1, 0).unwrap(), period, b).unwrap(),
            ],
        )
        .unwrap();
        let c = monthly_lnpv_counts(&ds, 5).unwrap();
        assert!(c.monthly.iter().all(|&(_, n)| n <= 1));
        assert_eq!(c.total(), 10);
        let sets: Vec<_> = ds.series().map(|s| extract_lnpv(s, 5).unwrap()).collect();
        assert_eq!(CountSeries::from_sets(period, &sets), c);
    }

    #[test]
    fn ols_exact_and_constant() {
        let fit = ols_trend(&[4.0; 10], 1.0).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.intercept, 4.0);
        let line: Vec<f64> = (0..50).map(|t| 2.0 * t as f64 + 3.0).collect();
        let fit = ols_trend(&line, 12.0).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert!((fit.slope_per_decade - 240.0).abs() < 1e-9);
        assert!(ols_trend(&[1.0], 1.0).is_err());
    }

    #[test]
    fn ols_recovers_noisy_slope() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let noise = Normal::new(0.0, 0.1).unwrap();
        let y: Vec<f64> = (0..1380).map(|t| t as f64 + noise.sample(&mut rng)).collect();
        let fit = ols_trend(&y, 12.0).unwrap();
        assert!((0.99..=1.01).contains(&fit.slope));
    }

    #[test]
    fn mk_strictly_increasing_ten() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let r = mann_kendall(&x, 0.05).unwrap();
        assert_eq!(r.s, 45);
        assert_eq!(r.var_s, 125.0);
        assert!((r.z - 3.9355).abs() < 1e-4);
        assert!((r.p_two_sided - 8.3e-5).abs() < 0.1e-5);
        assert_eq!(r.direction, TrendDirection::Increasing);
    }

    #[test]
    fn mk_constant_and_short() {
        let r = mann_kendall(&[2.0; 8], 0.05).unwrap();
        assert_eq!((r.s, r.z, r.p_two_sided), (0, 0.0, 1.0));
        assert_eq!(r.var_s, 0.0);
        assert_eq!(r.direction, TrendDirection::None);
        assert!(mann_kendall(&[1.0, 2.0], 0.05).is_err());
        assert!(mann_kendall(&[1.0, f64::NAN, 2.0], 0.05).is_err());
    }

    #[test]
    fn mk_reversal_antisymmetry() {
        let x = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0, 5.0];
        let fwd = mann_kendall(&x, 0.05).unwrap();
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        let bwd = mann_kendall(&rev, 0.05).unwrap();
        assert_eq!(fwd.s, -bwd.s);
        assert_eq!(fwd.z, -bwd.z);
        assert_eq!(fwd.p_two_sided, bwd.p_two_sided);
        assert_eq!(fwd.var_s, bwd.var_s);
    }

    #[test]
    fn moving_average_examples() {
        assert_eq!(moving_average(&[1.0, 2.0, 3.0, 4.0, 5.0], 2).unwrap(), vec![1.5, 2.5, 3.5, 4.5]);
        let c = moving_average(&[0.1; 40], 30).unwrap();
        assert_eq!(c.len(), 11);
        assert!(c.iter().all(|&v| v == 0.1));
        assert!(moving_average(&[1.0, 2.0], 3).is_err());
        assert!(moving_average(&[1.0, 2.0], 0).is_err());
    }

    #[test]
    fn moving_average_of_line_keeps_slope() {
        let line: Vec<f64> = (0..115).map(|t| 0.7 * t as f64 - 3.0).collect();
        for w in [10, 20, 30] {
            let ma = moving_average(&line, w).unwrap();
            for (j, v) in ma.iter().enumerate() {
                // Window j..j+w averages to the line at its midpoint j + (w-1)/2.
                let expected = 0.7 * (j as f64 + (w as f64 - 1.0) / 2.0) - 3.0;
                assert!((v - expected).abs() < 1e-9);
            }
        }
    }
}
