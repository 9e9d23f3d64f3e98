//! Morlet continuous wavelet transform of an annual series, with a
//! white-noise significance level and the cone of influence.
//!
//! Normalization follows Torrence & Compo (1998): each daughter wavelet has
//! unit energy, so white noise of variance σ² has expected power σ² at every
//! scale.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::trend::ols_trend;
use crate::{par, Error, Result};

/// 95% quantile of chi-squared with two degrees of freedom, `-2 ln 0.05`.
const CHI2_2DOF_95: f64 = 5.991_464_547_107_979;

pub const MIN_LENGTH: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CwtOptions {
    /// Morlet central (angular) frequency.
    pub omega0: f64,
    pub voices_per_octave: usize,
    /// Shortest analysed period, in time steps.
    pub min_period: f64,
    /// Longest analysed period; `None` means half the series length.
    pub max_period: Option<f64>,
    /// Remove a least-squares line before the transform (the mean is always removed).
    pub detrend: bool,
}

impl Default for CwtOptions {
    fn default() -> Self {
        CwtOptions {
            omega0: 6.0,
            voices_per_octave: 8,
            min_period: 2.0,
            max_period: None,
            detrend: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveletSpectrum {
    /// Fourier periods, strictly increasing.
    pub periods: Vec<f64>,
    pub scales: Vec<f64>,
    /// `power[scale][time]`, |W|².
    pub power: Vec<Vec<f64>>,
    /// Time-mean of `power` per scale.
    pub global: Vec<f64>,
    /// Largest period unaffected by edge effects at each time.
    pub coi: Vec<f64>,
    /// White-noise 95% power level per scale.
    pub significance: Vec<f64>,
    /// Variance of the analysed (mean-removed, possibly detrended) series.
    pub variance: f64,
}

impl WaveletSpectrum {
    pub fn len(&self) -> usize {
        self.coi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coi.is_empty()
    }

    /// Whether `(scale, time)` lies outside the cone of influence.
    pub fn is_reliable(&self, scale: usize, time: usize) -> bool {
        self.periods[scale] <= self.coi[time]
    }
}

/// Fourier period of a Morlet wavelet at unit scale.
pub fn fourier_factor(omega0: f64) -> f64 {
    4.0 * PI / (omega0 + (2.0 + omega0 * omega0).sqrt())
}

/// Morlet CWT by FFT convolution over zero-padded input.
pub fn cwt_morlet(series: &[f64], options: &CwtOptions) -> Result<WaveletSpectrum> {
    let n = series.len();
    if n < MIN_LENGTH {
        return Err(Error::SeriesTooShort { len: n, min: MIN_LENGTH });
    }
    if let Some(i) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    if !(options.omega0 > 0.0) || options.voices_per_octave == 0 || !(options.min_period > 0.0) {
        return Err(Error::invalid("omega0, voices_per_octave and min_period must be positive"));
    }
    let max_period = options.max_period.unwrap_or(n as f64 / 2.0);
    if max_period < options.min_period {
        return Err(Error::invalid(format!(
            "max period {max_period} below min period {}",
            options.min_period
        )));
    }

    let mean = series.iter().sum::<f64>() / n as f64;
    let mut x: Vec<f64> = series.iter().map(|v| v - mean).collect();
    if options.detrend {
        let fit = ols_trend(&x, 1.0)?;
        for (i, v) in x.iter_mut().enumerate() {
            *v -= fit.intercept + fit.slope * i as f64;
        }
    }
    let variance = x.iter().map(|v| v * v).sum::<f64>() / n as f64;

    let factor = fourier_factor(options.omega0);
    let voices = options.voices_per_octave as f64;
    let periods: Vec<f64> = (0..)
        .map(|j| options.min_period * 2f64.powf(j as f64 / voices))
        .take_while(|&p| p <= max_period * (1.0 + 1e-12))
        .collect();
    let scales: Vec<f64> = periods.iter().map(|p| p / factor).collect();

    let npad = n.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(npad);
    let inverse = planner.plan_fft_inverse(npad);
    let mut spectrum: Vec<Complex<f64>> = x
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(npad)
        .collect();
    forward.process(&mut spectrum);

    let dk = 2.0 * PI / npad as f64;
    let omega0 = options.omega0;
    let power = par::map_collect(&scales, |&s| {
        let norm = (2.0 * PI * s).sqrt() * PI.powf(-0.25);
        let mut buf: Vec<Complex<f64>> = spectrum
            .iter()
            .enumerate()
            .map(|(i, c)| {
                // Analytic wavelet: positive frequencies only.
                if i == 0 || i > npad / 2 {
                    Complex::new(0.0, 0.0)
                } else {
                    let arg = s * i as f64 * dk - omega0;
                    c * (norm * (-0.5 * arg * arg).exp())
                }
            })
            .collect();
        inverse.process(&mut buf);
        let scale = 1.0 / npad as f64;
        buf[..n].iter().map(|c| (c * scale).norm_sqr()).collect::<Vec<f64>>()
    });

    let global = power
        .iter()
        .map(|row| row.iter().sum::<f64>() / n as f64)
        .collect();
    let coi = (0..n)
        .map(|t| factor / 2f64.sqrt() * t.min(n - 1 - t) as f64)
        .collect();
    let significance = vec![variance * CHI2_2DOF_95 / 2.0; scales.len()];

    Ok(WaveletSpectrum {
        periods,
        scales,
        power,
        global,
        coi,
        significance,
        variance,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DominantPeriod {
    /// Period of the strongest significant global peak, if any.
    pub period: Option<f64>,
    pub significant: bool,
}

/// Strongest period among scales whose global power exceeds the
/// significance level.
pub fn dominant_period(spectrum: &WaveletSpectrum) -> DominantPeriod {
    let best = spectrum
        .global
        .iter()
        .zip(&spectrum.significance)
        .enumerate()
        .filter(|(_, (g, s))| g > s)
        .max_by(|(_, (a, _)), (_, (b, _))| a.total_cmp(b));
    match best {
        Some((i, _)) => DominantPeriod {
            period: Some(spectrum.periods[i]),
            significant: true,
        },
        None => DominantPeriod {
            period: None,
            significant: false,
        },
    }
}
