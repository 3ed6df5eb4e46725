//! Welch power-spectral-density estimation and noise-floor extraction.
//!
//! Spectra are one-sided amplitude spectral densities in `unit / sqrt(Hz)`,
//! normalized so that white noise of variance `sigma^2` sampled at `fs` reads
//! `sigma * sqrt(2 / fs)` in every interior bin.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{ensure, Error, Result};
use crate::lockin_dsp::TimeSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub amplitude_spectral_density: Vec<f64>,
}

impl Spectrum {
    pub fn new(frequencies: Vec<f64>, asd: Vec<f64>) -> Result<Self> {
        ensure(frequencies.len() == asd.len(), || "frequency/ASD length mismatch".into())?;
        ensure(frequencies.windows(2).all(|w| w[1] > w[0]), || {
            "frequencies must be strictly increasing".into()
        })?;
        ensure(frequencies.first().is_none_or(|&f| f >= 0.0), || {
            "frequencies must be non-negative".into()
        })?;
        ensure(asd.iter().all(|&a| a >= 0.0), || "ASD must be non-negative".into())?;
        Ok(Self {
            frequencies,
            amplitude_spectral_density: asd,
        })
    }

    /// Bin spacing, assuming a uniform grid.
    pub fn resolution(&self) -> f64 {
        match self.frequencies.as_slice() {
            [a, b, ..] => b - a,
            _ => 0.0,
        }
    }

    pub fn psd(&self) -> impl Iterator<Item = f64> + '_ {
        self.amplitude_spectral_density.iter().map(|a| a * a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Hann,
    Rect,
}

impl Window {
    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            // Periodic Hann, the usual choice for spectral analysis.
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
            Window::Rect => vec![1.0; n],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchOptions {
    pub segment_length: usize,
    pub overlap: f64,
    pub window: Window,
}

impl WelchOptions {
    /// Hann window, 50% overlap, segment length giving 8 segments.
    pub fn for_length(len: usize) -> Self {
        Self {
            segment_length: (2 * len / 9).max(2),
            overlap: 0.5,
            window: Window::Hann,
        }
    }
}

/// One-sided Welch ASD estimate. Each segment has its mean removed.
pub fn psd_welch(series: &TimeSeries, options: &WelchOptions) -> Result<Spectrum> {
    let n = options.segment_length;
    ensure(n >= 2, || "segment length must be at least 2".into())?;
    ensure((0.0..1.0).contains(&options.overlap), || {
        format!("overlap must lie in [0, 1), got {}", options.overlap)
    })?;
    if series.len() < n {
        return Err(Error::TooShort {
            needed: n,
            got: series.len(),
        });
    }
    let step = ((n as f64 * (1.0 - options.overlap)).round() as usize).max(1);
    let window = options.window.coefficients(n);
    let window_power: f64 = window.iter().map(|w| w * w).sum();
    let fs = series.sample_rate;
    let bins = n / 2 + 1;

    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut accum = vec![0.0; bins];
    let mut segments = 0usize;
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    let mut start = 0;
    while start + n <= series.len() {
        let seg = &series.samples[start..start + n];
        let mean = seg.iter().sum::<f64>() / n as f64;
        for ((b, &x), &w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = Complex::new((x - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, c) in accum.iter_mut().zip(&buf) {
            *a += c.norm_sqr();
        }
        segments += 1;
        start += step;
    }

    let scale = 1.0 / (fs * window_power * segments as f64);
    let asd = accum
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            // DC and (for even n) Nyquist are not mirrored.
            let one_sided = if k == 0 || (n.is_multiple_of(2) && k == n / 2) { 1.0 } else { 2.0 };
            (p * scale * one_sided).sqrt()
        })
        .collect();
    let frequencies = (0..bins).map(|k| k as f64 * fs / n as f64).collect();
    Spectrum::new(frequencies, asd)
}

fn band_indices(spec: &Spectrum, lo: f64, hi: f64) -> Result<Vec<usize>> {
    ensure(hi >= lo, || format!("band [{lo}, {hi}] is reversed"))?;
    let idx: Vec<usize> = spec
        .frequencies
        .iter()
        .enumerate()
        .filter(|(_, &f)| f >= lo && f <= hi)
        .map(|(i, _)| i)
        .collect();
    if idx.is_empty() {
        return Err(Error::EmptyBand { lo, hi });
    }
    Ok(idx)
}

/// Median ASD over the bins in `[lo, hi]`. Isolated narrow peaks do not move it.
pub fn noise_floor(spec: &Spectrum, lo: f64, hi: f64) -> Result<f64> {
    let mut values: Vec<f64> = band_indices(spec, lo, hi)?
        .into_iter()
        .map(|i| spec.amplitude_spectral_density[i])
        .collect();
    values.sort_by(f64::total_cmp);
    let m = values.len();
    Ok(if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    })
}

/// RMS over `[lo, hi]`, integrating the PSD as piecewise constant on cells of
/// one bin width centered on each bin and clipped to the band.
pub fn rms_in_band(spec: &Spectrum, lo: f64, hi: f64) -> Result<f64> {
    ensure(hi >= lo, || format!("band [{lo}, {hi}] is reversed"))?;
    let df = spec.resolution();
    ensure(df > 0.0, || "spectrum needs at least two bins".into())?;
    let mut power = 0.0;
    let mut touched = false;
    for (&f, &a) in spec.frequencies.iter().zip(&spec.amplitude_spectral_density) {
        let cell_lo = (f - 0.5 * df).max(0.0).max(lo);
        let cell_hi = (f + 0.5 * df).min(hi);
        if cell_hi > cell_lo {
            power += a * a * (cell_hi - cell_lo);
            touched = true;
        }
    }
    if !touched {
        return Err(Error::EmptyBand { lo, hi });
    }
    Ok(power.sqrt())
}

/// Total power `sum PSD * df` over all bins, for Parseval checks.
pub fn total_power(spec: &Spectrum) -> f64 {
    spec.psd().sum::<f64>() * spec.resolution()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn white(sigma: f64, fs: f64, n: usize, seed: u64) -> TimeSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Normal::new(0.0, sigma).unwrap();
        TimeSeries::new(fs, 0.0, (0..n).map(|_| d.sample(&mut rng)).collect()).unwrap()
    }

    #[test]
    fn white_noise_level() {
        let s = white(1.0, 10e3, 100_000, 7);
        let spec = psd_welch(&s, &WelchOptions::for_length(s.len())).unwrap();
        let floor = noise_floor(&spec, 10.0, 4900.0).unwrap();
        assert_relative_eq!(floor, (2.0f64 / 10e3).sqrt(), max_relative = 0.1);
        let mean_psd: f64 = spec.psd().skip(1).take(spec.frequencies.len() - 2).sum::<f64>()
            / (spec.frequencies.len() - 2) as f64;
        assert_relative_eq!(mean_psd.sqrt(), 1.41e-2, max_relative = 0.05);
    }

    #[test]
    fn parseval_hann_half_overlap() {
        let s = white(0.7, 10e3, 100_000, 11);
        let var = s.samples.iter().map(|x| x * x).sum::<f64>() / s.len() as f64;
        let spec = psd_welch(&s, &WelchOptions::for_length(s.len())).unwrap();
        assert_relative_eq!(total_power(&spec), var, max_relative = 0.03);
    }

    #[test]
    fn sinusoid_power_under_peak() {
        let fs = 10e3;
        let a = 0.5;
        let n = 80_000;
        let samples = (0..n).map(|k| a * (2.0 * PI * 1234.5 * k as f64 / fs).sin()).collect();
        let s = TimeSeries::new(fs, 0.0, samples).unwrap();
        let spec = psd_welch(&s, &WelchOptions::for_length(n)).unwrap();
        let df = spec.resolution();
        let peak: f64 = spec
            .frequencies
            .iter()
            .zip(spec.psd())
            .filter(|(f, _)| (*f - 1234.5).abs() < 10.0 * df)
            .map(|(_, p)| p * df)
            .sum();
        assert_relative_eq!(peak, a * a / 2.0, max_relative = 0.03);
    }

    #[test]
    fn zero_in_zero_out_and_linear_scaling() {
        let z = TimeSeries::new(1e3, 0.0, vec![0.0; 4096]).unwrap();
        let spec = psd_welch(&z, &WelchOptions::for_length(4096)).unwrap();
        assert!(spec.amplitude_spectral_density.iter().all(|&a| a == 0.0));

        let s = white(1.0, 1e3, 4096, 3);
        let opts = WelchOptions::for_length(4096);
        let a = psd_welch(&s, &opts).unwrap();
        let b = psd_welch(&s.map(|v| 3.0 * v), &opts).unwrap();
        for (x, y) in a.amplitude_spectral_density.iter().zip(&b.amplitude_spectral_density) {
            assert!((3.0 * x - y).abs() <= 1e-12 * y.max(1e-300));
        }
    }

    #[test]
    fn rect_window_and_errors() {
        let s = white(1.0, 1e3, 8192, 5);
        let opts = WelchOptions {
            segment_length: 1024,
            overlap: 0.0,
            window: Window::Rect,
        };
        let spec = psd_welch(&s, &opts).unwrap();
        assert_relative_eq!(noise_floor(&spec, 1.0, 499.0).unwrap(), (2.0f64 / 1e3).sqrt(), max_relative = 0.1);
        assert!(matches!(
            psd_welch(&s, &WelchOptions { segment_length: 10_000, ..opts }),
            Err(Error::TooShort { .. })
        ));
        assert!(psd_welch(&s, &WelchOptions { overlap: 1.0, ..opts }).is_err());
    }

    fn flat(level: f64, df: f64, bins: usize) -> Spectrum {
        Spectrum::new((0..bins).map(|k| k as f64 * df).collect(), vec![level; bins]).unwrap()
    }

    #[test]
    fn noise_floor_examples() {
        let spec = flat(2.5e-9, 0.1, 10_000);
        assert_eq!(noise_floor(&spec, 10.0, 500.0).unwrap(), 2.5e-9);

        let mut peaky = flat(2.7e-9, 0.1, 10_000);
        for (f, a) in peaky.frequencies.iter().zip(peaky.amplitude_spectral_density.iter_mut()) {
            if (f - 50.0).abs() < 1.0 || (f - 150.0).abs() < 1.0 {
                *a = 1e-7;
            }
        }
        assert_eq!(noise_floor(&peaky, 10.0, 500.0).unwrap(), 2.7e-9);
        assert!(matches!(noise_floor(&spec, 2000.0, 3000.0), Err(Error::EmptyBand { .. })));
    }

    #[test]
    fn rms_examples() {
        let spec = flat(3.0, 0.5, 2001);
        assert_relative_eq!(rms_in_band(&spec, 100.0, 200.0).unwrap(), 3.0 * 100f64.sqrt(), max_relative = 1e-12);
        let a = rms_in_band(&spec, 10.0, 60.0).unwrap();
        let b = rms_in_band(&spec, 60.0, 400.0).unwrap();
        let ab = rms_in_band(&spec, 10.0, 400.0).unwrap();
        assert_relative_eq!(ab, (a * a + b * b).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn rms_matches_time_domain_for_white_noise() {
        let s = white(2.0, 10e3, 100_000, 13);
        let var = s.samples.iter().map(|x| x * x).sum::<f64>() / s.len() as f64;
        let spec = psd_welch(&s, &WelchOptions::for_length(s.len())).unwrap();
        let rms = rms_in_band(&spec, 0.0, 5e3).unwrap();
        assert_relative_eq!(rms, var.sqrt(), max_relative = 0.05);
    }
}
