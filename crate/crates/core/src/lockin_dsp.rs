//! Frequency-modulated ODMR read out with a lock-in amplifier.
//!
//! The microwave frequency is swept as `f_MW(t) = fc + fdev cos(2 pi fmod t)`.
//! The detected transmission is multiplied by `2 cos(2 pi fmod t + phase)` and
//! low-passed by a cascade of identical single-pole stages. Near resonance the
//! output is linear in detuning, `S_LI ~ alpha (fc - f_res)`, and a field change
//! follows from `dB = -2 pi S_LI / (alpha gamma cos theta)`.
//!
//! The finite response of the NV system to fast modulation is lumped into a
//! single-pole roll-off in `fmod`, calibrated by the modulation frequency at
//! which `alpha` has halved.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{ensure, Error, Result};
use crate::magnetometry::{
    odmr_transmission, resonance_frequencies, ResonancePair, SpinParams, Transition,
    ZEEMAN_REGIME_LIMIT,
};

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub sample_rate: f64,
    pub start_time: f64,
    pub samples: Vec<f64>,
}

impl TimeSeries {
    pub fn new(sample_rate: f64, start_time: f64, samples: Vec<f64>) -> Result<Self> {
        ensure(sample_rate > 0.0 && sample_rate.is_finite(), || {
            format!("sample rate must be positive, got {sample_rate}")
        })?;
        Ok(Self {
            sample_rate,
            start_time,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn time(&self, index: usize) -> f64 {
        self.start_time + index as f64 / self.sample_rate
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            samples: self.samples.iter().map(|&v| f(v)).collect(),
            ..*self
        }
    }

    /// Samples from `from` seconds after the start onwards.
    pub fn tail_from(&self, from: f64) -> Self {
        let skip = ((from * self.sample_rate).ceil() as usize).min(self.len());
        Self {
            sample_rate: self.sample_rate,
            start_time: self.time(skip),
            samples: self.samples[skip..].to_vec(),
        }
    }

    /// Keeps every `factor`-th sample.
    pub fn decimate(&self, factor: usize) -> Self {
        let factor = factor.max(1);
        Self {
            sample_rate: self.sample_rate / factor as f64,
            start_time: self.start_time,
            samples: self.samples.iter().step_by(factor).copied().collect(),
        }
    }

    pub fn mean(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.samples.iter().sum::<f64>() / self.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationConfig {
    pub center_frequency: f64,
    /// Peak deviation. A negative value inverts the sweep direction.
    pub deviation: f64,
    pub modulation_frequency: f64,
}

impl ModulationConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.center_frequency > 0.0, || "center frequency must be positive".into())?;
        ensure(self.modulation_frequency > 0.0, || "modulation frequency must be positive".into())?;
        ensure(
            self.deviation != 0.0 && self.deviation.abs() < self.center_frequency,
            || "deviation must be non-zero and smaller than the center frequency".into(),
        )
    }
}

/// Instantaneous microwave frequency `fc + fdev cos(2 pi fmod t)`.
pub fn fm_waveform(t: f64, modulation: &ModulationConfig) -> f64 {
    modulation.center_frequency
        + modulation.deviation * (2.0 * PI * modulation.modulation_frequency * t).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockinConfig {
    pub time_constant: f64,
    pub filter_order: u32,
    /// Added to the reference phase `2 pi fmod t`, rad.
    pub reference_phase: f64,
}

impl Default for LockinConfig {
    fn default() -> Self {
        Self {
            time_constant: 320e-6,
            filter_order: 1,
            reference_phase: 0.0,
        }
    }
}

impl LockinConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.time_constant > 0.0, || "time constant must be positive".into())?;
        ensure(self.filter_order >= 1, || "filter order must be at least 1".into())
    }

    /// Magnitude response of the output filter at baseband frequency `f`.
    pub fn response(&self, f: f64) -> f64 {
        let x = 2.0 * PI * f * self.time_constant;
        (1.0 + x * x).powf(-0.5 * self.filter_order as f64)
    }

    /// -3 dB bandwidth of a single stage, `1 / (2 pi tau)`.
    pub fn bandwidth(&self) -> f64 {
        1.0 / (2.0 * PI * self.time_constant)
    }
}

/// Single-pole roll-off of the discriminant slope with modulation frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthModel {
    pub corner_frequency: f64,
}

impl BandwidthModel {
    pub fn validate(&self) -> Result<()> {
        ensure(self.corner_frequency > 0.0, || "corner frequency must be positive".into())
    }

    /// Modulation frequency at which the slope has dropped by 2, `sqrt(3) f3dB`.
    pub fn factor2_frequency(&self) -> f64 {
        3f64.sqrt() * self.corner_frequency
    }

    /// Factor by which the slope is reduced at `fmod`.
    pub fn attenuation(&self, fmod: f64) -> f64 {
        1.0 / bandwidth_rolloff(fmod, self)
    }

    /// Phase lag of the first-harmonic response at `fmod`, rad.
    pub fn phase_lag(&self, fmod: f64) -> f64 {
        (fmod / self.corner_frequency).atan()
    }
}

/// Slope gain `1 / sqrt(1 + (fmod / f3dB)^2)`, at most 1.
pub fn bandwidth_rolloff(fmod: f64, bw: &BandwidthModel) -> f64 {
    let x = fmod / bw.corner_frequency;
    1.0 / (1.0 + x * x).sqrt()
}

/// Bandwidth model whose slope halves at `factor2_frequency`.
pub fn calibrate_bandwidth(factor2_frequency: f64) -> Result<BandwidthModel> {
    ensure(factor2_frequency > 0.0, || "bandwidth must be positive".into())?;
    Ok(BandwidthModel {
        corner_frequency: factor2_frequency / 3f64.sqrt(),
    })
}

/// Field seen by the spins, `bias + amplitude sin(2 pi frequency t)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InjectedField {
    pub bias: f64,
    pub amplitude: f64,
    pub frequency: f64,
}

impl InjectedField {
    pub fn constant(bias: f64) -> Self {
        Self {
            bias,
            ..Self::default()
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        self.bias + self.amplitude * (2.0 * PI * self.frequency * t).sin()
    }
}

/// Everything needed to synthesize a detected transmission record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub duration: f64,
    pub sample_rate: f64,
    pub modulation: ModulationConfig,
    pub field: InjectedField,
    pub bandwidth: Option<BandwidthModel>,
    /// Standard deviation of additive white detector noise.
    pub noise_sigma: f64,
    pub seed: u64,
}

/// Samples `T(f_MW(t); f_res(B(t)))`, passes them through the slope roll-off
/// when a bandwidth model is given, then adds white noise.
pub fn synthesize_transmission(config: &SynthesisConfig, spin: &SpinParams) -> Result<TimeSeries> {
    let m = &config.modulation;
    m.validate()?;
    spin.validate()?;
    ensure(config.duration > 0.0, || "duration must be positive".into())?;
    ensure(config.noise_sigma >= 0.0, || "noise sigma must be non-negative".into())?;
    if !(config.sample_rate > 10.0 * m.modulation_frequency) {
        return Err(Error::Aliasing {
            sample_rate: config.sample_rate,
            fmod: m.modulation_frequency,
        });
    }
    let peak_field = config.field.bias.abs() + config.field.amplitude.abs();
    if peak_field >= ZEEMAN_REGIME_LIMIT {
        return Err(Error::OutOfRegime {
            field: peak_field,
            limit: ZEEMAN_REGIME_LIMIT,
        });
    }
    // Validates the regime once; per-sample shifts below are linear in B.
    let _ = resonance_frequencies(peak_field, spin)?;

    let n = (config.duration * config.sample_rate).round() as usize;
    let d = spin.zero_field_splitting;
    let per_tesla = spin.gyromagnetic_ratio * spin.field_angle.cos();
    let mut samples: Vec<f64> = (0..n)
        .map(|k| {
            let t = k as f64 / config.sample_rate;
            let shift = per_tesla * config.field.at(t);
            let res = ResonancePair {
                lower: d - shift,
                upper: d + shift,
            };
            odmr_transmission(fm_waveform(t, m), &res, spin)
        })
        .collect();

    if let Some(bw) = &config.bandwidth {
        bw.validate()?;
        let tau = 1.0 / (2.0 * PI * bw.corner_frequency);
        let mut stage = SinglePole::new(tau, config.sample_rate);
        stage.state = samples.first().copied().unwrap_or(0.0);
        for v in samples.iter_mut() {
            *v = stage.step(*v);
        }
    }

    if config.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let normal = Normal::new(0.0, config.noise_sigma)
            .map_err(|e| Error::Domain(format!("noise distribution: {e}")))?;
        for v in samples.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }

    TimeSeries::new(config.sample_rate, 0.0, samples)
}

/// Exact discretization of `tau dy/dt = x - y` for a sampled input.
#[derive(Debug, Clone, Copy)]
struct SinglePole {
    coefficient: f64,
    state: f64,
}

impl SinglePole {
    fn new(tau: f64, sample_rate: f64) -> Self {
        Self {
            coefficient: 1.0 - (-1.0 / (tau * sample_rate)).exp(),
            state: 0.0,
        }
    }

    #[inline]
    fn step(&mut self, x: f64) -> f64 {
        self.state += (x - self.state) * self.coefficient;
        self.state
    }
}

/// In-phase and quadrature lock-in outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Demodulated {
    pub in_phase: TimeSeries,
    pub quadrature: TimeSeries,
}

/// Both lock-in channels: references `2 cos(wt + phase)` and `-2 sin(wt + phase)`.
pub fn demodulate_iq(signal: &TimeSeries, fmod: f64, config: &LockinConfig) -> Result<Demodulated> {
    config.validate()?;
    ensure(fmod > 0.0, || "modulation frequency must be positive".into())?;
    let order = config.filter_order as usize;
    let fresh = SinglePole::new(config.time_constant, signal.sample_rate);
    let mut x_stages = vec![fresh; order];
    let mut y_stages = vec![fresh; order];
    let mut x_out = Vec::with_capacity(signal.len());
    let mut y_out = Vec::with_capacity(signal.len());
    for (k, &v) in signal.samples.iter().enumerate() {
        let phase = 2.0 * PI * fmod * signal.time(k) + config.reference_phase;
        let (s, c) = phase.sin_cos();
        let mut x = 2.0 * v * c;
        let mut y = -2.0 * v * s;
        for stage in x_stages.iter_mut() {
            x = stage.step(x);
        }
        for stage in y_stages.iter_mut() {
            y = stage.step(y);
        }
        x_out.push(x);
        y_out.push(y);
    }
    Ok(Demodulated {
        in_phase: TimeSeries {
            samples: x_out,
            ..*signal
        },
        quadrature: TimeSeries {
            samples: y_out,
            ..*signal
        },
    })
}

/// In-phase lock-in output `S_LI`.
pub fn demodulate(signal: &TimeSeries, fmod: f64, config: &LockinConfig) -> Result<TimeSeries> {
    if signal.duration() < 10.0 * config.time_constant {
        log::warn!(
            "record of {} s is short compared with the lock-in time constant {} s",
            signal.duration(),
            config.time_constant
        );
    }
    Ok(demodulate_iq(signal, fmod, config)?.in_phase)
}

/// Causal moving average over one modulation period, `round(fs / fmod)`
/// samples. Nulls every harmonic of `fmod` exactly when `fs / fmod` is an
/// integer; the leading samples average over what is available.
pub fn sync_filter(series: &TimeSeries, fmod: f64) -> Result<TimeSeries> {
    ensure(fmod > 0.0, || "modulation frequency must be positive".into())?;
    let exact = series.sample_rate / fmod;
    let period = exact.round().max(1.0) as usize;
    if (exact - period as f64).abs() > 1e-6 * exact {
        log::warn!("sample rate is not a whole multiple of fmod ({exact:.4} samples per cycle); harmonics leak");
    }
    let mut sum = 0.0;
    let samples = series
        .samples
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            sum += v;
            if i >= period {
                sum -= series.samples[i - period];
            }
            sum / (i + 1).min(period) as f64
        })
        .collect();
    Ok(TimeSeries { samples, ..*series })
}

/// Magnitude response of [`sync_filter`] at `f`.
pub fn sync_filter_response(f: f64, fmod: f64, sample_rate: f64) -> f64 {
    let n = (sample_rate / fmod).round().max(1.0);
    let x = PI * f / sample_rate;
    if x.sin().abs() < 1e-300 {
        return 1.0;
    }
    ((n * x).sin() / (n * x.sin())).abs()
}

/// Mean lock-in output after discarding `settle` time constants, averaged over
/// a whole number of modulation periods.
pub fn settled_output(output: &TimeSeries, fmod: f64, config: &LockinConfig, settle: f64) -> Result<f64> {
    let tail = output.tail_from(settle * config.time_constant * config.filter_order as f64);
    let per_cycle = output.sample_rate / fmod;
    let cycles = (tail.len() as f64 / per_cycle).floor();
    let n = (cycles * per_cycle).round() as usize;
    if cycles < 1.0 || n == 0 {
        return Err(Error::TooShort {
            needed: per_cycle.ceil() as usize,
            got: tail.len(),
        });
    }
    Ok(tail.samples[..n].iter().sum::<f64>() / n as f64)
}

/// Linear fit of lock-in output against detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// Output per Hz of detuning `fc - f_res`.
    pub alpha: f64,
    pub intercept: f64,
    /// Largest absolute residual as a fraction of the response range.
    pub max_residual_fraction: f64,
    /// Set when the residuals exceed 5% of the response range.
    pub nonlinear: bool,
}

/// Least-squares slope through `(detuning, response)` pairs.
pub fn slope_alpha(detunings: &[f64], responses: &[f64]) -> Result<SlopeFit> {
    ensure(detunings.len() == responses.len(), || "detuning/response length mismatch".into())?;
    ensure(detunings.len() >= 2, || "need at least two scan points".into())?;
    let n = detunings.len() as f64;
    let mx = detunings.iter().sum::<f64>() / n;
    let my = responses.iter().sum::<f64>() / n;
    let sxx: f64 = detunings.iter().map(|x| (x - mx).powi(2)).sum();
    ensure(sxx > 0.0, || "detunings must not all be equal".into())?;
    let sxy: f64 = detunings.iter().zip(responses).map(|(x, y)| (x - mx) * (y - my)).sum();
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let max_res = detunings
        .iter()
        .zip(responses)
        .map(|(x, y)| (y - (intercept + alpha * x)).abs())
        .fold(0.0, f64::max);
    let (lo, hi) = responses
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &y| (lo.min(y), hi.max(y)));
    let range = hi - lo;
    let fraction = if range > 0.0 { max_res / range } else { 0.0 };
    let nonlinear = fraction > 0.05;
    if nonlinear {
        log::warn!("discriminant is nonlinear over the scan: residuals reach {:.1}% of range", 100.0 * fraction);
    }
    Ok(SlopeFit {
        alpha,
        intercept,
        max_residual_fraction: fraction,
        nonlinear,
    })
}

/// Static operating point of a simulated lock-in magnetometer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Magnetometer {
    pub spin: SpinParams,
    pub bias_field: f64,
    pub transition: Transition,
    pub deviation: f64,
    pub modulation_frequency: f64,
    pub lockin: LockinConfig,
    pub bandwidth: Option<BandwidthModel>,
    pub sample_rate: f64,
}

impl Magnetometer {
    pub fn resonance(&self) -> Result<f64> {
        Ok(resonance_frequencies(self.bias_field, &self.spin)?.get(self.transition))
    }

    /// Lock-in configuration with the reference phase aligned to the lagging
    /// first harmonic when a roll-off is modeled.
    pub fn aligned_lockin(&self) -> LockinConfig {
        let lag = self
            .bandwidth
            .map_or(0.0, |bw| bw.phase_lag(self.modulation_frequency));
        LockinConfig {
            reference_phase: self.lockin.reference_phase - lag,
            ..self.lockin
        }
    }

    pub fn modulation(&self, center_frequency: f64) -> ModulationConfig {
        ModulationConfig {
            center_frequency,
            deviation: self.deviation,
            modulation_frequency: self.modulation_frequency,
        }
    }

    /// Synthesis settings with the microwave centered at `f_res + detuning`.
    pub fn synthesis(&self, detuning: f64, duration: f64, field: InjectedField, noise_sigma: f64, seed: u64) -> Result<SynthesisConfig> {
        Ok(SynthesisConfig {
            duration,
            sample_rate: self.sample_rate,
            modulation: self.modulation(self.resonance()? + detuning),
            field,
            bandwidth: self.bandwidth,
            noise_sigma,
            seed,
        })
    }

    /// Noise-free settled lock-in output at a static detuning.
    pub fn response_at(&self, detuning: f64, duration: f64) -> Result<f64> {
        let cfg = self.synthesis(detuning, duration, InjectedField::constant(self.bias_field), 0.0, 0)?;
        let signal = synthesize_transmission(&cfg, &self.spin)?;
        let lockin = self.aligned_lockin();
        let out = demodulate(&signal, self.modulation_frequency, &lockin)?;
        settled_output(&out, self.modulation_frequency, &lockin, 10.0)
    }

    /// Scans the center frequency across `detunings` and fits the slope.
    pub fn calibrate_slope(&self, detunings: &[f64], duration: f64) -> Result<SlopeFit> {
        let responses = detunings
            .iter()
            .map(|&d| self.response_at(d, duration))
            .collect::<Result<Vec<_>>>()?;
        slope_alpha(detunings, &responses)
    }

    /// Field change for the chosen transition, see [`reconstruct_field`].
    ///
    /// The static output expected at the operating point `detuning` is
    /// removed first. It is not zero at resonance: the other resonance adds
    /// a small odd tail to the discriminant.
    pub fn reconstruct(&self, s_li: &TimeSeries, slope: &SlopeFit, detuning: f64) -> Result<TimeSeries> {
        let operating_point = slope.intercept + slope.alpha * detuning;
        reconstruct_field(&s_li.map(|s| s - operating_point), slope.alpha, &self.spin, self.transition)
    }
}

/// `dB(t) = -2 pi S_LI(t) / (alpha gamma cos theta)` with `gamma = 2 pi *
/// gyromagnetic_ratio`. This sign holds for a resonance that moves up with
/// field.
pub fn field_from_lockin(s_li: &TimeSeries, alpha: f64, field_angle: f64, gyromagnetic_ratio: f64) -> Result<TimeSeries> {
    let scale = alpha * gyromagnetic_ratio * field_angle.cos();
    ensure(scale != 0.0 && scale.is_finite(), || {
        "alpha * gamma * cos(theta) must be non-zero".into()
    })?;
    Ok(s_li.map(|s| -s / scale))
}

/// [`field_from_lockin`] with the sign set by the transition: a lower
/// resonance moves down with field, which flips the sign.
pub fn reconstruct_field(s_li: &TimeSeries, alpha: f64, spin: &SpinParams, transition: Transition) -> Result<TimeSeries> {
    let sign = transition.projection().value();
    let field = field_from_lockin(s_li, alpha, spin.field_angle, spin.gyromagnetic_ratio)?;
    Ok(field.map(|b| sign * b))
}

/// Amplitude and phase of the component at `frequency`, by least-squares
/// projection onto `cos` and `sin` over the whole record.
pub fn tone_amplitude(series: &TimeSeries, frequency: f64) -> (f64, f64) {
    let (mut sc, mut ss, mut cc, mut s2, mut cs, mut sum_c, mut sum_s, mut sum_y) =
        (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let n = series.len() as f64;
    for (k, &y) in series.samples.iter().enumerate() {
        let (s, c) = (2.0 * PI * frequency * series.time(k)).sin_cos();
        sc += y * c;
        ss += y * s;
        cc += c * c;
        s2 += s * s;
        cs += c * s;
        sum_c += c;
        sum_s += s;
        sum_y += y;
    }
    // Solve the 3x3 normal equations for offset + a cos + b sin.
    let m = nalgebra::Matrix3::new(n, sum_c, sum_s, sum_c, cc, cs, sum_s, cs, s2);
    let rhs = nalgebra::Vector3::new(sum_y, sc, ss);
    match m.lu().solve(&rhs) {
        Some(p) => ((p[1] * p[1] + p[2] * p[2]).sqrt(), p[2].atan2(p[1])),
        None => (0.0, 0.0),
    }
}
