//! End-to-end commands behind the `nvcav` binary.
//!
//! Each command reads an [`ExperimentConfig`], writes its data files into an
//! output directory and returns the paths it wrote. Nothing is printed; the
//! output depends only on the config, the options and the seed.

#![allow(non_snake_case)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use std::path::{Path, PathBuf};

use crate::cavity::{finesse, resonance_fwhm, CavityState, Polarization};
use crate::config::ExperimentConfig;
use crate::constants::SPEED_OF_LIGHT;
use crate::error::{Error, Result};
use crate::fitting::{fit_lorentzian, fit_saturation_weighted, FitWarning};
use crate::gaussian_optics::{mode_geometry, peak_intensity};
use crate::io::{self, TimeSeriesHeader};
use crate::lockin_dsp::{
    demodulate, sync_filter, sync_filter_response, synthesize_transmission, tone_amplitude, InjectedField, TimeSeries,
};
use crate::magnetometry::{
    odmr_spectrum, projection_noise_sensitivity, resonance_frequencies, shot_noise_sensitivity,
    temperature_cross_sensitivity,
};
use crate::nv_model::{density_to_ppm, nv_density, transmission_vs_pump};
use crate::plot::plot_csv;
use crate::spectral::{noise_floor, psd_welch, rms_in_band, Window, WelchOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Where and how a command writes its files.
#[derive(Debug, Clone)]
pub struct Output {
    pub dir: PathBuf,
    pub format: Format,
    /// Also draw an SVG next to every CSV table.
    pub plot: bool,
}

impl Output {
    pub fn csv(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            format: Format::Csv,
            plot: false,
        }
    }

    fn prepare(&self) -> Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        Ok(())
    }

    /// Writes a two-column table as CSV or as a JSON object of arrays.
    fn table(&self, stem: &str, headers: [&str; 2], columns: [&[f64]; 2], log_y: bool) -> Result<Vec<PathBuf>> {
        match self.format {
            Format::Csv => {
                let path = self.dir.join(format!("{stem}.csv"));
                io::write_columns(&path, &headers, &columns)?;
                let mut written = vec![path.clone()];
                if self.plot {
                    let svg = self.dir.join(format!("{stem}.svg"));
                    plot_csv(&path, headers[0], headers[1], &svg, log_y)?;
                    written.push(svg);
                }
                Ok(written)
            }
            Format::Json => {
                let path = self.dir.join(format!("{stem}.json"));
                let mut map = serde_json::Map::new();
                for (h, c) in headers.iter().zip(columns) {
                    map.insert(h.to_string(), serde_json::to_value(c)?);
                }
                io::write_json(&path, &map)?;
                Ok(vec![path])
            }
        }
    }

    fn report<T: Serialize>(&self, stem: &str, value: &T) -> Result<PathBuf> {
        let path = self.dir.join(format!("{stem}.json"));
        io::write_json(&path, value)?;
        Ok(path)
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    let step = (stop - start) / (points - 1) as f64;
    (0..points).map(|i| start + step * i as f64).collect()
}

fn check_range(start: f64, stop: f64, points: usize) -> Result<()> {
    if !(start.is_finite() && stop.is_finite() && stop > start) {
        return Err(usage(format!("empty scan range [{start}, {stop}]")));
    }
    if points < 2 {
        return Err(usage("a scan needs at least two points"));
    }
    Ok(())
}

/// Indices of local maxima that reach `fraction` of the global maximum.
fn peaks_above(y: &[f64], fraction: f64) -> Vec<usize> {
    let max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] >= fraction * max && y[i] > y[i - 1] && y[i] >= y[i + 1])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trace {
    /// No diamond in the cavity.
    Empty,
    /// Diamond inserted, polarization along a birefringence axis.
    Diamond,
    /// Diamond inserted, input polarized at 45 degrees: both axes resonate.
    Birefringent,
}

impl std::str::FromStr for Trace {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "empty" => Ok(Trace::Empty),
            "diamond" => Ok(Trace::Diamond),
            "birefringent" => Ok(Trace::Birefringent),
            other => Err(usage(format!("unknown trace '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CavityScanOptions {
    pub trace: Trace,
    /// Scan limits as offsets from the H resonance nearest `c / lambda`.
    pub start_Hz: f64,
    pub stop_Hz: f64,
    pub points: usize,
}

impl Default for CavityScanOptions {
    fn default() -> Self {
        Self {
            trace: Trace::Diamond,
            start_Hz: -0.5e9,
            stop_Hz: 3.5e9,
            points: 8001,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CavityScanReport {
    pub trace: Trace,
    pub reference_frequency_Hz: f64,
    pub free_spectral_range_Hz: f64,
    pub finesse: f64,
    pub resonance_fwhm_Hz: f64,
    pub peak_transmission: f64,
    /// Offsets of transmission maxima above half the highest peak.
    pub peaks_Hz: Vec<f64>,
    pub waist_m: f64,
    pub rayleigh_range_m: f64,
}

/// Transmitted intensity versus laser frequency.
pub fn cmd_cavity_scan(cfg: &ExperimentConfig, opts: &CavityScanOptions, out: &Output) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    check_range(opts.start_Hz, opts.stop_Hz, opts.points)?;
    let state: CavityState = match opts.trace {
        Trace::Empty => cfg.empty_cavity()?,
        Trace::Diamond | Trace::Birefringent => cfg.loaded_cavity()?,
    };
    let fsr = state.free_spectral_range(Polarization::H);
    let optical = SPEED_OF_LIGHT / cfg.cavity.probe_wavelength_m;
    let order = ((optical - state.gouy_offset) / fsr).round();
    let reference = state.gouy_offset + order * fsr;

    let offsets = linspace(opts.start_Hz, opts.stop_Hz, opts.points);
    let t: Vec<f64> = offsets
        .iter()
        .map(|&df| {
            let nu = reference + df;
            match opts.trace {
                Trace::Birefringent => state.transmission_diagonal(nu),
                _ => state.transmission_at(nu, Polarization::H),
            }
        })
        .collect();

    out.prepare()?;
    let stem = format!("cavity_scan_{}", serde_json::to_value(opts.trace)?.as_str().unwrap_or("trace"));
    let mut written = out.table(&stem, io::SCAN_COLUMNS, [&offsets, &t], false)?;
    let f = finesse(state.mirrors.reflectivity, state.intracavity_transmission)?;
    let mode = mode_geometry(&cfg.geometry()?)?;
    let report = CavityScanReport {
        trace: opts.trace,
        reference_frequency_Hz: reference,
        free_spectral_range_Hz: fsr,
        finesse: f,
        resonance_fwhm_Hz: resonance_fwhm(fsr, f)?,
        peak_transmission: t.iter().cloned().fold(0.0, f64::max),
        peaks_Hz: peaks_above(&t, 0.5).into_iter().map(|i| offsets[i]).collect(),
        waist_m: mode.waist,
        rayleigh_range_m: mode.rayleigh_range,
    };
    written.push(out.report(&format!("{stem}_report"), &report)?);
    Ok(written)
}

#[derive(Debug, Clone, Default)]
pub struct SaturationOptions {
    /// Measured curve to fit, optionally with a `sigma` column of per-point
    /// standard deviations. Without it the forward model is evaluated.
    pub input: Option<PathBuf>,
    /// Overrides the config power schedule in forward mode.
    pub powers: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SaturationFitReport {
    pub A0: f64,
    pub A0_uncertainty: f64,
    pub Psat_W: f64,
    pub Psat_uncertainty_W: f64,
    pub nv_density_per_m3: f64,
    pub nv_density_ppm: f64,
    pub saturation_peak_intensity_W_per_m2: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residual_norm: f64,
    pub warnings: Vec<FitWarning>,
    pub uncertainty_note: &'static str,
}

const STATISTICAL_ONLY: &str = "statistical only; systematic errors are not included";

/// Forward pump-saturation curve, or a fit of `A0` and `Psat` to measured data.
pub fn cmd_saturation(cfg: &ExperimentConfig, opts: &SaturationOptions, out: &Output) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let mirrors = cfg.mirrors()?;
    match &opts.input {
        None => {
            let powers = opts.powers.clone().unwrap_or_else(|| cfg.pump.power_schedule_W.clone());
            if powers.is_empty() || powers.iter().any(|p| !(*p >= 0.0)) {
                return Err(usage("pump powers must be a non-empty list of non-negative values"));
            }
            let model = cfg.saturation_model();
            let t: Vec<f64> = powers.iter().map(|&p| transmission_vs_pump(p, &model, &mirrors)).collect();
            out.prepare()?;
            out.table("saturation_curve", io::SATURATION_COLUMNS, [&powers, &t], false)
        }
        Some(path) => {
            let (p, t) = io::read_saturation(path)?;
            let sigma = io::read_optional_column(path, "sigma")?;
            let fit = fit_saturation_weighted(&p, &t, sigma.as_deref(), &mirrors, cfg.diamond.baseline_transmission)?;
            let a0 = fit.parameters[0];
            let psat = fit.parameters[1];
            let density = nv_density(a0, cfg.diamond.ir_cross_section_m2, cfg.diamond.thickness_m)?;
            let waist = mode_geometry(&cfg.geometry()?)?.waist;
            let report = SaturationFitReport {
                A0: a0,
                A0_uncertainty: fit.uncertainties[0],
                Psat_W: psat,
                Psat_uncertainty_W: fit.uncertainties[1],
                nv_density_per_m3: density,
                nv_density_ppm: density_to_ppm(density),
                saturation_peak_intensity_W_per_m2: peak_intensity(psat, waist)?,
                converged: fit.converged,
                iterations: fit.iterations,
                residual_norm: fit.residual_norm,
                warnings: fit.warnings,
                uncertainty_note: STATISTICAL_ONLY,
            };
            out.prepare()?;
            Ok(vec![out.report("saturation_fit", &report)?])
        }
    }
}

/// Saturation data at the config power schedule with relative Gaussian
/// noise: each point is scaled by `1 + noise_sigma * N(0, 1)`.
pub fn synthetic_saturation(cfg: &ExperimentConfig, noise_sigma: f64, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mirrors = cfg.mirrors()?;
    let model = cfg.saturation_model();
    let normal = Normal::new(0.0, noise_sigma).map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let powers = cfg.pump.power_schedule_W.clone();
    let t = powers
        .iter()
        .map(|&p| transmission_vs_pump(p, &model, &mirrors) * (1.0 + normal.sample(&mut rng)))
        .collect();
    Ok((powers, t))
}

/// White Gaussian noise with standard deviation `sigma`.
pub fn synthetic_white_noise(sigma: f64, sample_rate: f64, duration: f64, seed: u64) -> Result<TimeSeries> {
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (duration * sample_rate).round() as usize;
    TimeSeries::new(sample_rate, 0.0, (0..n).map(|_| normal.sample(&mut rng)).collect())
}

#[derive(Debug, Clone)]
pub struct OdmrOptions {
    /// Defaults to the config bias field.
    pub field_T: Option<f64>,
    pub start_Hz: f64,
    pub stop_Hz: f64,
    pub points: usize,
}

impl Default for OdmrOptions {
    fn default() -> Self {
        Self {
            field_T: None,
            start_Hz: 2.77e9,
            stop_Hz: 2.97e9,
            points: 2001,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OdmrReport {
    pub field_T: f64,
    pub lower_resonance_Hz: f64,
    pub upper_resonance_Hz: f64,
    /// Dip centers from a two-Lorentzian fit to the written spectrum.
    pub fitted_centers_Hz: Vec<f64>,
    pub fitted_fwhm_Hz: Vec<f64>,
}

/// Normalized cavity transmission versus microwave frequency.
pub fn cmd_odmr(cfg: &ExperimentConfig, opts: &OdmrOptions, out: &Output) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    check_range(opts.start_Hz, opts.stop_Hz, opts.points)?;
    let spin = cfg.spin_params();
    let field = opts.field_T.unwrap_or(cfg.spin.bias_field_T);
    let grid = linspace(opts.start_Hz, opts.stop_Hz, opts.points);
    let spectrum = odmr_spectrum(&grid, field, &spin)?;
    let res = resonance_frequencies(field, &spin)?;

    out.prepare()?;
    let mut written = out.table(
        "odmr",
        io::ODMR_COLUMNS,
        [&spectrum.microwave_frequencies, &spectrum.normalized_transmission],
        false,
    )?;
    let mut centers = Vec::new();
    let mut widths = Vec::new();
    if let Ok(fit) = fit_lorentzian(&grid, &spectrum.normalized_transmission, 2, None) {
        let mut peaks = fit.peaks;
        peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
        centers = peaks.iter().map(|p| p.center).collect();
        widths = peaks.iter().map(|p| p.fwhm).collect();
    }
    let report = OdmrReport {
        field_T: field,
        lower_resonance_Hz: res.lower,
        upper_resonance_Hz: res.upper,
        fitted_centers_Hz: centers,
        fitted_fwhm_Hz: widths,
    };
    written.push(out.report("odmr_report", &report)?);
    Ok(written)
}

#[derive(Debug, Clone, Default)]
pub struct LockinSimOptions {
    pub amplitude_T: Option<f64>,
    pub frequency_Hz: Option<f64>,
    pub duration_s: Option<f64>,
    pub noise_sigma: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LockinSimReport {
    pub resonance_Hz: f64,
    pub center_frequency_Hz: f64,
    /// Lock-in output per Hz of center-frequency detuning.
    pub alpha_per_Hz: f64,
    pub slope_nonlinear: bool,
    pub injected_amplitude_T: f64,
    pub injected_frequency_Hz: f64,
    /// Tone amplitude of the reconstructed field after settling, divided by
    /// the output filter response at the tone frequency.
    pub recovered_amplitude_T: Option<f64>,
    pub mean_field_T: f64,
    pub settle_time_s: f64,
    pub seed: u64,
}

/// Detunings used to calibrate the discriminant slope: within a twentieth
/// of a linewidth of resonance. Wider scans pick up the cubic term and
/// underestimate the slope at the operating point.
pub fn calibration_detunings(fwhm: f64) -> [f64; 5] {
    let q = 0.05 * fwhm;
    [-q, -0.5 * q, 0.0, 0.5 * q, q]
}

/// Record length for each calibration point.
pub const CALIBRATION_DURATION_S: f64 = 0.02;

/// Full-rate products of one lock-in simulation.
#[derive(Debug, Clone)]
pub struct LockinRun {
    /// Lock-in output after the synchronous filter.
    pub lockin_signal: TimeSeries,
    /// Reconstructed field change.
    pub field: TimeSeries,
    pub report: LockinSimReport,
}

/// Synthesizes a modulated transmission record with an injected field,
/// demodulates it and converts the lock-in output to a field change.
pub fn simulate_lockin(cfg: &ExperimentConfig, opts: &LockinSimOptions) -> Result<LockinRun> {
    cfg.validate()?;
    let sim = &cfg.simulation;
    let amplitude = opts.amplitude_T.unwrap_or(sim.injected_amplitude_T);
    let frequency = opts.frequency_Hz.unwrap_or(sim.injected_frequency_Hz);
    let duration = opts.duration_s.unwrap_or(sim.duration_s);
    let noise = opts.noise_sigma.unwrap_or(sim.noise_sigma);
    if !(duration > 0.0) || !(noise >= 0.0) || !(frequency >= 0.0) || !amplitude.is_finite() {
        return Err(usage("duration must be positive; noise and tone frequency non-negative"));
    }

    let mag = cfg.magnetometer()?;
    let fwhm = mag.spin.shape(mag.transition).fwhm;
    let slope = mag.calibrate_slope(&calibration_detunings(fwhm), CALIBRATION_DURATION_S)?;
    let field = InjectedField {
        bias: mag.bias_field,
        amplitude,
        frequency,
    };
    let synth = mag.synthesis(cfg.modulation.center_detuning_Hz, duration, field, noise, cfg.seed)?;
    let signal = synthesize_transmission(&synth, &mag.spin)?;
    let lockin = mag.aligned_lockin();
    let s_li = sync_filter(&demodulate(&signal, mag.modulation_frequency, &lockin)?, mag.modulation_frequency)?;
    let delta_b = mag.reconstruct(&s_li, &slope, cfg.modulation.center_detuning_Hz)?;

    let settle = 10.0 * lockin.time_constant * lockin.filter_order as f64;
    let settled = delta_b.tail_from(settle);
    let recovered = if frequency > 0.0 && amplitude != 0.0 {
        let period_samples = settled.sample_rate / frequency;
        let periods = (settled.len() as f64 / period_samples).floor();
        if periods >= 1.0 {
            let n = (periods * period_samples).round() as usize;
            let whole = TimeSeries::new(settled.sample_rate, settled.start_time, settled.samples[..n].to_vec())?;
            let gain = lockin.response(frequency) * sync_filter_response(frequency, mag.modulation_frequency, mag.sample_rate);
            Some(tone_amplitude(&whole, frequency).0 / gain)
        } else {
            None
        }
    } else {
        None
    };

    let report = LockinSimReport {
        resonance_Hz: mag.resonance()?,
        center_frequency_Hz: synth.modulation.center_frequency,
        alpha_per_Hz: slope.alpha,
        slope_nonlinear: slope.nonlinear,
        injected_amplitude_T: amplitude,
        injected_frequency_Hz: frequency,
        recovered_amplitude_T: recovered,
        mean_field_T: settled.mean(),
        settle_time_s: settle,
        seed: cfg.seed,
    };
    Ok(LockinRun {
        lockin_signal: s_li,
        field: delta_b,
        report,
    })
}

/// [`simulate_lockin`], writing `S_LI` and the reconstructed field at the
/// configured output rate plus a JSON report.
pub fn cmd_lockin_sim(cfg: &ExperimentConfig, opts: &LockinSimOptions, out: &Output) -> Result<Vec<PathBuf>> {
    let run = simulate_lockin(cfg, opts)?;
    let rate = run.field.sample_rate;
    let factor = ((rate / cfg.simulation.output_rate_Hz).round() as usize).max(1);
    let header = TimeSeriesHeader {
        sample_rate_Hz: rate / factor as f64,
        seed: Some(cfg.seed),
        config: Some(serde_json::to_value(cfg)?),
    };
    out.prepare()?;
    let li_path = out.dir.join("lockin_signal.csv");
    let b_path = out.dir.join("field.csv");
    io::write_time_series(&li_path, &run.lockin_signal.decimate(factor), &header)?;
    io::write_time_series(&b_path, &run.field.decimate(factor), &header)?;
    let mut written = vec![li_path.clone(), io::sidecar_path(&li_path), b_path.clone(), io::sidecar_path(&b_path)];
    if out.plot {
        for p in [&li_path, &b_path] {
            let svg = p.with_extension("svg");
            plot_csv(p, "time_s", "value", &svg, false)?;
            written.push(svg);
        }
    }
    written.push(out.report("lockin_report", &run.report)?);
    Ok(written)
}

#[derive(Debug, Clone)]
pub struct PsdOptions {
    pub input: PathBuf,
    /// Defaults to 2/9 of the record (8 half-overlapping segments).
    pub segment_length: Option<usize>,
    pub overlap: f64,
    pub window: Window,
    pub band_lo_Hz: f64,
    pub band_hi_Hz: f64,
}

impl PsdOptions {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            segment_length: None,
            overlap: 0.5,
            window: Window::Hann,
            band_lo_Hz: 10.0,
            band_hi_Hz: 500.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PsdReport {
    pub sample_rate_Hz: f64,
    pub segment_length: usize,
    pub resolution_Hz: f64,
    pub band_Hz: [f64; 2],
    /// Median amplitude spectral density over the band, units/sqrt(Hz).
    pub noise_floor: f64,
    pub rms_in_band: f64,
}

/// Welch amplitude spectral density of a time-series CSV plus a noise-floor
/// report over a band.
pub fn cmd_psd(opts: &PsdOptions, out: &Output) -> Result<Vec<PathBuf>> {
    let (series, _) = io::read_time_series(&opts.input)?;
    let mut welch = WelchOptions::for_length(series.len());
    if let Some(n) = opts.segment_length {
        welch.segment_length = n;
    }
    welch.overlap = opts.overlap;
    welch.window = opts.window;
    let spectrum = psd_welch(&series, &welch)?;
    let floor = noise_floor(&spectrum, opts.band_lo_Hz, opts.band_hi_Hz)?;
    let rms = rms_in_band(&spectrum, opts.band_lo_Hz, opts.band_hi_Hz)?;

    out.prepare()?;
    let mut written = out.table(
        "spectrum",
        io::SPECTRUM_COLUMNS,
        [&spectrum.frequencies, &spectrum.amplitude_spectral_density],
        true,
    )?;
    let report = PsdReport {
        sample_rate_Hz: series.sample_rate,
        segment_length: welch.segment_length,
        resolution_Hz: spectrum.resolution(),
        band_Hz: [opts.band_lo_Hz, opts.band_hi_Hz],
        noise_floor: floor,
        rms_in_band: rms,
    };
    written.push(out.report("noise_floor", &report)?);
    Ok(written)
}

#[derive(Debug, Clone, Serialize)]
pub struct SensitivityReport {
    pub shot_noise_T_per_rtHz: f64,
    pub projection_noise_T_per_rtHz: f64,
    pub temperature_K_per_uT: f64,
    /// Modulation frequency at which the discriminant slope halves.
    pub bandwidth_Hz: Option<f64>,
    /// Equivalent noise bandwidth of the lock-in output filter.
    pub lockin_bandwidth_Hz: f64,
    pub spin_count: f64,
    pub detected_power_W: f64,
}

/// Shot-noise and projection-noise limits, temperature cross-talk and
/// bandwidth for the configured operating point.
pub fn sensitivity_report(cfg: &ExperimentConfig) -> Result<SensitivityReport> {
    cfg.validate()?;
    let spin = cfg.spin_params();
    let shape = spin.shape(cfg.modulation.transition);
    let spins = cfg.sensing_volume().spin_count(cfg.diamond.nv_density_per_m3);
    Ok(SensitivityReport {
        shot_noise_T_per_rtHz: shot_noise_sensitivity(
            shape.fwhm,
            shape.contrast,
            cfg.detection.detected_power_W,
            cfg.cavity.probe_wavelength_m,
            spin.field_angle,
            spin.gyromagnetic_ratio,
        )?,
        projection_noise_T_per_rtHz: projection_noise_sensitivity(spins, shape.fwhm, spin.gyromagnetic_ratio)?,
        temperature_K_per_uT: temperature_cross_sensitivity(&spin)? * 1e-6,
        bandwidth_Hz: cfg.bandwidth.factor2_frequency_Hz,
        lockin_bandwidth_Hz: cfg.lockin_config().bandwidth(),
        spin_count: spins,
        detected_power_W: cfg.detection.detected_power_W,
    })
}

pub fn cmd_sensitivity(cfg: &ExperimentConfig, out: &Output) -> Result<Vec<PathBuf>> {
    let report = sensitivity_report(cfg)?;
    out.prepare()?;
    Ok(vec![out.report("sensitivity", &report)?])
}

/// Writes the bundled fixtures: a noisy saturation curve and a white-noise
/// time series.
pub fn cmd_fixtures(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    std::fs::create_dir_all(dir)?;
    let (p, t) = synthetic_saturation(cfg, SATURATION_NOISE, cfg.seed)?;
    let sat = dir.join("saturation_synthetic.csv");
    let sigma: Vec<f64> = t.iter().map(|v| SATURATION_NOISE * v).collect();
    io::write_columns(&sat, &[io::SATURATION_COLUMNS[0], io::SATURATION_COLUMNS[1], "sigma"], &[&p, &t, &sigma])?;
    let noise = synthetic_white_noise(WHITE_NOISE_SIGMA, 10e3, 4.0, cfg.seed)?;
    let wn = dir.join("white_noise.csv");
    io::write_time_series(
        &wn,
        &noise,
        &TimeSeriesHeader {
            sample_rate_Hz: noise.sample_rate,
            seed: Some(cfg.seed),
            config: Some(serde_json::json!({ "sigma": WHITE_NOISE_SIGMA })),
        },
    )?;
    Ok(vec![sat, wn.clone(), io::sidecar_path(&wn)])
}

/// Relative noise of the bundled saturation fixture.
pub const SATURATION_NOISE: f64 = 0.01;

/// Standard deviation of the bundled white-noise fixture.
pub const WHITE_NOISE_SIGMA: f64 = 1e-9;
