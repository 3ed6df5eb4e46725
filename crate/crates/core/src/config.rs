//! Experiment configuration files.
//!
//! Every dimensional field carries its SI unit in the name (`_m`, `_Hz`,
//! `_W`, `_s`, `_T`, `_rad`). Unknown fields are rejected so that a misspelt
//! unit suffix fails loudly instead of silently taking a default.

#![allow(non_snake_case)]

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::cavity::{CavityState, DiamondSample, MirrorSet};
use crate::error::{Error, Result};
use crate::gaussian_optics::CavityGeometry;
use crate::lockin_dsp::{calibrate_bandwidth, BandwidthModel, LockinConfig, Magnetometer};
use crate::magnetometry::{ResonanceShape, SensingVolume, SpinParams, Transition};
use crate::nv_model::{PumpNvParams, SaturationModel};

pub const SCHEMA_VERSION: u32 = 1;

/// Name that selects the built-in configuration instead of a file.
pub const BUILTIN_NAME: &str = "paper-defaults";

/// Directory searched for relative config names that do not exist as given.
pub const CONFIG_DIR_ENV: &str = "NVCAV_CONFIG_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub mirror_reflectivity: f64,
    pub mirror_transmissivity: f64,
    pub mirror_spacing_m: f64,
    pub mirror_curvature_m: f64,
    pub probe_wavelength_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiamondSection {
    pub thickness_m: f64,
    pub refractive_index: f64,
    pub birefringence: f64,
    pub baseline_transmission: f64,
    pub absorbance: f64,
    pub ir_cross_section_m2: f64,
    pub nv_density_per_m3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    pub cross_section_m2: f64,
    pub wavelength_m: f64,
    pub triplet_lifetime_s: f64,
    pub singlet_lifetime_s: f64,
    pub saturation_power_W: f64,
    /// Pump powers used by forward saturation runs.
    pub power_schedule_W: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeOverride {
    pub contrast: f64,
    pub fwhm_Hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinSection {
    pub zero_field_splitting_Hz: f64,
    pub gyromagnetic_ratio_Hz_per_T: f64,
    pub field_angle_rad: f64,
    pub splitting_temperature_coefficient_Hz_per_K: f64,
    pub resonance_fwhm_Hz: f64,
    pub contrast: f64,
    #[serde(default)]
    pub lower_override: Option<ShapeOverride>,
    #[serde(default)]
    pub upper_override: Option<ShapeOverride>,
    pub bias_field_T: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationSection {
    pub transition: Transition,
    /// Offset of `f_c` from the chosen resonance.
    pub center_detuning_Hz: f64,
    pub deviation_Hz: f64,
    pub modulation_frequency_Hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LockinSection {
    pub time_constant_s: f64,
    pub filter_order: u32,
    pub reference_phase_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandwidthSection {
    /// Modulation frequency at which the slope has halved; `null` disables
    /// the roll-off.
    pub factor2_frequency_Hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSection {
    pub detected_power_W: f64,
    pub sensing_width_m: f64,
    pub sensing_height_m: f64,
    pub sensing_depth_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub sample_rate_Hz: f64,
    pub duration_s: f64,
    /// Standard deviation of additive transmission noise per sample.
    pub noise_sigma: f64,
    pub injected_amplitude_T: f64,
    pub injected_frequency_Hz: f64,
    /// Lock-in output rows written per second of simulated time.
    pub output_rate_Hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub cavity: CavitySection,
    pub diamond: DiamondSection,
    pub pump: PumpSection,
    pub spin: SpinSection,
    pub modulation: ModulationSection,
    pub lockin: LockinSection,
    pub bandwidth: BandwidthSection,
    pub detection: DetectionSection,
    pub simulation: SimulationSection,
}

impl ExperimentConfig {
    /// Values reported for the 5 cm cavity, 0.2 mm diamond and the
    /// magnetometer operating point.
    pub fn paper_defaults() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 1,
            cavity: CavitySection {
                mirror_reflectivity: 0.985,
                mirror_transmissivity: 0.015,
                mirror_spacing_m: 0.05,
                mirror_curvature_m: 0.05,
                probe_wavelength_m: 1042e-9,
            },
            diamond: DiamondSection {
                thickness_m: 0.2e-3,
                refractive_index: 2.4,
                birefringence: 6.1e-5,
                baseline_transmission: 0.9965,
                absorbance: 0.022,
                ir_cross_section_m2: 3e-22,
                nv_density_per_m3: 3.6e23,
            },
            pump: PumpSection {
                cross_section_m2: 3e-21,
                wavelength_m: 532e-9,
                triplet_lifetime_s: 12e-9,
                singlet_lifetime_s: 200e-9,
                saturation_power_W: 0.88,
                power_schedule_W: (0..12).map(|i| 2.0 * i as f64 / 11.0).collect(),
            },
            spin: SpinSection {
                zero_field_splitting_Hz: 2.87e9,
                gyromagnetic_ratio_Hz_per_T: 28.0e9,
                field_angle_rad: 54.7_f64.to_radians(),
                splitting_temperature_coefficient_Hz_per_K: -74e3,
                resonance_fwhm_Hz: 9.0e6,
                contrast: 0.071,
                lower_override: None,
                upper_override: None,
                bias_field_T: 2.99e-3,
            },
            modulation: ModulationSection {
                transition: Transition::Lower,
                center_detuning_Hz: 0.0,
                deviation_Hz: 4.5e6,
                modulation_frequency_Hz: 15.8e3,
            },
            lockin: LockinSection {
                time_constant_s: 320e-6,
                filter_order: 1,
                reference_phase_rad: 0.0,
            },
            bandwidth: BandwidthSection {
                factor2_frequency_Hz: Some(13.5e3),
            },
            detection: DetectionSection {
                detected_power_W: 2.3e-3,
                sensing_width_m: 90e-6,
                sensing_height_m: 90e-6,
                sensing_depth_m: 200e-6,
            },
            simulation: SimulationSection {
                // 64 samples per modulation cycle.
                sample_rate_Hz: 64.0 * 15.8e3,
                duration_s: 0.1,
                noise_sigma: 0.0,
                injected_amplitude_T: 100e-9,
                injected_frequency_Hz: 100.0,
                // Four lock-in samples per modulation cycle.
                output_rate_Hz: 15.8e3 / 4.0,
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Loads `name`: the built-in name, an existing path, or a file inside
    /// `$NVCAV_CONFIG_DIR`.
    pub fn load(name: &str) -> Result<Self> {
        if name == BUILTIN_NAME {
            return Ok(Self::paper_defaults());
        }
        let path = resolve_path(name, std::env::var_os(CONFIG_DIR_ENV).map(PathBuf::from).as_deref())?;
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks the schema version and every nested physical invariant.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let wrap = |e: Error| Error::Config(e.to_string());
        self.geometry().and_then(|g| g.validate()).map_err(wrap)?;
        self.mirrors().map_err(wrap)?;
        self.diamond().validate().map_err(wrap)?;
        self.pump_params().validate().map_err(wrap)?;
        self.saturation_model().validate().map_err(wrap)?;
        self.spin_params().validate().map_err(wrap)?;
        self.lockin_config().validate().map_err(wrap)?;
        self.bandwidth_model().map_err(wrap)?;
        let d = &self.detection;
        let s = &self.simulation;
        let m = &self.modulation;
        let positive = [
            ("detected_power_W", d.detected_power_W),
            ("sensing_width_m", d.sensing_width_m),
            ("sensing_height_m", d.sensing_height_m),
            ("sensing_depth_m", d.sensing_depth_m),
            ("sample_rate_Hz", s.sample_rate_Hz),
            ("duration_s", s.duration_s),
            ("output_rate_Hz", s.output_rate_Hz),
            ("modulation_frequency_Hz", m.modulation_frequency_Hz),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(s.noise_sigma >= 0.0) || !s.injected_frequency_Hz.is_finite() || s.injected_frequency_Hz < 0.0 {
            return Err(Error::Config("noise_sigma and injected_frequency_Hz must be non-negative".into()));
        }
        if self.diamond.thickness_m >= self.cavity.mirror_spacing_m {
            return Err(Error::Config("diamond must fit between the mirrors".into()));
        }
        if self.pump.power_schedule_W.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::Config("pump powers must be non-negative".into()));
        }
        if !m.deviation_Hz.is_finite() || !m.center_detuning_Hz.is_finite() || !self.spin.bias_field_T.is_finite() {
            return Err(Error::Config("modulation and field values must be finite".into()));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<CavityGeometry> {
        CavityGeometry::new(
            self.cavity.mirror_spacing_m,
            self.cavity.mirror_curvature_m,
            self.cavity.probe_wavelength_m,
        )
    }

    pub fn mirrors(&self) -> Result<MirrorSet> {
        MirrorSet::new(self.cavity.mirror_reflectivity, self.cavity.mirror_transmissivity)
    }

    pub fn diamond(&self) -> DiamondSample {
        let d = &self.diamond;
        DiamondSample {
            thickness: d.thickness_m,
            refractive_index: d.refractive_index,
            birefringence: d.birefringence,
            baseline_transmission: d.baseline_transmission,
            absorbance: d.absorbance,
            ir_cross_section: d.ir_cross_section_m2,
            nv_density: d.nv_density_per_m3,
        }
    }

    /// Cavity without the diamond, Gouy offset included.
    pub fn empty_cavity(&self) -> Result<CavityState> {
        let state = CavityState::empty(self.mirrors()?, self.cavity.mirror_spacing_m)
            .with_gouy_from_curvature(self.cavity.mirror_curvature_m);
        state.validate()?;
        Ok(state)
    }

    /// Cavity with the diamond inserted; the air gap shrinks by its thickness.
    pub fn loaded_cavity(&self) -> Result<CavityState> {
        let diamond = self.diamond();
        let mut state = CavityState::empty(self.mirrors()?, self.cavity.mirror_spacing_m - diamond.thickness)
            .with_gouy_from_curvature(self.cavity.mirror_curvature_m);
        state.intracavity_transmission = diamond.baseline_transmission;
        state.diamond = Some(diamond);
        state.validate()?;
        Ok(state)
    }

    pub fn pump_params(&self) -> PumpNvParams {
        PumpNvParams {
            pump_cross_section: self.pump.cross_section_m2,
            pump_wavelength: self.pump.wavelength_m,
            triplet_decay_rate: 1.0 / self.pump.triplet_lifetime_s,
            singlet_decay_rate: 1.0 / self.pump.singlet_lifetime_s,
        }
    }

    pub fn saturation_model(&self) -> SaturationModel {
        SaturationModel {
            absorbance: self.diamond.absorbance,
            saturation_power: self.pump.saturation_power_W,
            baseline_transmission: self.diamond.baseline_transmission,
        }
    }

    pub fn spin_params(&self) -> SpinParams {
        let s = &self.spin;
        let shape = |o: &ShapeOverride| ResonanceShape {
            contrast: o.contrast,
            fwhm: o.fwhm_Hz,
        };
        SpinParams {
            zero_field_splitting: s.zero_field_splitting_Hz,
            gyromagnetic_ratio: s.gyromagnetic_ratio_Hz_per_T,
            field_angle: s.field_angle_rad,
            splitting_temperature_coefficient: s.splitting_temperature_coefficient_Hz_per_K,
            resonance_fwhm: s.resonance_fwhm_Hz,
            contrast: s.contrast,
            lower_override: s.lower_override.as_ref().map(shape),
            upper_override: s.upper_override.as_ref().map(shape),
        }
    }

    pub fn lockin_config(&self) -> LockinConfig {
        LockinConfig {
            time_constant: self.lockin.time_constant_s,
            filter_order: self.lockin.filter_order,
            reference_phase: self.lockin.reference_phase_rad,
        }
    }

    pub fn bandwidth_model(&self) -> Result<Option<BandwidthModel>> {
        self.bandwidth.factor2_frequency_Hz.map(calibrate_bandwidth).transpose()
    }

    pub fn sensing_volume(&self) -> SensingVolume {
        SensingVolume {
            width: self.detection.sensing_width_m,
            height: self.detection.sensing_height_m,
            depth: self.detection.sensing_depth_m,
        }
    }

    pub fn magnetometer(&self) -> Result<Magnetometer> {
        Ok(Magnetometer {
            spin: self.spin_params(),
            bias_field: self.spin.bias_field_T,
            transition: self.modulation.transition,
            deviation: self.modulation.deviation_Hz,
            modulation_frequency: self.modulation.modulation_frequency_Hz,
            lockin: self.lockin_config(),
            bandwidth: self.bandwidth_model()?,
            sample_rate: self.simulation.sample_rate_Hz,
        })
    }
}

fn resolve_path(name: &str, config_dir: Option<&Path>) -> Result<PathBuf> {
    let direct = PathBuf::from(name);
    if direct.is_file() {
        return Ok(direct);
    }
    if direct.is_relative() {
        if let Some(dir) = config_dir {
            for candidate in [dir.join(name), dir.join(format!("{name}.json"))] {
                if candidate.is_file() {
                    return Ok(candidate);
                }
            }
        }
    }
    Err(Error::Config(format!("config {name} not found")))
}
