//! TEM00 mode geometry of a symmetric two-mirror resonator and Gaussian-beam
//! intensities.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::constants::photon_energy;
use crate::error::{ensure, Error, Result};

/// Symmetric two-mirror resonator: spacing `l`, mirror curvature `r`, and the
/// wavelength of the resonant light.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    pub mirror_spacing: f64,
    pub mirror_curvature: f64,
    pub wavelength: f64,
}

impl CavityGeometry {
    pub fn new(mirror_spacing: f64, mirror_curvature: f64, wavelength: f64) -> Result<Self> {
        let geom = Self {
            mirror_spacing,
            mirror_curvature,
            wavelength,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.wavelength > 0.0, || {
            format!("wavelength must be positive, got {}", self.wavelength)
        })?;
        let (l, r) = (self.mirror_spacing, self.mirror_curvature);
        if !(l > 0.0 && r > 0.0 && l < 2.0 * r) {
            return Err(Error::UnstableResonator {
                spacing: l,
                curvature: r,
            });
        }
        Ok(())
    }

    /// One-way Gouy phase fraction `arccos(1 - l/r) / pi` of the TEM00 mode.
    ///
    /// Multiplying by the free spectral range gives the offset of the
    /// resonance comb; it equals 1/2 for a confocal cavity (`l = r`).
    pub fn gouy_fraction(&self) -> f64 {
        (1.0 - self.mirror_spacing / self.mirror_curvature).acos() / PI
    }
}

/// Waist and Rayleigh range of the fundamental mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeGeometry {
    pub waist: f64,
    pub rayleigh_range: f64,
}

/// TEM00 waist and Rayleigh range of a symmetric resonator:
/// `z0 = sqrt(l (2r - l)) / 2` and `w0 = sqrt(lambda z0 / pi)`.
pub fn mode_geometry(geom: &CavityGeometry) -> Result<ModeGeometry> {
    geom.validate()?;
    let l = geom.mirror_spacing;
    let r = geom.mirror_curvature;
    let rayleigh_range = (l * (2.0 * r - l)).sqrt() / 2.0;
    let waist = (geom.wavelength * rayleigh_range / PI).sqrt();
    Ok(ModeGeometry {
        waist,
        rayleigh_range,
    })
}

/// On-axis peak intensity `2P / (pi w0^2)` of a Gaussian beam, W/m^2.
pub fn peak_intensity(power: f64, waist: f64) -> Result<f64> {
    ensure(waist > 0.0, || format!("waist must be positive, got {waist}"))?;
    ensure(power >= 0.0, || format!("power must be non-negative, got {power}"))?;
    Ok(2.0 * power / (PI * waist * waist))
}

/// Photon flux of monochromatic light, photons per second.
pub fn photon_rate(power: f64, wavelength: f64) -> Result<f64> {
    ensure(power >= 0.0, || format!("power must be non-negative, got {power}"))?;
    ensure(wavelength > 0.0, || {
        format!("wavelength must be positive, got {wavelength}")
    })?;
    Ok(power / photon_energy(wavelength))
}
