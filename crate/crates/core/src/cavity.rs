//! Two-mirror Fabry-Perot cavity with an intracavity absorber.
//!
//! The cavity is described by identical mirrors (intensity reflectivity `R`,
//! transmissivity `T`) and a lumped single-pass intensity transmission `L` of
//! everything inside it. The transmitted intensity for single-pass phase `phi`
//! is the Airy function
//!
//! ```text
//! I/I0 = T^2 L / ((1 - R L)^2 + 4 R L sin^2 phi)
//! ```
//!
//! A birefringent diamond is handled as two independent scalar cavities, one
//! per linear polarization (index `n` for H, `n + dn` for V).

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::RangeInclusive;

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{domain, ensure, Error, Result};

/// Identical cavity mirrors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorSet {
    pub reflectivity: f64,
    pub transmissivity: f64,
}

impl MirrorSet {
    /// Lossless mirrors, `T = 1 - R`.
    pub fn lossless(reflectivity: f64) -> Result<Self> {
        Self::new(reflectivity, 1.0 - reflectivity)
    }

    pub fn new(reflectivity: f64, transmissivity: f64) -> Result<Self> {
        let m = Self {
            reflectivity,
            transmissivity,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let (r, t) = (self.reflectivity, self.transmissivity);
        ensure(r > 0.0 && r < 1.0, || format!("reflectivity must lie in (0, 1), got {r}"))?;
        ensure(t > 0.0 && t <= 1.0 - r + 1e-12, || {
            format!("transmissivity must lie in (0, 1 - R], got {t}")
        })
    }
}

/// Diamond plate placed inside the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiamondSample {
    pub thickness: f64,
    pub refractive_index: f64,
    /// `n_V - n_H`.
    pub birefringence: f64,
    /// Single-pass intensity transmission with no pump light (`L0`). Residual
    /// reflections of the AR coating are folded in here.
    pub baseline_transmission: f64,
    /// Saturated single-pass absorbance amplitude (`A0`).
    pub absorbance: f64,
    /// 1042 nm singlet absorption cross-section, m^2.
    pub ir_cross_section: f64,
    /// NV number density, m^-3.
    pub nv_density: f64,
}

impl DiamondSample {
    pub fn validate(&self) -> Result<()> {
        ensure(self.thickness > 0.0, || "diamond thickness must be positive".into())?;
        ensure(self.refractive_index > 1.0, || "refractive index must exceed 1".into())?;
        ensure(
            self.baseline_transmission > 0.0 && self.baseline_transmission <= 1.0,
            || "baseline transmission must lie in (0, 1]".into(),
        )?;
        ensure(
            self.absorbance >= 0.0 && self.absorbance < self.baseline_transmission,
            || "absorbance must lie in [0, L0)".into(),
        )?;
        ensure(self.ir_cross_section >= 0.0, || "IR cross-section must be non-negative".into())?;
        ensure(self.nv_density >= 0.0, || "NV density must be non-negative".into())?;
        if self.birefringence.abs() > 0.01 * self.refractive_index {
            log::warn!(
                "birefringence {} is not small compared with n = {}",
                self.birefringence,
                self.refractive_index
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

/// Operating state of the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityState {
    pub mirrors: MirrorSet,
    /// Single-pass intensity transmission `L` of the cavity contents.
    pub intracavity_transmission: f64,
    /// Air path between the mirrors (excluding the diamond), m.
    pub air_gap: f64,
    pub diamond: Option<DiamondSample>,
    /// Offset of the resonance comb from `m * FSR`, Hz.
    pub gouy_offset: f64,
}

impl CavityState {
    /// Empty cavity with lossless intracavity path.
    pub fn empty(mirrors: MirrorSet, length: f64) -> Self {
        Self {
            mirrors,
            intracavity_transmission: 1.0,
            air_gap: length,
            diamond: None,
            gouy_offset: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mirrors.validate()?;
        let l = self.intracavity_transmission;
        ensure(l > 0.0 && l <= 1.0, || {
            format!("intracavity transmission must lie in (0, 1], got {l}")
        })?;
        ensure(self.air_gap > 0.0, || "air gap must be positive".into())?;
        if let Some(d) = &self.diamond {
            d.validate()?;
        }
        Ok(())
    }

    /// Refractive index seen by the given polarization (1 for an empty cavity).
    fn index(&self, pol: Polarization) -> (f64, f64) {
        match (&self.diamond, pol) {
            (None, _) => (1.0, 0.0),
            (Some(d), Polarization::H) => (d.refractive_index, d.thickness),
            (Some(d), Polarization::V) => (d.refractive_index + d.birefringence, d.thickness),
        }
    }

    /// `l + n d` for the given polarization.
    pub fn optical_path_length(&self, pol: Polarization) -> f64 {
        let (n, d) = self.index(pol);
        self.air_gap + n * d
    }

    pub fn free_spectral_range(&self, pol: Polarization) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.optical_path_length(pol))
    }

    /// Sets the comb offset to `FSR * arccos(1 - l/r) / pi` for mirrors of
    /// curvature `r` spaced by the geometric length `air_gap + d`.
    pub fn with_gouy_from_curvature(mut self, mirror_curvature: f64) -> Self {
        let spacing = self.air_gap + self.diamond.map_or(0.0, |d| d.thickness);
        let fraction = (1.0 - spacing / mirror_curvature).clamp(-1.0, 1.0).acos() / PI;
        self.gouy_offset = fraction * self.free_spectral_range(Polarization::H);
        self
    }

    /// Single-pass phase at optical frequency `nu`; multiples of pi at the
    /// comb frequencies.
    pub fn phase_at(&self, nu: f64, pol: Polarization) -> f64 {
        PI * (nu - self.gouy_offset) / self.free_spectral_range(pol)
    }

    /// Transmission at optical frequency `nu` for one polarization.
    pub fn transmission_at(&self, nu: f64, pol: Polarization) -> f64 {
        transmission(self, self.phase_at(nu, pol))
    }

    /// Transmission for input polarized at 45 degrees to the birefringence
    /// axes: half the power probes each axis.
    pub fn transmission_diagonal(&self, nu: f64) -> f64 {
        0.5 * (self.transmission_at(nu, Polarization::H) + self.transmission_at(nu, Polarization::V))
    }
}

/// Airy transmission `T^2 L / ((1 - RL)^2 + 4 RL sin^2 phi)`.
pub fn transmission(state: &CavityState, phase: f64) -> f64 {
    let r = state.mirrors.reflectivity;
    let t = state.mirrors.transmissivity;
    let l = state.intracavity_transmission;
    let rl = r * l;
    let s = phase.sin();
    t * t * l / ((1.0 - rl).powi(2) + 4.0 * rl * s * s)
}

/// On-resonance transmission `T^2 L / (1 - RL)^2`.
pub fn max_transmission(state: &CavityState) -> f64 {
    max_transmission_for(&state.mirrors, state.intracavity_transmission)
}

/// On-resonance transmission for mirrors `mirrors` and intracavity transmission `l`.
pub fn max_transmission_for(mirrors: &MirrorSet, l: f64) -> f64 {
    let t = mirrors.transmissivity;
    let rl = mirrors.reflectivity * l;
    t * t * l / (1.0 - rl).powi(2)
}

/// Finesse `pi sqrt(RL) / (1 - RL)`.
pub fn finesse(reflectivity: f64, transmission: f64) -> Result<f64> {
    let rl = reflectivity * transmission;
    if rl >= 1.0 {
        return Err(Error::Divergent(rl));
    }
    ensure(rl > 0.0, || format!("R*L must be positive, got {rl}"))?;
    Ok(finesse_of_product(rl))
}

fn finesse_of_product(rl: f64) -> f64 {
    PI * rl.sqrt() / (1.0 - rl)
}

/// Solves `finesse_of_product(x) = target` for `x` in (0, 1) by bisection.
/// The finesse is strictly increasing in `x`.
fn round_trip_product_for_finesse(target: f64) -> Result<f64> {
    ensure(target > 0.0 && target.is_finite(), || {
        format!("finesse must be positive and finite, got {target}")
    })?;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    // Iterate until the bracket stops shrinking in floating point.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if finesse_of_product(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Mirror reflectivity that yields finesse `f` with intracavity transmission `l`.
pub fn reflectivity_from_finesse(f: f64, transmission: f64) -> Result<f64> {
    ensure(transmission > 0.0 && transmission <= 1.0, || {
        format!("intracavity transmission must lie in (0, 1], got {transmission}")
    })?;
    let rl = round_trip_product_for_finesse(f)?;
    let r = rl / transmission;
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::NoSolution(format!(
            "finesse {f} needs R = {r}, outside (0, 1), for L = {transmission}"
        )));
    }
    Ok(r)
}

/// Intracavity single-pass transmission that yields finesse `f` with mirror
/// reflectivity `r`. The single-pass loss is `1 - L`.
pub fn loss_from_finesse(f: f64, reflectivity: f64) -> Result<f64> {
    ensure(reflectivity > 0.0 && reflectivity < 1.0, || {
        format!("reflectivity must lie in (0, 1), got {reflectivity}")
    })?;
    let rl = round_trip_product_for_finesse(f)?;
    let l = rl / reflectivity;
    if !(l > 0.0 && l <= 1.0) {
        return Err(Error::NoSolution(format!(
            "finesse {f} is not reachable with R = {reflectivity} (needs L = {l})"
        )));
    }
    Ok(l)
}

/// `c / (2 (l + n d))`.
pub fn free_spectral_range(air_gap: f64, refractive_index: f64, thickness: f64) -> Result<f64> {
    let l_opt = air_gap + refractive_index * thickness;
    ensure(l_opt > 0.0, || format!("optical path length must be positive, got {l_opt}"))?;
    Ok(SPEED_OF_LIGHT / (2.0 * l_opt))
}

/// Resonance full width at half maximum, `FSR / F`.
pub fn resonance_fwhm(fsr: f64, finesse: f64) -> Result<f64> {
    ensure(finesse > 0.0, || format!("finesse must be positive, got {finesse}"))?;
    Ok(fsr / finesse)
}

/// Exact prefactor `(1 + R L0) / (1 - R L0)` relating the fractional change of
/// on-resonance transmission to a small fractional change of `L`.
pub fn contrast_enhancement(reflectivity: f64, baseline_transmission: f64) -> Result<f64> {
    let rl = reflectivity * baseline_transmission;
    if rl >= 1.0 {
        return Err(Error::Divergent(rl));
    }
    ensure(rl > 0.0, || format!("R*L0 must be positive, got {rl}"))?;
    Ok((1.0 + rl) / (1.0 - rl))
}

/// High-finesse form of [`contrast_enhancement`]: `2F / pi`, the effective
/// number of passes through the absorber.
pub fn contrast_enhancement_small_loss(finesse: f64) -> f64 {
    2.0 * finesse / PI
}

/// Resonance frequencies `m c / (2 l_opt) + nu_G` for one polarization.
pub fn resonance_comb(
    state: &CavityState,
    pol: Polarization,
    orders: RangeInclusive<u64>,
) -> Vec<f64> {
    let fsr = state.free_spectral_range(pol);
    orders
        .map(|m| m as f64 * fsr + state.gouy_offset)
        .collect()
}

/// `nu_m^H - nu_k^V` written as
/// `(m - k)/k * nu_k^V + dn d / (l + (n + dn) d) * nu_m^H`.
///
/// Frequencies are the longitudinal comb `m c / (2 l_opt)`; a common Gouy
/// offset cancels in the difference and is left out.
pub fn birefringent_pair_difference(state: &CavityState, m: u64, k: u64) -> Result<f64> {
    let diamond = state
        .diamond
        .ok_or_else(|| domain("birefringent pair needs a diamond inside the cavity"))?;
    ensure(k > 0, || "fringe order k must be positive".into())?;
    check_small_birefringence(diamond.birefringence, diamond.refractive_index);
    let nu_h = m as f64 * state.free_spectral_range(Polarization::H);
    let nu_v = k as f64 * state.free_spectral_range(Polarization::V);
    let (n, d, dn, l) = (
        diamond.refractive_index,
        diamond.thickness,
        diamond.birefringence,
        state.air_gap,
    );
    Ok((m as f64 - k as f64) / k as f64 * nu_v + dn * d / (l + (n + dn) * d) * nu_h)
}

/// Same-order H/V splitting `dn d / (l + n d) * nu0` for `dn << n`.
pub fn birefringent_splitting(
    birefringence: f64,
    thickness: f64,
    air_gap: f64,
    refractive_index: f64,
    laser_frequency: f64,
) -> f64 {
    check_small_birefringence(birefringence, refractive_index);
    birefringence * thickness / (air_gap + refractive_index * thickness) * laser_frequency
}

/// Inverse of [`birefringent_splitting`].
pub fn birefringence_from_splitting(
    splitting: f64,
    thickness: f64,
    air_gap: f64,
    refractive_index: f64,
    laser_frequency: f64,
) -> Result<f64> {
    ensure(thickness > 0.0, || "thickness must be positive".into())?;
    ensure(laser_frequency > 0.0, || "laser frequency must be positive".into())?;
    let dn = splitting * (air_gap + refractive_index * thickness) / (thickness * laser_frequency);
    check_small_birefringence(dn, refractive_index);
    Ok(dn)
}

/// Single-pass phase difference `(2 pi / lambda) |dn| d` between H and V.
pub fn phase_difference(birefringence: f64, thickness: f64, wavelength: f64) -> Result<f64> {
    ensure(wavelength > 0.0, || "wavelength must be positive".into())?;
    Ok(2.0 * PI / wavelength * birefringence.abs() * thickness)
}

fn check_small_birefringence(dn: f64, n: f64) {
    if dn.abs() > 0.01 * n {
        log::warn!("|dn| = {} exceeds 1% of n = {n}; same-order small-dn formulas are unreliable", dn.abs());
    }
}
