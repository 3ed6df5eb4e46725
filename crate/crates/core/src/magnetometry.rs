//! Ground-state Zeeman physics, ODMR spectra and sensitivity limits.
//!
//! Field shifts are first order: an `m_s = +-1` level moves by
//! `m_s * gamma * B * cos(theta) / 2pi`, with `theta` the angle between the
//! field and the NV axis. For a field along [100] all four NV orientations see
//! the same `theta = 54.7 deg`. Resonances are Lorentzian dips.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{domain, ensure, Error, Result};
use crate::gaussian_optics::photon_rate;

/// Field magnitude above which the first-order treatment is refused, T.
pub const ZEEMAN_REGIME_LIMIT: f64 = 0.2;
/// Field magnitude above which a warning is logged, T.
pub const ZEEMAN_WARN_LIMIT: f64 = 0.02;

/// Contrast and width of one magnetic resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceShape {
    pub contrast: f64,
    pub fwhm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinParams {
    /// Zero-field splitting `D`, Hz.
    pub zero_field_splitting: f64,
    /// `gamma / 2pi`, Hz/T.
    pub gyromagnetic_ratio: f64,
    /// Angle between field and NV axis, rad.
    pub field_angle: f64,
    /// `dD/dT`, Hz/K.
    pub splitting_temperature_coefficient: f64,
    /// Shared magnetic-resonance FWHM, Hz.
    pub resonance_fwhm: f64,
    /// Shared fractional dip depth.
    pub contrast: f64,
    /// Overrides for the `m_s = 0 <-> -1` resonance.
    #[serde(default)]
    pub lower_override: Option<ResonanceShape>,
    /// Overrides for the `m_s = 0 <-> +1` resonance.
    #[serde(default)]
    pub upper_override: Option<ResonanceShape>,
}

impl Default for SpinParams {
    fn default() -> Self {
        Self {
            zero_field_splitting: 2.87e9,
            gyromagnetic_ratio: 28.0e9,
            field_angle: 54.7_f64.to_radians(),
            splitting_temperature_coefficient: -74e3,
            resonance_fwhm: 9.0e6,
            contrast: 0.071,
            lower_override: None,
            upper_override: None,
        }
    }
}

impl SpinParams {
    pub fn validate(&self) -> Result<()> {
        ensure(self.zero_field_splitting > 0.0, || "D must be positive".into())?;
        ensure(self.gyromagnetic_ratio > 0.0, || "gyromagnetic ratio must be positive".into())?;
        ensure((0.0..=PI / 2.0).contains(&self.field_angle), || {
            format!("field angle must lie in [0, pi/2], got {}", self.field_angle)
        })?;
        for shape in [self.shape(Transition::Lower), self.shape(Transition::Upper)] {
            ensure((0.0..1.0).contains(&shape.contrast), || {
                format!("contrast must lie in [0, 1), got {}", shape.contrast)
            })?;
            ensure(shape.fwhm > 0.0, || "resonance FWHM must be positive".into())?;
        }
        Ok(())
    }

    pub fn shape(&self, transition: Transition) -> ResonanceShape {
        let shared = ResonanceShape {
            contrast: self.contrast,
            fwhm: self.resonance_fwhm,
        };
        match transition {
            Transition::Lower => self.lower_override.unwrap_or(shared),
            Transition::Upper => self.upper_override.unwrap_or(shared),
        }
    }
}

/// Ground-state spin projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpinProjection {
    Minus,
    Zero,
    Plus,
}

impl SpinProjection {
    pub fn value(self) -> f64 {
        match self {
            SpinProjection::Minus => -1.0,
            SpinProjection::Zero => 0.0,
            SpinProjection::Plus => 1.0,
        }
    }
}

/// One of the two `m_s = 0 <-> +-1` magnetic resonances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transition {
    /// `m_s = 0 <-> -1`, frequency decreases with field.
    Lower,
    /// `m_s = 0 <-> +1`, frequency increases with field.
    Upper,
}

impl Transition {
    pub fn projection(self) -> SpinProjection {
        match self {
            Transition::Lower => SpinProjection::Minus,
            Transition::Upper => SpinProjection::Plus,
        }
    }
}

fn check_regime(field: f64) -> Result<()> {
    if !field.is_finite() || field.abs() >= ZEEMAN_REGIME_LIMIT {
        return Err(Error::OutOfRegime {
            field,
            limit: ZEEMAN_REGIME_LIMIT,
        });
    }
    if field.abs() > ZEEMAN_WARN_LIMIT {
        log::warn!("B = {field} T: first-order Zeeman shifts lose accuracy above {ZEEMAN_WARN_LIMIT} T");
    }
    Ok(())
}

/// First-order Zeeman shift `m_s gamma B cos(theta) / 2pi`, Hz.
pub fn zeeman_shift(ms: SpinProjection, field: f64, params: &SpinParams) -> Result<f64> {
    check_regime(field)?;
    Ok(ms.value() * params.gyromagnetic_ratio * field * params.field_angle.cos())
}

/// The two magnetic-resonance frequencies at field `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonancePair {
    pub lower: f64,
    pub upper: f64,
}

impl ResonancePair {
    pub fn get(&self, transition: Transition) -> f64 {
        match transition {
            Transition::Lower => self.lower,
            Transition::Upper => self.upper,
        }
    }
}

/// `D -+ gamma B cos(theta) / 2pi`.
pub fn resonance_frequencies(field: f64, params: &SpinParams) -> Result<ResonancePair> {
    let d = params.zero_field_splitting;
    Ok(ResonancePair {
        lower: d + zeeman_shift(SpinProjection::Minus, field, params)?,
        upper: d + zeeman_shift(SpinProjection::Plus, field, params)?,
    })
}

/// Field from the resonance splitting, `B = pi (f+ - f-) / (gamma cos theta)`.
pub fn field_from_splitting(f_plus: f64, f_minus: f64, params: &SpinParams) -> Result<f64> {
    let projection = params.gyromagnetic_ratio * params.field_angle.cos();
    ensure(projection > 1e-9 * params.gyromagnetic_ratio, || {
        "field is perpendicular to the NV axis; splitting carries no first-order field information".into()
    })?;
    Ok((f_plus - f_minus) / (2.0 * projection))
}

/// Normalized transmission versus microwave frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdmrSpectrum {
    pub microwave_frequencies: Vec<f64>,
    pub normalized_transmission: Vec<f64>,
}

/// Lorentzian dip `C (w/2)^2 / (x^2 + (w/2)^2)` at detuning `x`.
#[inline]
pub fn lorentzian_dip(detuning: f64, shape: &ResonanceShape) -> f64 {
    let hw = 0.5 * shape.fwhm;
    shape.contrast * hw * hw / (detuning * detuning + hw * hw)
}

/// Transmission at microwave frequency `f` given resonance positions.
pub fn odmr_transmission(f: f64, resonances: &ResonancePair, params: &SpinParams) -> f64 {
    1.0 - lorentzian_dip(f - resonances.lower, &params.shape(Transition::Lower))
        - lorentzian_dip(f - resonances.upper, &params.shape(Transition::Upper))
}

/// ODMR spectrum `1 - sum C (w/2)^2 / ((f - f_res)^2 + (w/2)^2)` on `grid`.
pub fn odmr_spectrum(grid: &[f64], field: f64, params: &SpinParams) -> Result<OdmrSpectrum> {
    params.validate()?;
    ensure(grid.windows(2).all(|w| w[1] > w[0]), || {
        "microwave frequency grid must be strictly increasing".into()
    })?;
    let res = resonance_frequencies(field, params)?;
    let width = params
        .shape(Transition::Lower)
        .fwhm
        .max(params.shape(Transition::Upper).fwhm);
    if res.upper - res.lower < width {
        log::warn!(
            "resonances at {} and {} Hz overlap within the linewidth {width} Hz",
            res.lower,
            res.upper
        );
    }
    Ok(OdmrSpectrum {
        microwave_frequencies: grid.to_vec(),
        normalized_transmission: grid.iter().map(|&f| odmr_transmission(f, &res, params)).collect(),
    })
}

/// Photon shot-noise limited sensitivity
/// `2pi dnu / (gamma C sqrt(R) cos theta)` in T/sqrt(Hz), with `R` the
/// detected photon rate.
pub fn shot_noise_sensitivity(
    fwhm: f64,
    contrast: f64,
    detected_power: f64,
    wavelength: f64,
    field_angle: f64,
    gyromagnetic_ratio: f64,
) -> Result<f64> {
    ensure(fwhm > 0.0, || "resonance FWHM must be positive".into())?;
    ensure(contrast > 0.0 && contrast <= 1.0, || {
        format!("contrast must lie in (0, 1], got {contrast}")
    })?;
    ensure(detected_power > 0.0, || "detected power must be positive".into())?;
    let projection = gyromagnetic_ratio * field_angle.cos();
    ensure(projection > 0.0, || "field projection on the NV axis must be positive".into())?;
    let rate = photon_rate(detected_power, wavelength)?;
    // gamma = 2pi * gyromagnetic_ratio, so the 2pi factors cancel.
    Ok(fwhm / (projection * contrast * rate.sqrt()))
}

/// Spin-projection-noise limit `2pi / (gamma sqrt(N T2))` with
/// `T2 = 1 / (pi dnu)`, in T/sqrt(Hz).
pub fn projection_noise_sensitivity(spin_count: f64, fwhm: f64, gyromagnetic_ratio: f64) -> Result<f64> {
    ensure(spin_count > 0.0, || "spin count must be positive".into())?;
    ensure(fwhm > 0.0, || "resonance FWHM must be positive".into())?;
    ensure(gyromagnetic_ratio > 0.0, || "gyromagnetic ratio must be positive".into())?;
    let t2 = 1.0 / (PI * fwhm);
    Ok(1.0 / (gyromagnetic_ratio * (spin_count * t2).sqrt()))
}

/// Rectangular sensing volume used to count spins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingVolume {
    pub width: f64,
    pub height: f64,
    pub depth: f64,
}

impl Default for SensingVolume {
    /// 90 um x 90 um beam cross-section through a 200 um plate.
    fn default() -> Self {
        Self {
            width: 90e-6,
            height: 90e-6,
            depth: 200e-6,
        }
    }
}

impl SensingVolume {
    pub fn volume(&self) -> f64 {
        self.width * self.height * self.depth
    }

    pub fn spin_count(&self, density: f64) -> f64 {
        density * self.volume()
    }
}

/// Apparent field per unit temperature change, `gamma cos(theta) / (2pi |dD/dT|)`,
/// reported in K/T.
pub fn temperature_cross_sensitivity(params: &SpinParams) -> Result<f64> {
    let slope = params.splitting_temperature_coefficient.abs();
    if slope == 0.0 {
        return Err(domain("dD/dT must be non-zero"));
    }
    Ok(params.gyromagnetic_ratio * params.field_angle.cos() / slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zeeman_examples() {
        let p = SpinParams::default();
        assert_eq!(zeeman_shift(SpinProjection::Zero, 1e-3, &p).unwrap(), 0.0);
        let plus = zeeman_shift(SpinProjection::Plus, 2.99e-3, &p).unwrap();
        assert_relative_eq!(plus, 28e9 * 2.99e-3 * 54.7f64.to_radians().cos(), max_relative = 1e-14);
        assert_relative_eq!(plus, 48.4e6, max_relative = 1e-3);
        assert_eq!(zeeman_shift(SpinProjection::Minus, 2.99e-3, &p).unwrap(), -plus);
        assert!(matches!(
            zeeman_shift(SpinProjection::Plus, 0.25, &p),
            Err(Error::OutOfRegime { .. })
        ));
    }

    #[test]
    fn resonance_examples() {
        let p = SpinParams::default();
        let zero = resonance_frequencies(0.0, &p).unwrap();
        assert_eq!(zero.lower, 2.87e9);
        assert_eq!(zero.upper, 2.87e9);
        let r = resonance_frequencies(2.99e-3, &p).unwrap();
        assert_relative_eq!(r.upper - r.lower, 96.7e6, max_relative = 1e-3);
    }

    #[test]
    fn field_from_reported_splitting() {
        let p = SpinParams::default();
        let b = field_from_splitting(2.87e9 + 48.35e6, 2.87e9 - 48.35e6, &p).unwrap();
        assert_relative_eq!(b, 2.99e-3, max_relative = 5e-3);
        assert_eq!(field_from_splitting(1e9, 1e9, &p).unwrap(), 0.0);
        let perpendicular = SpinParams {
            field_angle: PI / 2.0,
            ..p
        };
        assert!(field_from_splitting(2e9, 1e9, &perpendicular).is_err());
    }

    #[test]
    fn odmr_examples() {
        let p = SpinParams::default();
        let r = resonance_frequencies(2.99e-3, &p).unwrap();
        let grid = [
            r.lower,
            r.lower + 4.5e6,
            r.upper - 4.5e6,
            r.upper,
            r.upper + 1e12,
        ];
        let s = odmr_spectrum(&grid, 2.99e-3, &p).unwrap();
        let t = &s.normalized_transmission;
        // The other dip, 96.7 MHz away, adds C (4.5/96.7)^2 ~ 1.5e-4.
        assert_relative_eq!(t[0], 0.929, epsilon = 5e-4);
        assert_relative_eq!(t[1], 1.0 - 0.071 / 2.0, epsilon = 5e-4);
        assert_relative_eq!(t[2], 1.0 - 0.071 / 2.0, epsilon = 5e-4);
        assert_relative_eq!(t[3], 0.929, epsilon = 5e-4);
        assert_relative_eq!(t[4], 1.0, epsilon = 1e-10);
        assert!(odmr_spectrum(&[2.0, 1.0], 0.0, &p).is_err());
    }

    #[test]
    fn odmr_dense_minimum_and_symmetry() {
        let p = SpinParams {
            upper_override: Some(ResonanceShape {
                contrast: 0.0,
                fwhm: 9e6,
            }),
            ..SpinParams::default()
        };
        let r = resonance_frequencies(2.99e-3, &p).unwrap();
        let step = 1e3;
        let grid: Vec<f64> = (-20_000..=20_000).map(|i| r.lower + i as f64 * step).collect();
        let s = odmr_spectrum(&grid, 2.99e-3, &p).unwrap();
        let min = s.normalized_transmission.iter().cloned().fold(f64::MAX, f64::min);
        assert!((min - (1.0 - 0.071)).abs() < 1e-9);
        let n = grid.len();
        for i in 0..n / 2 {
            let a = s.normalized_transmission[i];
            let b = s.normalized_transmission[n - 1 - i];
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn shot_noise_examples() {
        let p = SpinParams::default();
        let sn = shot_noise_sensitivity(9e6, 0.071, 2.3e-3, 1042e-9, p.field_angle, p.gyromagnetic_ratio).unwrap();
        assert_relative_eq!(sn, 71.3e-12, max_relative = 2e-3);
        let bright = shot_noise_sensitivity(9e6, 0.071, 0.23, 1042e-9, p.field_angle, p.gyromagnetic_ratio).unwrap();
        assert_relative_eq!(bright, sn / 10.0, max_relative = 1e-12);
        let ideal = shot_noise_sensitivity(9e6, 1.0, 1e6, 1042e-9, p.field_angle, p.gyromagnetic_ratio).unwrap();
        assert!(ideal < 1e-15);
    }

    #[test]
    fn projection_noise_examples() {
        let n = SensingVolume::default().spin_count(3.6e23);
        let pn = projection_noise_sensitivity(n, 9e6, 28e9).unwrap();
        assert_relative_eq!(pn, 2.5e-13, max_relative = 0.01);
        assert_relative_eq!(
            projection_noise_sensitivity(4.0 * n, 9e6, 28e9).unwrap(),
            pn / 2.0,
            max_relative = 1e-12
        );
        assert!(projection_noise_sensitivity(1e30, 9e6, 28e9).unwrap() < 1e-20);
    }

    #[test]
    fn temperature_examples() {
        let p = SpinParams::default();
        let k_per_t = temperature_cross_sensitivity(&p).unwrap();
        assert_relative_eq!(k_per_t * 1e-6, 0.219, max_relative = 2e-3);
        let perp = SpinParams {
            field_angle: PI / 2.0,
            ..p
        };
        assert!(temperature_cross_sensitivity(&perp).unwrap() * 1e-6 < 1e-12);
        let doubled = SpinParams {
            splitting_temperature_coefficient: -148e3,
            ..p
        };
        assert_relative_eq!(temperature_cross_sensitivity(&doubled).unwrap(), k_per_t / 2.0, max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn splitting_round_trip(b in -0.19f64..0.19, theta in 0.0f64..1.5) {
            let p = SpinParams { field_angle: theta, ..SpinParams::default() };
            let r = resonance_frequencies(b, &p).unwrap();
            let back = field_from_splitting(r.upper, r.lower, &p).unwrap();
            // The splitting is a difference of two ~GHz numbers.
            let tol = 1e-12 * b.abs() + 4.0 * f64::EPSILON * p.zero_field_splitting / (p.gyromagnetic_ratio * theta.cos());
            prop_assert!((back - b).abs() <= tol, "{back} vs {b}");
        }

        #[test]
        fn shot_noise_power_scaling(exp in -6.0f64..-2.0) {
            let p = SpinParams::default();
            let power = 10f64.powf(exp);
            let a = shot_noise_sensitivity(9e6, 0.071, power, 1042e-9, p.field_angle, p.gyromagnetic_ratio).unwrap();
            let b = shot_noise_sensitivity(9e6, 0.071, 100.0 * power, 1042e-9, p.field_angle, p.gyromagnetic_ratio).unwrap();
            prop_assert!(a.is_finite() && a > 0.0);
            prop_assert!(((a / b) - 10.0).abs() < 1e-9);
        }

        #[test]
        fn projection_noise_scaling(n in 1e6f64..1e15, fwhm in 1e5f64..1e8) {
            let a = projection_noise_sensitivity(n, fwhm, 28e9).unwrap();
            let t2 = 1.0 / (PI * fwhm);
            prop_assert!(a.is_finite() && a > 0.0);
            prop_assert!((a * (n * t2).sqrt() * 28e9 - 1.0).abs() < 1e-12);
        }
    }
}
