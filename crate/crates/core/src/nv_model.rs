//! Optical pumping of NV centers into the metastable singlet and the resulting
//! pump-dependent 1042 nm absorption.
//!
//! Saturation intensities follow from equating the pump rate
//! `sigma_P * I_P / (h c / lambda_P)` to a decay rate: the `3E` inverse lifetime
//! for the triplet transition, the `1E` inverse lifetime for the singlet
//! population. These are order-of-magnitude estimates and are reported as such.
//! The pump intensity is taken to be homogeneous over the diamond.

use serde::{Deserialize, Serialize};

use crate::cavity::{max_transmission_for, MirrorSet};
use crate::constants::{photon_energy, PPM_NUMBER_DENSITY};
use crate::error::{ensure, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpNvParams {
    /// `3A2 -> 3E` absorption cross-section, m^2.
    pub pump_cross_section: f64,
    pub pump_wavelength: f64,
    /// Inverse lifetime of `3E`, 1/s.
    pub triplet_decay_rate: f64,
    /// Inverse lifetime of the metastable `1E`, 1/s.
    pub singlet_decay_rate: f64,
}

impl Default for PumpNvParams {
    fn default() -> Self {
        Self {
            pump_cross_section: 3e-21,
            pump_wavelength: 532e-9,
            triplet_decay_rate: 1.0 / 12e-9,
            singlet_decay_rate: 1.0 / 200e-9,
        }
    }
}

impl PumpNvParams {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.pump_cross_section > 0.0
                && self.pump_wavelength > 0.0
                && self.triplet_decay_rate > 0.0
                && self.singlet_decay_rate > 0.0,
            || "pump parameters must all be strictly positive".into(),
        )
    }
}

/// Single-pass transmission `L(P) = L0 - A0 P / (P + Psat)` of the pumped diamond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationModel {
    pub absorbance: f64,
    pub saturation_power: f64,
    pub baseline_transmission: f64,
}

impl SaturationModel {
    pub fn validate(&self) -> Result<()> {
        ensure(self.saturation_power > 0.0, || "Psat must be positive".into())?;
        ensure(
            self.baseline_transmission > 0.0 && self.baseline_transmission <= 1.0,
            || "L0 must lie in (0, 1]".into(),
        )?;
        ensure(
            self.absorbance >= 0.0 && self.absorbance < self.baseline_transmission,
            || "A0 must lie in [0, L0)".into(),
        )
    }
}

/// Pump excitation rate `sigma_P I_P / (h c / lambda_P)`, 1/s.
pub fn pump_rate(intensity: f64, params: &PumpNvParams) -> f64 {
    params.pump_cross_section * intensity / photon_energy(params.pump_wavelength)
}

/// Pump intensity at which the excitation rate equals the `3E` decay rate.
pub fn sat_intensity_triplet(params: &PumpNvParams) -> f64 {
    params.triplet_decay_rate / params.pump_cross_section * photon_energy(params.pump_wavelength)
}

/// Pump intensity at which the excitation rate equals the singlet decay rate.
pub fn sat_intensity_singlet(params: &PumpNvParams) -> f64 {
    params.singlet_decay_rate / params.triplet_decay_rate * sat_intensity_triplet(params)
}

/// Singlet population `I / (I + I_sat)`.
pub fn singlet_population(intensity: f64, sat_intensity: f64) -> Result<f64> {
    ensure(intensity >= 0.0, || "pump intensity must be non-negative".into())?;
    ensure(sat_intensity > 0.0, || "saturation intensity must be positive".into())?;
    Ok(intensity / (intensity + sat_intensity))
}

/// Single-pass absorbance `sigma_IR n_NV d p_s`.
pub fn absorbance(ir_cross_section: f64, nv_density: f64, thickness: f64, singlet_population: f64) -> f64 {
    ir_cross_section * nv_density * thickness * singlet_population
}

pub fn single_pass_transmission(power: f64, model: &SaturationModel) -> f64 {
    model.baseline_transmission - model.absorbance * power / (power + model.saturation_power)
}

/// On-resonance cavity transmission at pump power `P`, normalized to `P = 0`.
pub fn transmission_vs_pump(power: f64, model: &SaturationModel, mirrors: &MirrorSet) -> f64 {
    let pumped = max_transmission_for(mirrors, single_pass_transmission(power, model));
    let dark = max_transmission_for(mirrors, model.baseline_transmission);
    pumped / dark
}

/// NV number density `A0 / (sigma_IR d)`, m^-3.
pub fn nv_density(absorbance: f64, ir_cross_section: f64, thickness: f64) -> Result<f64> {
    ensure(ir_cross_section > 0.0 && thickness > 0.0, || {
        "cross-section and thickness must be positive".into()
    })?;
    Ok(absorbance / (ir_cross_section * thickness))
}

/// Converts a number density to ppm of diamond carbon atoms.
pub fn density_to_ppm(density: f64) -> f64 {
    density / PPM_NUMBER_DENSITY
}

/// Ratio of the predicted singlet saturation intensity to an observed one.
///
/// The observed saturation peak intensity (`2 Psat / (pi w^2)`) sits roughly an
/// order of magnitude below the prediction; this ratio reports the gap without
/// trying to explain it.
pub fn saturation_discrepancy(observed_sat_intensity: f64, params: &PumpNvParams) -> f64 {
    sat_intensity_singlet(params) / observed_sat_intensity
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::{max_transmission, CavityState};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn paper_model() -> SaturationModel {
        SaturationModel {
            absorbance: 0.022,
            saturation_power: 0.88,
            baseline_transmission: 0.9965,
        }
    }

    #[test]
    fn pump_rate_examples() {
        let p = PumpNvParams::default();
        assert_relative_eq!(pump_rate(10e9, &p), 8.03e7, max_relative = 1e-3);
        assert_eq!(pump_rate(0.0, &p), 0.0);
        assert_relative_eq!(pump_rate(2e9, &p), 2.0 * pump_rate(1e9, &p), max_relative = 1e-15);
    }

    #[test]
    fn saturation_intensities() {
        let p = PumpNvParams::default();
        let trip = sat_intensity_triplet(&p);
        assert_relative_eq!(trip, 1.04e10, max_relative = 5e-3);
        assert_relative_eq!(pump_rate(trip, &p), p.triplet_decay_rate, max_relative = 1e-6);
        let half_sigma = PumpNvParams {
            pump_cross_section: 1.5e-21,
            ..p
        };
        assert_relative_eq!(sat_intensity_triplet(&half_sigma), 2.0 * trip, max_relative = 1e-15);

        let sing = sat_intensity_singlet(&p);
        assert_relative_eq!(sing, 6.2e8, max_relative = 5e-3);
        assert_relative_eq!(pump_rate(sing, &p), p.singlet_decay_rate, max_relative = 1e-6);
        assert_relative_eq!(sing / trip, 12.0 / 200.0, max_relative = 1e-14);

        let equal = PumpNvParams {
            singlet_decay_rate: p.triplet_decay_rate,
            ..p
        };
        assert_relative_eq!(sat_intensity_singlet(&equal), trip, max_relative = 1e-15);
    }

    #[test]
    fn population_examples() {
        assert_relative_eq!(singlet_population(6e8, 6e8).unwrap(), 0.5);
        assert_eq!(singlet_population(0.0, 6e8).unwrap(), 0.0);
        assert!(singlet_population(1e30, 6e8).unwrap() > 0.999_999);
        assert_relative_eq!(singlet_population(70e6, 600e6).unwrap(), 0.104, max_relative = 5e-3);
    }

    #[test]
    fn absorbance_and_density() {
        assert_relative_eq!(absorbance(3e-22, 3.6e23, 0.2e-3, 1.0), 0.0216, max_relative = 1e-12);
        assert_eq!(absorbance(3e-22, 3.6e23, 0.2e-3, 0.0), 0.0);
        let n = nv_density(0.022, 3e-22, 0.2e-3).unwrap();
        assert_relative_eq!(n, 3.667e23, max_relative = 1e-3);
        assert!((1.8e23..=5.4e23).contains(&n));
        let ppm = density_to_ppm(n);
        assert!((1.5..2.5).contains(&ppm), "{ppm}");
        assert_eq!(nv_density(0.0, 3e-22, 0.2e-3).unwrap(), 0.0);
    }

    #[test]
    fn single_pass_examples() {
        let m = paper_model();
        assert_eq!(single_pass_transmission(0.0, &m), 0.9965);
        assert_relative_eq!(single_pass_transmission(0.88, &m), 0.9855, max_relative = 1e-14);
        assert_relative_eq!(single_pass_transmission(1e12, &m), 0.9745, max_relative = 1e-10);
    }

    #[test]
    fn pump_transmission_examples() {
        let m = paper_model();
        let mirrors = MirrorSet::lossless(0.985).unwrap();
        assert_eq!(transmission_vs_pump(0.0, &m, &mirrors), 1.0);
        // Independent evaluation: L(0.88) = 0.9855, ratio of L/(1-RL)^2 values.
        let f = |l: f64| l / (1.0 - 0.985 * l).powi(2);
        let expected = f(0.9855) / f(0.9965);
        assert_relative_eq!(transmission_vs_pump(0.88, &m, &mirrors), expected, max_relative = 1e-12);
        assert_relative_eq!(expected, 0.392_498_552_728, max_relative = 1e-9);
    }

    #[test]
    fn pump_transmission_agrees_with_cavity_module() {
        let m = paper_model();
        let mirrors = MirrorSet::lossless(0.985).unwrap();
        let mut state = CavityState::empty(mirrors, 0.05);
        state.intracavity_transmission = m.baseline_transmission;
        let dark = max_transmission(&state);
        for p in [0.1, 0.5, 1.0, 3.0] {
            state.intracavity_transmission = single_pass_transmission(p, &m);
            let via_cavity = max_transmission(&state) / dark;
            assert!((transmission_vs_pump(p, &m, &mirrors) - via_cavity).abs() < 1e-12);
        }
    }

    #[test]
    fn discrepancy_is_about_an_order_of_magnitude() {
        let observed = crate::gaussian_optics::peak_intensity(0.88, 90e-6).unwrap();
        let ratio = saturation_discrepancy(observed, &PumpNvParams::default());
        assert!((5.0..15.0).contains(&ratio), "{ratio}");
    }

    proptest! {
        #[test]
        fn population_monotone_concave(i in 0.0f64..1e10, di in 1e3f64..1e9, sat in 1e6f64..1e10) {
            let a = singlet_population(i, sat).unwrap();
            let b = singlet_population(i + di, sat).unwrap();
            let c = singlet_population(i + 2.0 * di, sat).unwrap();
            prop_assert!((0.0..1.0).contains(&a));
            prop_assert!(b > a);
            prop_assert!(b - a >= c - b - 1e-15);
        }

        #[test]
        fn density_inverts_absorbance(sigma in 1e-23f64..1e-21, n in 1e20f64..1e25, d in 1e-5f64..1e-2) {
            let back = nv_density(absorbance(sigma, n, d, 1.0), sigma, d).unwrap();
            prop_assert!((back - n).abs() / n < 1e-6);
        }

        #[test]
        fn pump_transmission_non_increasing(p in 0.0f64..10.0, dp in 0.0f64..1.0) {
            let m = paper_model();
            let mirrors = MirrorSet::lossless(0.985).unwrap();
            let a = transmission_vs_pump(p, &m, &mirrors);
            let b = transmission_vs_pump(p + dp, &m, &mirrors);
            prop_assert!(b <= a + 1e-15);
            prop_assert!(a > 0.0 && a <= 1.0);
        }
    }
}
