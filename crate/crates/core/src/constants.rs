//! Physical constants (CODATA 2018, exact where the SI defines them).

/// Planck constant in J s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Speed of light in vacuum in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Carbon-atom number density of diamond in m^-3.
pub const DIAMOND_CARBON_DENSITY: f64 = 1.76e29;

/// Number density corresponding to 1 ppm of the diamond carbon lattice, m^-3.
pub const PPM_NUMBER_DENSITY: f64 = DIAMOND_CARBON_DENSITY * 1e-6;

/// Photon energy `h c / lambda` in J.
#[inline]
pub fn photon_energy(wavelength: f64) -> f64 {
    PLANCK * SPEED_OF_LIGHT / wavelength
}
