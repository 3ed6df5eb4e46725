//! Simulation and analysis toolkit for cavity-enhanced infrared-absorption
//! magnetometry with nitrogen-vacancy (NV) centers in diamond.
//!
//! The crate forward-models the measurement chain
//!
//! ```text
//! cavity optics -> NV singlet absorption -> ODMR -> lock-in demodulation -> noise spectra
//! ```
//!
//! and inverts synthetic or recorded data back to physical parameters with a
//! damped least-squares engine. Every quantity is in SI units.
//!
//! Modules map onto the physics:
//!
//! * [`gaussian_optics`] TEM00 mode geometry, beam intensities, photon flux.
//! * [`cavity`] Fabry-Perot transmission, finesse, resonance comb, birefringence.
//! * [`nv_model`] pump-rate saturation model and pump-dependent absorption.
//! * [`magnetometry`] Zeeman shifts, ODMR spectra, sensitivity limits.
//! * [`lockin_dsp`] FM modulation, lock-in demodulation, field reconstruction.
//! * [`spectral`] Welch PSD estimation and noise-floor extraction.
//! * [`fitting`] Levenberg-Marquardt engine, Lorentzian and saturation fits.
//! * [`config`], [`io`], [`pipeline`] reproducible config-driven pipelines
//!   behind the `nvcav` binary.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod config;
pub mod constants;
pub mod error;
pub mod fitting;
pub mod gaussian_optics;
pub mod io;
pub mod lockin_dsp;
pub mod magnetometry;
pub mod nv_model;
pub mod pipeline;
pub mod plot;
pub mod spectral;

pub use error::{Error, Result};
