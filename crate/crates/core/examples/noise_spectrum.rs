//! Welch amplitude spectral density of white noise against the analytic floor.

use nv_cavity::pipeline::synthetic_white_noise;
use nv_cavity::spectral::{noise_floor, psd_welch, rms_in_band, WelchOptions};

fn main() -> nv_cavity::Result<()> {
    let (sigma, fs) = (1e-9, 10e3);
    let series = synthetic_white_noise(sigma, fs, 10.0, 1)?;
    let spec = psd_welch(&series, &WelchOptions::for_length(series.len()))?;
    println!("resolution {:.3} Hz", spec.resolution());
    println!("floor (10-500 Hz) {:.3e} /rtHz, expected {:.3e}", noise_floor(&spec, 10.0, 500.0)?, sigma * (2.0 / fs).sqrt());
    println!("rms (10-500 Hz) {:.3e}", rms_in_band(&spec, 10.0, 500.0)?);
    Ok(())
}
