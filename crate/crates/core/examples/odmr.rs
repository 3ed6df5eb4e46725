//! ODMR spectrum at the bias field and the field recovered from the fitted dips.

use nv_cavity::config::ExperimentConfig;
use nv_cavity::fitting::fit_lorentzian;
use nv_cavity::magnetometry::{field_from_splitting, odmr_spectrum};

fn main() -> nv_cavity::Result<()> {
    let cfg = ExperimentConfig::paper_defaults();
    let spin = cfg.spin_params();
    let grid: Vec<f64> = (0..2001).map(|i| 2.77e9 + 1e5 * i as f64).collect();
    let spectrum = odmr_spectrum(&grid, cfg.spin.bias_field_T, &spin)?;

    let fit = fit_lorentzian(&grid, &spectrum.normalized_transmission, 2, None)?;
    let mut peaks = fit.peaks.clone();
    peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
    for p in &peaks {
        println!("dip at {:.4} GHz, FWHM {:.2} MHz, depth {:.4}", p.center * 1e-9, p.fwhm * 1e-6, -p.amplitude);
    }
    let b = field_from_splitting(peaks[1].center, peaks[0].center, &spin)?;
    println!("recovered field {:.4} mT (set {:.4} mT)", b * 1e3, cfg.spin.bias_field_T * 1e3);
    Ok(())
}
