//! Finesse, linewidth and loss of the empty and diamond-loaded cavity.

use nv_cavity::cavity::{
    contrast_enhancement, finesse, loss_from_finesse, max_transmission, resonance_fwhm, Polarization,
};
use nv_cavity::config::ExperimentConfig;

fn main() -> nv_cavity::Result<()> {
    let cfg = ExperimentConfig::paper_defaults();
    let r = cfg.cavity.mirror_reflectivity;

    let empty = cfg.empty_cavity()?;
    let f_empty = finesse(r, 1.0)?;
    let fsr_empty = empty.free_spectral_range(Polarization::H);
    println!("empty:   FSR {:.3} GHz, F {:.1}, FWHM {:.2} MHz", fsr_empty * 1e-9, f_empty, resonance_fwhm(fsr_empty, f_empty)? * 1e-6);

    let loaded = cfg.loaded_cavity()?;
    let l = loaded.intracavity_transmission;
    let f_loaded = finesse(r, l)?;
    let fsr = loaded.free_spectral_range(Polarization::H);
    println!(
        "diamond: FSR {:.3} GHz, F {:.1}, FWHM {:.2} MHz, peak T {:.3}",
        fsr * 1e-9,
        f_loaded,
        resonance_fwhm(fsr, f_loaded)? * 1e-6,
        max_transmission(&loaded)
    );
    println!("loss inferred from F = 165: {:.3}%", 100.0 * (1.0 - loss_from_finesse(165.0, r)?));
    println!("absorption contrast enhancement: {:.1}x", contrast_enhancement(r, l)?);
    Ok(())
}
