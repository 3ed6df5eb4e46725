//! Waist and Rayleigh range of the TEM00 mode for a few mirror spacings.

use nv_cavity::gaussian_optics::{mode_geometry, peak_intensity, CavityGeometry};

fn main() -> nv_cavity::Result<()> {
    println!("{:>10} {:>10} {:>12} {:>14}", "L (cm)", "w0 (um)", "z0 (cm)", "I0 @1W (MW/m2)");
    for spacing in [0.01, 0.025, 0.04, 0.05, 0.06, 0.09] {
        let m = mode_geometry(&CavityGeometry::new(spacing, 0.05, 1042e-9)?)?;
        println!(
            "{:>10.1} {:>10.1} {:>12.2} {:>14.1}",
            spacing * 100.0,
            m.waist * 1e6,
            m.rayleigh_range * 100.0,
            peak_intensity(1.0, m.waist)? * 1e-6
        );
    }
    Ok(())
}
