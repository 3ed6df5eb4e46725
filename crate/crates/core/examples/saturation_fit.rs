//! Fits absorbance and saturation power to a noisy synthetic pump-saturation curve.

use nv_cavity::config::ExperimentConfig;
use nv_cavity::fitting::fit_saturation_weighted;
use nv_cavity::nv_model::{density_to_ppm, nv_density};
use nv_cavity::pipeline::{synthetic_saturation, SATURATION_NOISE};

fn main() -> nv_cavity::Result<()> {
    let cfg = ExperimentConfig::paper_defaults();
    let (p, t) = synthetic_saturation(&cfg, SATURATION_NOISE, cfg.seed)?;
    let sigma: Vec<f64> = t.iter().map(|v| SATURATION_NOISE * v).collect();
    let fit = fit_saturation_weighted(&p, &t, Some(&sigma), &cfg.mirrors()?, cfg.diamond.baseline_transmission)?;
    println!("{fit}");

    let a0 = fit.parameters[0];
    let n = nv_density(a0, cfg.diamond.ir_cross_section_m2, cfg.diamond.thickness_m)?;
    println!("NV density {n:.3e} m^-3 ({:.2} ppm)", density_to_ppm(n));
    Ok(())
}
