//! Shot-noise and spin-projection limits, temperature cross-talk and bandwidth.

use nv_cavity::config::ExperimentConfig;
use nv_cavity::pipeline::sensitivity_report;

fn main() -> nv_cavity::Result<()> {
    let mut cfg = ExperimentConfig::paper_defaults();
    for power in [2.3e-3, 23e-3, 230e-3] {
        cfg.detection.detected_power_W = power;
        let r = sensitivity_report(&cfg)?;
        println!("P = {:>6.1} mW: shot noise {:.2} pT/rtHz", power * 1e3, r.shot_noise_T_per_rtHz * 1e12);
    }
    let r = sensitivity_report(&cfg)?;
    println!("projection noise {:.1} fT/rtHz from {:.2e} spins", r.projection_noise_T_per_rtHz * 1e15, r.spin_count);
    println!("temperature cross-talk {:.3} K/uT", r.temperature_K_per_uT);
    if let Some(bw) = r.bandwidth_Hz {
        println!("slope halves at {:.1} kHz modulation", bw * 1e-3);
    }
    Ok(())
}
