//! Full single-slit measurement: noisy scan, background from blocked-arm
//! runs, reconstruction, feature extraction and comparison with the closed
//! form.
//!
//! ```text
//! cargo run --release --example reconstruct_top_hat
//! ```

use std::error::Error;

use sagnac_wigner::config::ExperimentConfig;
use sagnac_wigner::wigner::analytic_map;
use sagnac_wigner::{compare_maps, estimate_background, extract_features, reconstruct_wigner, run_scan, BackgroundMethod};

pub fn run() -> Result<(), Box<dyn Error>> {
    let cfg = ExperimentConfig::from_json(include_str!("../presets/tophat.json"))?;
    let icfg = cfg.interferometer();
    let counts = run_scan(&cfg.state()?, &cfg.scan_config()?, &cfg.detector()?, &icfg)?;

    let calibrated = estimate_background(&counts, &cfg.background_method(false)?)?;
    let plateau = estimate_background(&counts, &BackgroundMethod::Plateau)?;
    println!("background: calibration {:.1} counts, border plateau {:.1} counts", calibrated.counts, plateau.counts);
    if let Some(w) = &plateau.warning {
        println!("  plateau warning: {w}");
    }

    let report = reconstruct_wigner(&counts, calibrated.counts, &icfg)?;
    let ideal = cfg.detector()?.eta * cfg.detector()?.photon_flux * counts.config.dwell * std::f64::consts::FRAC_PI_2;
    println!("scale {:.1} counts per unit W ({:.3} of eta F dwell pi/2)", report.scale, report.scale / ideal);

    let features = extract_features(&report.wigner, cfg.field.kind(), &icfg)?;
    println!("support width      {:.1} um", features.support_width()? * 1e6);
    println!("first zero angle   {:.3} mrad", features.first_zero_theta()? * 1e3);
    println!("first-zero width   {:.3} mrad", features.full_width_theta()? * 1e3);

    let analytic = analytic_map(&cfg.field, report.wigner.x_axis(), report.wigner.k_axis())?;
    let m = compare_maps(&report.wigner, &analytic)?;
    println!("vs closed form: pearson {:.4}, relative L2 {:.3}, peak shift {}", m.pearson, m.l2_relative, m.peak_shift);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
