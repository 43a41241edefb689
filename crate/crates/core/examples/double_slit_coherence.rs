//! Coherent and incoherent double slits: identical intensity, different
//! phase-space interference.
//!
//! ```text
//! cargo run --release --example double_slit_coherence
//! ```

use std::error::Error;

use sagnac_wigner::config::ExperimentConfig;
use sagnac_wigner::{estimate_background, extract_features, reconstruct_wigner, run_scan};

pub fn run() -> Result<(), Box<dyn Error>> {
    for text in [include_str!("../presets/double_slit.json"), include_str!("../presets/double_slit_incoherent.json")] {
        let cfg = ExperimentConfig::from_json(text)?;
        let icfg = cfg.interferometer();
        let counts = run_scan(&cfg.state()?, &cfg.scan_config()?, &cfg.detector()?, &icfg)?;
        let bg = estimate_background(&counts, &cfg.background_method(false)?)?;
        let report = reconstruct_wigner(&counts, bg.counts, &icfg)?;
        let f = extract_features(&report.wigner, cfg.field.kind(), &icfg)?;

        let label = if text.contains("\"incoherent\"") { "incoherent" } else { "coherent" };
        println!("{label}:");
        println!("  lobe separation  {:.1} um", f.lobe_separation()? * 1e6);
        println!("  slit width       {:.1} um", f.support_width()? * 1e6);
        match f.fringe_period_k {
            Some(p) => println!("  fringe period    {:.0} rad/m ({:.3} mrad)", p, (p / icfg.k0()).asin() * 1e3),
            None => println!("  fringe period    none"),
        }
        println!("  visibility       {:.3}", f.fringe_visibility()?);
        println!("  divergence       {:.2} mrad (first zero), {:.2} mrad (first-zero width)", f.first_zero_theta()? * 1e3, f.full_width_theta()? * 1e3);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
