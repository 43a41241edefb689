//! Load, inspect and reject experiment configs.
//!
//! ```text
//! cargo run --example experiment_config
//! ```

use std::error::Error;

use sagnac_wigner::config::ExperimentConfig;

pub fn run() -> Result<(), Box<dyn Error>> {
    let text = include_str!("../presets/gaussian.json");
    let cfg = ExperimentConfig::from_json(text)?;
    let scan = cfg.scan_config()?;
    let det = cfg.detector()?;
    println!("field      {:?}", cfg.field);
    println!("grid       {} samples of {:.2} um", cfg.grid.n, cfg.field_grid()?.spacing() * 1e6);
    println!("raster     {} x {} points, {} s dwell", scan.x_points.n(), scan.theta_points.n(), scan.dwell);
    println!("detector   eta {}, input flux {:.3e} photons/s", det.eta, det.photon_flux);

    let broken = [
        ("zero dwell", text.replace("\"dwell_s\": 0.1", "\"dwell_s\": 0.0")),
        ("misspelled key", text.replace("\"seed\"", "\"sead\"")),
        ("tilt beyond the aperture", text.replace("\"extent\": 0.008", "\"extent\": 0.5")),
    ];
    for (what, t) in broken {
        match ExperimentConfig::from_json(&t) {
            Ok(_) => println!("{what}: accepted"),
            Err(e) => println!("{what}: {e}"),
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
