//! Raster the steering mirror over the single slit and draw photon counts.
//! Writes `counts.csv` under the system temp directory.
//!
//! ```text
//! cargo run --release --example photon_scan
//! ```

use std::error::Error;

use sagnac_wigner::config::ExperimentConfig;
use sagnac_wigner::io::{counts_to_csv, write_atomic};
use sagnac_wigner::{expected_count_map, sample_counts};

pub fn run() -> Result<(), Box<dyn Error>> {
    let cfg = ExperimentConfig::from_json(include_str!("../presets/tophat.json"))?;
    let state = cfg.state()?;
    let scan = cfg.scan_config()?;
    let det = cfg.detector()?;

    let mean = expected_count_map(&state, &scan, &det, &cfg.interferometer())?;
    let counts = sample_counts(&mean, scan.seed)?;
    let (nx, nt) = counts.shape();
    let lo = counts.counts.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = counts.counts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("{nx}x{nt} raster, {} s per point, counts from {lo} to {hi}", scan.dwell);

    // shot noise: residuals around the mean have variance close to the mean
    let z: Vec<f64> = counts
        .counts
        .iter()
        .zip(mean.counts.iter())
        .filter(|(_, m)| **m > 100.0)
        .map(|(c, m)| (c - m) / m.sqrt())
        .collect();
    let var = z.iter().map(|v| v * v).sum::<f64>() / z.len() as f64;
    println!("normalized residual variance over {} points: {var:.3}", z.len());

    let center = counts.counts[[nx / 2, nt / 2]];
    let edge = counts.counts[[0, 0]];
    println!("center pixel {center} counts (dark fringe), corner pixel {edge} counts (background)");

    let path = std::env::temp_dir().join("sagnac-wigner-example").join("counts.csv");
    write_atomic(&path, &counts_to_csv(&counts))?;
    println!("wrote {}", path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
