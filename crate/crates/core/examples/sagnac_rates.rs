//! Count rates of the parity-inverting interferometer for a few mirror
//! settings, and the wave-front rotations that produce the parity.
//!
//! ```text
//! cargo run --example sagnac_rates
//! ```

use std::error::Error;
use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use sagnac_wigner::sagnac::point_reflect;
use sagnac_wigner::{
    interfere, make_state, rotate_wavefront_90, wigner_at_point_parity, DetectorModel, FieldSpec, Grid,
    InterferometerConfig, MirrorSetting, PhasePoint, Rotation,
};

pub fn run() -> Result<(), Box<dyn Error>> {
    let state = make_state(&FieldSpec::Tophat { width_m: 0.4e-3 }, &Grid::new(512, 1.6384e-3, 0.0)?)?;
    let cfg = InterferometerConfig::default();
    // 1e5 counts/s far from the state, 11% detection efficiency
    let det = DetectorModel::from_background_rate(0.11, 1e5, 0.0)?;

    println!("{:>8} {:>10} {:>10} {:>10} {:>11} {:>10}", "x [um]", "th [mrad]", "n1", "n2", "n12", "total");
    for &(x, theta) in &[(0.0, 0.0), (96e-6, 0.0), (0.0, 0.8e-3), (0.16e-3, 0.4e-3), (0.3e-3, 0.0)] {
        let r = interfere(&state, &MirrorSetting::new(x, theta), &det, &cfg)?;
        let w = wigner_at_point_parity(&state, PhasePoint::new(x, cfg.k0() * f64::sin(theta)))?;
        let predicted = -det.eta * det.photon_flux * PI / 2.0 * w;
        println!(
            "{:>8.0} {:>10.2} {:>10.1} {:>10.1} {:>11.1} {:>10.1}   (-eta F pi/2 W = {:.1})",
            x * 1e6,
            theta * 1e3,
            r.n1,
            r.n2,
            r.n12,
            r.total,
            predicted
        );
    }

    // opposite 90 degree rotations differ by a point reflection
    let field = Array2::from_shape_fn((5, 5), |(i, j)| Complex64::new(i as f64, j as f64 * 0.1));
    let cw = rotate_wavefront_90(&field, Rotation::Clockwise)?;
    let ccw = rotate_wavefront_90(&field, Rotation::CounterClockwise)?;
    let reflected = point_reflect(&ccw)?;
    println!("clockwise == point reflection of counter-clockwise: {}", cw == reflected);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
