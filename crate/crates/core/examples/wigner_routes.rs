//! The same Wigner function by the correlation sum (direct and FFT), the
//! displaced-parity overlap and the closed form.
//!
//! ```text
//! cargo run --example wigner_routes
//! ```

use std::error::Error;
use std::f64::consts::PI;

use sagnac_wigner::wigner::{analytic_wigner, wigner_transform_direct, wigner_transform_fft};
use sagnac_wigner::{make_state, wigner_at_point_parity, Axis, FieldSpec, Grid, PhasePoint};

pub fn run() -> Result<(), Box<dyn Error>> {
    let a = 0.4e-3;
    let grid = Grid::new(512, 1.6384e-3, 0.0)?;
    let spec = FieldSpec::Tophat { width_m: a };
    let state = make_state(&spec, &grid)?;
    let dx = grid.spacing();

    // FFT-compatible axis: spacing pi / (L0 dx) with L0 = 1024 >= 2n - 1
    let ks = Axis::from(Grid::with_spacing(64, PI / (1024.0 * dx), 0.0)?);
    let xs = Axis::from_values((-3..=3).map(|j| j as f64 * 20.0 * dx).collect())?;
    let fft = wigner_transform_fft(&state, &xs, &ks)?;
    let direct = wigner_transform_direct(&state, &xs, &ks)?;
    let gap = fft.values().iter().zip(direct.values().iter()).fold(0.0_f64, |m, (p, q)| m.max((p - q).abs()));
    println!("FFT vs direct sum over a 7x64 raster: max difference {gap:.2e}");

    println!("{:>9} {:>11} {:>12} {:>12} {:>12}", "x [um]", "k [rad/m]", "direct", "parity", "closed form");
    for &(j, k) in &[(0, 0.0), (0, PI / a), (20, 3000.0), (-40, -6000.0), (62, 1500.0)] {
        let x = j as f64 * dx;
        let p = PhasePoint::new(x, k);
        let d = wigner_transform_direct(&state, &Axis::from_values(vec![x])?, &Axis::from_values(vec![k])?)?.value(0, 0);
        println!(
            "{:>9.1} {:>11.1} {:>12.6} {:>12.6} {:>12.6}",
            x * 1e6,
            k,
            d,
            wigner_at_point_parity(&state, p)?,
            analytic_wigner(&spec, p)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
