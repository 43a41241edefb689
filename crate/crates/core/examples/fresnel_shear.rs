//! Free-space propagation shears phase space: `W_z(x, k) = W_0(x - z k / k0, k)`.
//! The Wigner function a scan measures therefore belongs to the plane of the
//! steering mirror.
//!
//! ```text
//! cargo run --release --example fresnel_shear
//! ```

use std::error::Error;
use std::f64::consts::PI;

use sagnac_wigner::{fresnel_propagate, make_state, wigner_map, Axis, FieldSpec, Grid};

pub fn run() -> Result<(), Box<dyn Error>> {
    let lambda = 633e-9;
    let k0 = 2.0 * PI / lambda;
    let grid = Grid::with_spacing(4096, 4e-6, 0.0)?;
    let state = make_state(&FieldSpec::Tophat { width_m: 0.4e-3 }, &grid)?;
    let dx = grid.spacing();

    // one k for both distances, chosen so that z k / k0 is a whole number of samples
    let k = 5.0 * dx * k0 / 0.01;
    let ks = Axis::from_values(vec![k])?;
    let xs = Axis::from_values((-120..=120).map(|j| j as f64 * dx).collect())?;
    let before = wigner_map(&state, &xs, &ks)?;
    for (z, q) in [(0.01, 5), (0.05, 25)] {
        let after = wigner_map(&fresnel_propagate(&state, z, lambda)?, &xs, &ks)?;
        let mut err: f64 = 0.0;
        for i in q..xs.len() {
            err = err.max((after.value(i, 0) - before.value(i - q, 0)).abs());
        }
        println!(
            "z = {:>2.0} mm, k = {:.0} rad/m: shear z k / k0 = {:.0} um, max |W_z(x, k) - W_0(x - zk/k0, k)| = {:.2e} of peak",
            z * 1e3,
            k,
            z * k / k0 * 1e6,
            err / before.peak()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
