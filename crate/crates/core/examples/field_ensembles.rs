//! Build the test fields and inspect their mutual intensity.
//!
//! ```text
//! cargo run --example field_ensembles
//! ```

use std::error::Error;

use sagnac_wigner::{correlation, make_state, mix_states, total_power, Coherence, FieldSpec, Grid};

pub fn run() -> Result<(), Box<dyn Error>> {
    // 768 samples of 4/3 um: slits of 45 samples whose centers sit on the grid
    let grid = Grid::new(768, 1.024e-3, 0.0)?;
    let coherent = make_state(
        &FieldSpec::DoubleSlit { spacing_m: 0.28e-3, slit_width_m: 0.06e-3, coherence: Coherence::Coherent },
        &grid,
    )?;
    let incoherent = make_state(
        &FieldSpec::DoubleSlit { spacing_m: 0.28e-3, slit_width_m: 0.06e-3, coherence: Coherence::Incoherent },
        &grid,
    )?;

    println!("{:<12} {:>6} {:>10} {:>22}", "state", "modes", "power", "<E(-d/2) E*(+d/2)>");
    for (name, s) in [("coherent", &coherent), ("incoherent", &incoherent)] {
        let c = correlation(s, -0.14e-3, 0.14e-3)?;
        println!("{:<12} {:>6} {:>10.6} {:>22.4}", name, s.modes().len(), total_power(s), c.re);
    }

    // a partially coherent mixture interpolates the cross-slit correlation
    for p in [0.25, 0.5, 0.75] {
        let mixed = mix_states(&[coherent.clone(), incoherent.clone()], &[p, 1.0 - p])?;
        let c = correlation(&mixed, -0.14e-3, 0.14e-3)?;
        println!("coherent fraction {p:.2}: cross-slit correlation {:.4}", c.re);
    }

    let tophat = make_state(&FieldSpec::Tophat { width_m: 0.4e-3 }, &Grid::new(512, 1.6384e-3, 0.0)?)?;
    let (lo, hi) = tophat.support().ok_or("empty slit")?;
    let g = tophat.grid();
    println!(
        "tophat: {} samples from {:.1} um to {:.1} um",
        hi - lo + 1,
        g.position(lo) * 1e6,
        g.position(hi) * 1e6
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
