//! Simulation and analysis toolkit for measuring the transverse spatial
//! Wigner function of light with a parity-inverting Sagnac interferometer
//! and a photon-counting detector.
//!
//! The pipeline mirrors the experiment:
//!
//! 1. [`field`] builds 1D field ensembles (slits, Gaussian and Hermite-Gauss
//!    modes, incoherent mixtures) and propagates them.
//! 2. [`wigner`] computes `W(x, k)` from the correlation integral (direct and
//!    FFT quadrature) and from the displaced-parity expectation value.
//! 3. [`sagnac`] models the steering mirror, the wave-front rotations and the
//!    detector count rates.
//! 4. [`scan`] rasters the mirror and draws Poisson photon counts.
//! 5. [`reconstruct`] turns counts back into a normalized Wigner map and
//!    extracts slit widths, lobe spacing, fringe period and divergence.
//!
//! [`config`] and [`cli`] drive the whole chain from a JSON experiment file.

// `!(v > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod reconstruct;
pub mod sagnac;
pub mod scan;
pub mod wigner;

pub use error::{Error, Result};
pub use field::{
    correlation, fresnel_propagate, make_state, mix_states, total_power, Coherence, ComplexField, EnsembleState,
    FieldKind, FieldSpec,
};
pub use grid::{Axis, Grid};
pub use reconstruct::{
    compare_maps, estimate_background, extract_features, reconstruct_wigner, BackgroundMethod, FeatureSet,
    MapMetrics, ReconstructionReport,
};
pub use sagnac::{
    displace_state, interfere, parity_reflect, rotate_wavefront_90, tilt_to_wavevector, DetectorModel,
    InterferometerConfig, MirrorSetting, RateTriple, Rotation,
};
pub use scan::{expected_count_map, run_scan, sample_counts, CountMap, ScanConfig};
pub use wigner::{
    analytic_wigner, marginal_x, marginal_k, wigner_at_point_parity, wigner_map, wigner_transform, PhasePoint,
    WignerMap,
};
