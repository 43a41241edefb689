//! Steering-mirror raster and photon-count generation.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::EnsembleState;
use crate::grid::Grid;
use crate::sagnac::{interfere, quantize_shift, DetectorModel, InterferometerConfig, MirrorSetting};

/// Mirror raster and acquisition settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Mirror translations [m].
    pub x_points: Grid,
    /// Beam tilts [rad].
    pub theta_points: Grid,
    /// Integration time per raster point [s].
    pub dwell: f64,
    pub seed: u64,
    pub noiseless: bool,
}

impl ScanConfig {
    pub fn validate(&self, cfg: &InterferometerConfig) -> Result<()> {
        if !(self.dwell > 0.0) || !self.dwell.is_finite() {
            return Err(Error::InvalidScan(format!("dwell must be positive, got {}", self.dwell)));
        }
        let worst = self.theta_points.min().abs().max(self.theta_points.max().abs());
        if worst >= 0.5 * std::f64::consts::PI || worst.sin() > cfg.na_limit {
            return Err(Error::NumericalAperture { sin_theta: worst.sin(), limit: cfg.na_limit });
        }
        Ok(())
    }
}

/// Count data over the raster, indexed `[ix, itheta]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountMap {
    pub config: ScanConfig,
    /// Mirror translations actually applied (rounded to the field grid) [m].
    pub x_m: Vec<f64>,
    pub theta_rad: Vec<f64>,
    /// Photon counts per raster point; exact `mean_rate * dwell` for
    /// noiseless maps.
    pub counts: Array2<f64>,
    /// Mean count rate per raster point [counts/s].
    pub mean_rate_hz: Array2<f64>,
    /// Whether `counts` were drawn from the Poisson distribution.
    pub sampled: bool,
}

impl CountMap {
    /// Noiseless map from given mean rates.
    pub fn from_mean_rates(config: ScanConfig, x_m: Vec<f64>, theta_rad: Vec<f64>, mean_rate_hz: Array2<f64>) -> Result<Self> {
        if mean_rate_hz.dim() != (x_m.len(), theta_rad.len()) {
            return Err(Error::Shape(format!(
                "rates are {:?}, raster is {}x{}",
                mean_rate_hz.dim(),
                x_m.len(),
                theta_rad.len()
            )));
        }
        let counts = mean_rate_hz.mapv(|r| r * config.dwell);
        Ok(CountMap { config, x_m, theta_rad, counts, mean_rate_hz, sampled: false })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.counts.dim()
    }
}

/// Raster translations rounded to whole field samples.
pub fn effective_x(scan: &ScanConfig, field_grid: &Grid) -> Vec<f64> {
    scan.x_points.positions().iter().map(|&x| quantize_shift(field_grid, x).1).collect()
}

/// Noiseless count map: `mean = interfere(...).total + dark_rate`.
pub fn expected_count_map(
    state: &EnsembleState,
    scan: &ScanConfig,
    det: &DetectorModel,
    cfg: &InterferometerConfig,
) -> Result<CountMap> {
    scan.validate(cfg)?;
    det.validate()?;
    let xs = scan.x_points.positions();
    let thetas = scan.theta_points.positions();
    let nt = thetas.len();
    let rates: Vec<f64> = (0..xs.len() * nt)
        .into_par_iter()
        .map(|p| {
            let setting = MirrorSetting::new(xs[p / nt], thetas[p % nt]);
            interfere(state, &setting, det, cfg).map(|r| r.total + det.dark_rate)
        })
        .collect::<Result<_>>()?;
    let rates = Array2::from_shape_vec((xs.len(), nt), rates).map_err(|e| Error::Shape(e.to_string()))?;
    CountMap::from_mean_rates(*scan, effective_x(scan, state.grid()), thetas, rates)
}

/// Independent random stream for raster point `(ix, itheta)`.
fn pixel_stream(seed: u64, ix: usize, it: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((ix as u64) << 32) | it as u64);
    rng
}

/// One Poisson draw; zero mean gives zero.
pub(crate) fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> Result<f64> {
    if mean < 0.0 || !mean.is_finite() {
        return Err(Error::NegativeMean(mean));
    }
    if mean == 0.0 {
        return Ok(0.0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::InvalidScan(format!("Poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng))
}

/// Poisson photon counts around a noiseless map.
///
/// Each raster point draws from its own stream keyed by `(seed, ix, itheta)`,
/// so the result does not depend on evaluation order or thread count.
pub fn sample_counts(expected: &CountMap, seed: u64) -> Result<CountMap> {
    if expected.sampled {
        return Err(Error::InvalidScan("counts are already sampled".into()));
    }
    let (nx, nt) = expected.shape();
    let means = &expected.counts;
    // rounding in the forward model can leave means a hair below zero
    let slack = 1e-9 * means.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let drawn: Vec<f64> = (0..nx * nt)
        .into_par_iter()
        .map(|p| {
            let (i, j) = (p / nt, p % nt);
            let mean = means[[i, j]];
            if mean < -slack {
                return Err(Error::NegativeMean(mean));
            }
            poisson(&mut pixel_stream(seed, i, j), mean.max(0.0))
        })
        .collect::<Result<_>>()?;
    let counts = Array2::from_shape_vec((nx, nt), drawn).map_err(|e| Error::Shape(e.to_string()))?;
    let mut config = expected.config;
    config.seed = seed;
    config.noiseless = false;
    Ok(CountMap { counts, config, sampled: true, ..expected.clone() })
}

/// Full acquisition: expected rates, then Poisson sampling unless
/// `scan.noiseless`.
pub fn run_scan(state: &EnsembleState, scan: &ScanConfig, det: &DetectorModel, cfg: &InterferometerConfig) -> Result<CountMap> {
    let expected = expected_count_map(state, scan, det, cfg)?;
    if scan.noiseless {
        Ok(expected)
    } else {
        sample_counts(&expected, scan.seed)
    }
}
