//! Forward model of the parity-inverting Sagnac interferometer.
//!
//! The steering mirror displaces the input state in phase space, the two
//! counter-propagating arms pick up opposite 90 degree wave-front rotations
//! (a relative parity), and the output port intensity is integrated by a
//! large-area photon counter.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ComplexField, EnsembleState};
use crate::grid::Grid;

/// Lost power above which a displacement or reflection is rejected.
const LOSS_TOL: f64 = 1e-12;

/// Translation and beam tilt of the external steering mirror.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorSetting {
    /// Transverse translation [m].
    pub x_shift: f64,
    /// Beam tilt [rad]; `k = k0 sin(theta)`.
    pub theta: f64,
}

impl MirrorSetting {
    pub fn new(x_shift: f64, theta: f64) -> Self {
        MirrorSetting { x_shift, theta }
    }
}

/// Spatial efficiency variation across the detector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Uniformity {
    #[default]
    Constant,
    /// Efficiency falls linearly from 1 at the negative grid edge to `min`
    /// at the positive edge.
    LinearGradient { min: f64 },
}

impl Uniformity {
    fn weights(&self, grid: &Grid) -> Option<Vec<f64>> {
        match *self {
            Uniformity::Constant => None,
            Uniformity::LinearGradient { min } => {
                let (lo, span) = (grid.min(), grid.max() - grid.min());
                Some(grid.positions().iter().map(|x| 1.0 - (1.0 - min) * (x - lo) / span).collect())
            }
        }
    }
}

/// Photon counter. `eta` lumps every loss between the input and a count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub eta: f64,
    /// Input photon rate [photons/s].
    pub photon_flux: f64,
    /// Dark count rate [counts/s].
    pub dark_rate: f64,
    #[serde(default)]
    pub uniformity: Uniformity,
}

impl DetectorModel {
    pub fn new(eta: f64, photon_flux: f64, dark_rate: f64) -> Result<Self> {
        let d = DetectorModel { eta, photon_flux, dark_rate, uniformity: Uniformity::Constant };
        d.validate()?;
        Ok(d)
    }

    /// Chooses the input flux so that the interference-free count rate
    /// (`eta * flux / 2`, far from the state in phase space) equals `rate`.
    pub fn from_background_rate(eta: f64, rate: f64, dark_rate: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::InvalidDetector(format!("eta must be positive, got {eta}")));
        }
        Self::new(eta, 2.0 * rate / eta, dark_rate)
    }

    pub fn with_uniformity(mut self, uniformity: Uniformity) -> Result<Self> {
        self.uniformity = uniformity;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::InvalidDetector(format!("eta must lie in (0, 1], got {}", self.eta)));
        }
        if !(self.photon_flux >= 0.0) || !self.photon_flux.is_finite() {
            return Err(Error::InvalidDetector(format!("photon flux must be >= 0, got {}", self.photon_flux)));
        }
        if !(self.dark_rate >= 0.0) || !self.dark_rate.is_finite() {
            return Err(Error::InvalidDetector(format!("dark rate must be >= 0, got {}", self.dark_rate)));
        }
        if let Uniformity::LinearGradient { min } = self.uniformity {
            if !(min > 0.0 && min <= 1.0) {
                return Err(Error::InvalidDetector(format!("uniformity minimum must lie in (0, 1], got {min}")));
            }
        }
        Ok(())
    }

    /// Rate of each arm alone with uniform efficiency, `eta * flux / 4`.
    pub fn arm_rate(&self) -> f64 {
        0.25 * self.eta * self.photon_flux
    }
}

/// Beam splitter ratio. Only the balanced splitter is modeled.
pub const SPLIT_RATIO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferometerConfig {
    pub wavelength: f64,
    pub na_limit: f64,
}

impl InterferometerConfig {
    pub fn new(wavelength: f64, na_limit: f64) -> Result<Self> {
        let c = InterferometerConfig { wavelength, na_limit };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0) || !self.wavelength.is_finite() {
            return Err(Error::InvalidInterferometer(format!("wavelength must be positive, got {}", self.wavelength)));
        }
        if !(self.na_limit > 0.0 && self.na_limit <= 1.0) {
            return Err(Error::InvalidInterferometer(format!("na_limit must lie in (0, 1], got {}", self.na_limit)));
        }
        Ok(())
    }

    pub fn k0(&self) -> f64 {
        2.0 * PI / self.wavelength
    }
}

impl Default for InterferometerConfig {
    /// He-Ne at 633 nm with NA 0.09.
    fn default() -> Self {
        InterferometerConfig { wavelength: 633e-9, na_limit: 0.09 }
    }
}

/// Mean count rates at the output port, `total = n1 + n2 + n12`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateTriple {
    pub n1: f64,
    pub n2: f64,
    pub n12: f64,
    pub total: f64,
}

/// `k = k0 sin(theta)`.
pub fn tilt_to_wavevector(theta: f64, wavelength: f64) -> Result<f64> {
    if !(theta.abs() < 0.5 * PI) {
        return Err(Error::TiltOutOfRange { theta });
    }
    if !(wavelength > 0.0) {
        return Err(Error::InvalidInterferometer(format!("wavelength must be positive, got {wavelength}")));
    }
    Ok(2.0 * PI / wavelength * theta.sin())
}

/// `theta = arcsin(k / k0)`.
pub fn wavevector_to_tilt(k: f64, wavelength: f64) -> Result<f64> {
    let s = k * wavelength / (2.0 * PI);
    if !(s.abs() < 1.0) {
        return Err(Error::TiltOutOfRange { theta: f64::NAN });
    }
    Ok(s.asin())
}

/// Rounds a shift to whole samples; returns the sample count and the shift
/// actually applied.
pub fn quantize_shift(grid: &Grid, shift: f64) -> (isize, f64) {
    let s = (shift / grid.spacing()).round();
    (s as isize, s * grid.spacing())
}

fn rolled(amp: &[Complex64], samples: isize) -> (Vec<Complex64>, f64) {
    let n = amp.len() as isize;
    let mut out = vec![Complex64::new(0.0, 0.0); amp.len()];
    let mut lost = 0.0;
    for (i, a) in amp.iter().enumerate() {
        let j = i as isize + samples;
        if (0..n).contains(&j) {
            out[j as usize] = *a;
        } else {
            lost += a.norm_sqr();
        }
    }
    (out, lost)
}

fn check_loss(lost: f64, total: f64, what: &str) -> Result<()> {
    if lost > LOSS_TOL * total {
        return Err(Error::SupportExceedsGrid(format!(
            "{what} moves {:.3e} of the mode power off the grid",
            lost / total
        )));
    }
    Ok(())
}

/// Phase-space displacement `E(x) -> E(x - x0) exp(-i k0 x)`.
///
/// The phase ramp sign follows the `exp(+2ikx')` Wigner kernel, so the Wigner
/// function of the result is that of the input translated by `(x0, k0)`.
/// The shift is rounded to whole grid samples.
pub fn displace_phase_space(state: &EnsembleState, x0: f64, k0: f64) -> Result<EnsembleState> {
    if !x0.is_finite() || !k0.is_finite() {
        return Err(Error::NonFinite("displacement".into()));
    }
    let grid = *state.grid();
    let (samples, _) = quantize_shift(&grid, x0);
    let ramp: Vec<Complex64> = grid.positions().iter().map(|x| Complex64::from_polar(1.0, -k0 * x)).collect();
    state.map_modes(|m| {
        let (mut out, lost) = rolled(&m.amplitude, samples);
        check_loss(lost, m.power() / grid.spacing(), "displacement")?;
        if k0 != 0.0 {
            out.iter_mut().zip(&ramp).for_each(|(o, r)| *o *= r);
        }
        ComplexField::new(grid, out)
    })
}

fn check_aperture(setting: &MirrorSetting, cfg: &InterferometerConfig) -> Result<f64> {
    cfg.validate()?;
    let k = tilt_to_wavevector(setting.theta, cfg.wavelength)?;
    let s = setting.theta.sin().abs();
    if s > cfg.na_limit {
        return Err(Error::NumericalAperture { sin_theta: s, limit: cfg.na_limit });
    }
    Ok(k)
}

/// Displacement produced by a mirror setting: shift by `x_shift` and tilt by
/// `k0 sin(theta)`, subject to the numerical aperture.
pub fn displace_state(state: &EnsembleState, setting: &MirrorSetting, cfg: &InterferometerConfig) -> Result<EnsembleState> {
    let k = check_aperture(setting, cfg)?;
    displace_phase_space(state, setting.x_shift, k)
}

/// `E(x) -> E(-x)` about the origin, which must fall on a grid sample.
pub fn parity_reflect(state: &EnsembleState) -> Result<EnsembleState> {
    let grid = *state.grid();
    let origin = grid.origin_offset()?;
    let n = grid.n() as isize;
    state.map_modes(|m| {
        let mut out = vec![Complex64::new(0.0, 0.0); grid.n()];
        let mut lost = 0.0;
        for (i, a) in m.amplitude.iter().enumerate() {
            let j = 2 * origin - i as isize;
            if (0..n).contains(&j) {
                out[j as usize] = *a;
            } else {
                lost += a.norm_sqr();
            }
        }
        if lost > LOSS_TOL * m.amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>() {
            return Err(Error::AsymmetricGrid("mode support is not covered by its mirror image".into()));
        }
        ComplexField::new(grid, out)
    })
}

/// Direction of the 90 degree wave-front rotation in one arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rotation {
    /// `E(x, y) -> E(y, x)`.
    Clockwise,
    /// `E(x, y) -> E(-y, -x)`.
    CounterClockwise,
}

fn mirror(i: usize, n: usize) -> Option<usize> {
    (2 * (n / 2)).checked_sub(i).filter(|&j| j < n)
}

/// Wave-front transformation of one arm of the top-mirror Sagnac loop, on a
/// square array indexed `[x, y]` with the origin at index `n/2`. Samples
/// whose image falls outside the array are dropped.
pub fn rotate_wavefront_90(field: &Array2<Complex64>, sense: Rotation) -> Result<Array2<Complex64>> {
    let (nx, ny) = field.dim();
    if nx != ny {
        return Err(Error::Shape(format!("wave front must be square, got {nx}x{ny}")));
    }
    let n = nx;
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let src = match sense {
                Rotation::Clockwise => Some((j, i)),
                Rotation::CounterClockwise => mirror(j, n).zip(mirror(i, n)),
            };
            if let Some(s) = src {
                out[[i, j]] = field[s];
            }
        }
    }
    Ok(out)
}

/// Two-dimensional parity `E(x, y) -> E(-x, -y)` about index `n/2`.
pub fn point_reflect(field: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let (nx, ny) = field.dim();
    if nx != ny {
        return Err(Error::Shape(format!("wave front must be square, got {nx}x{ny}")));
    }
    let mut out = Array2::zeros((nx, ny));
    for i in 0..nx {
        for j in 0..ny {
            if let Some(s) = mirror(i, nx).zip(mirror(j, ny)) {
                out[[i, j]] = field[s];
            }
        }
    }
    Ok(out)
}

/// Mean count rates for the mirror at `setting`.
///
/// The mirror at `(x, theta)` brings phase-space point `(x, k0 sin theta)` of
/// the input onto the interferometer axis, i.e. the beam entering the loop is
/// the input displaced by `(-x, -k)`. One arm sees that beam, the other its
/// parity image, and the output port carries their difference:
///
/// `n1 = eta F/4 int u |E_d|^2`, `n2 = eta F/4 int u |Pi E_d|^2`,
/// `n12 = -eta F/2 Re int u E_d(x) E_d*(-x)`.
///
/// With uniform efficiency `n12 = -eta F (pi/2) W(x, k)`.
#[allow(clippy::needless_range_loop)]
pub fn interfere(
    state: &EnsembleState,
    setting: &MirrorSetting,
    det: &DetectorModel,
    cfg: &InterferometerConfig,
) -> Result<RateTriple> {
    det.validate()?;
    let k = check_aperture(setting, cfg)?;
    let displaced = displace_phase_space(state, -setting.x_shift, -k)?;
    let grid = *state.grid();
    let origin = grid.origin_offset()?;
    let n = grid.n() as isize;
    let dx = grid.spacing();
    let (samples, _) = quantize_shift(&grid, -setting.x_shift);
    let profile = det.uniformity.weights(&grid);
    let u = |j: usize| profile.as_ref().map_or(1.0, |p| p[j]);

    let mut direct = 0.0;
    let mut mirrored = 0.0;
    let mut overlap = 0.0;
    for ((w, src), d) in state.components().zip(displaced.modes()) {
        let (shifted, _) = rolled(src, samples);
        let mut i1 = 0.0;
        let mut i2 = 0.0;
        let mut cross = 0.0;
        let mut unmatched = 0.0;
        for j in 0..grid.n() {
            let mj = 2 * origin - j as isize;
            // |E_d|^2 without the unit-modulus ramp.
            let intensity = shifted[j].norm_sqr();
            i1 += u(j) * intensity;
            if (0..n).contains(&mj) {
                let mj = mj as usize;
                i2 += u(mj) * intensity;
                cross += u(j) * (d.amplitude[j] * d.amplitude[mj].conj()).re;
            } else {
                unmatched += intensity;
            }
        }
        if unmatched > LOSS_TOL * i1.max(f64::MIN_POSITIVE) {
            return Err(Error::AsymmetricGrid("displaced beam has no parity image on the grid".into()));
        }
        direct += w * i1;
        mirrored += w * i2;
        overlap += w * cross;
    }
    let scale = det.eta * det.photon_flux;
    let n1 = 0.25 * scale * direct * dx;
    let n2 = 0.25 * scale * mirrored * dx;
    let n12 = -0.5 * scale * overlap * dx;
    Ok(RateTriple { n1, n2, n12, total: n1 + n2 + n12 })
}
