//! Scalar 1D optical fields, statistical ensembles of them, and the
//! paraxial free-space propagator.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

const NORM_TOL: f64 = 1e-12;

/// Complex amplitude sampled on a grid, normalized so that
/// `sum |E_j|^2 * spacing = 1` when part of an [`EnsembleState`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: Grid,
    pub amplitude: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Grid, amplitude: Vec<Complex64>) -> Result<Self> {
        if amplitude.len() != grid.n() {
            return Err(Error::InvalidEnsemble(format!(
                "amplitude has {} samples, grid has {}",
                amplitude.len(),
                grid.n()
            )));
        }
        if amplitude.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("field amplitude".into()));
        }
        Ok(ComplexField { grid, amplitude })
    }

    /// `sum |E_j|^2 * spacing`.
    pub fn power(&self) -> f64 {
        self.amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    /// Inclusive index range of non-zero samples, `None` for an all-zero field.
    pub fn support(&self) -> Option<(usize, usize)> {
        let first = self.amplitude.iter().position(|a| a.norm_sqr() > 0.0)?;
        let last = self.amplitude.iter().rposition(|a| a.norm_sqr() > 0.0)?;
        Some((first, last))
    }

    fn normalized(mut self) -> Result<Self> {
        let p = self.power();
        if !(p > 0.0) {
            return Err(Error::InvalidEnsemble("cannot normalize an all-zero field".into()));
        }
        let s = 1.0 / p.sqrt();
        self.amplitude.iter_mut().for_each(|a| *a *= s);
        Ok(self)
    }
}

/// Convex combination of pure modes, `<E(x1) E*(x2)> = sum_m w_m E_m(x1) E_m*(x2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleState {
    grid: Grid,
    modes: Vec<ComplexField>,
    weights: Vec<f64>,
}

impl EnsembleState {
    /// Validates weights (non-negative, summing to one) and per-mode normalization.
    pub fn new(modes: Vec<ComplexField>, weights: Vec<f64>) -> Result<Self> {
        let state = Self::from_parts(modes, weights)?;
        for (i, m) in state.modes.iter().enumerate() {
            let p = m.power();
            if (p - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidEnsemble(format!("mode {i} has power {p}, expected 1")));
            }
        }
        Ok(state)
    }

    /// A single fully coherent mode; the field is normalized first.
    pub fn pure(field: ComplexField) -> Result<Self> {
        Self::new(vec![field.normalized()?], vec![1.0])
    }

    /// Structural checks only; used by transformations that preserve norms.
    pub(crate) fn from_parts(modes: Vec<ComplexField>, weights: Vec<f64>) -> Result<Self> {
        let grid = modes
            .first()
            .ok_or_else(|| Error::InvalidEnsemble("at least one mode is required".into()))?
            .grid;
        if modes.len() != weights.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} modes but {} weights",
                modes.len(),
                weights.len()
            )));
        }
        if modes.iter().any(|m| !m.grid.same_as(&grid)) {
            return Err(Error::GridMismatch("all modes must share one grid".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidEnsemble("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidEnsemble(format!("weights sum to {total}, expected 1")));
        }
        Ok(EnsembleState { grid, modes, weights })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn modes(&self) -> &[ComplexField] {
        &self.modes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Iterator over `(weight, amplitude)` pairs.
    pub fn components(&self) -> impl Iterator<Item = (f64, &[Complex64])> {
        self.weights.iter().copied().zip(self.modes.iter().map(|m| m.amplitude.as_slice()))
    }

    /// Applies `f` to every mode's amplitude, keeping weights.
    pub(crate) fn map_modes<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&ComplexField) -> Result<ComplexField>,
    {
        let modes = self.modes.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Self::from_parts(modes, self.weights.clone())
    }

    /// `sum_m w_m |E_m(x_j)|^2` at every grid sample.
    pub fn intensity(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.n()];
        for (w, amp) in self.components() {
            for (o, a) in out.iter_mut().zip(amp) {
                *o += w * a.norm_sqr();
            }
        }
        out
    }

    /// Inclusive index range where any mode is non-zero.
    pub fn support(&self) -> Option<(usize, usize)> {
        self.modes.iter().filter_map(|m| m.support()).fold(None, |acc, (lo, hi)| match acc {
            None => Some((lo, hi)),
            Some((a, b)) => Some((a.min(lo), b.max(hi))),
        })
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        for m in &self.modes {
            if m.amplitude.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
                return Err(Error::NonFinite("state amplitude".into()));
            }
        }
        Ok(())
    }
}

/// Coherence of the two double-slit apertures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coherence {
    Coherent,
    Incoherent,
}

/// Parametrized test fields. All lengths in metres; every field is centered
/// on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Tophat {
        width_m: f64,
    },
    DoubleSlit {
        spacing_m: f64,
        slit_width_m: f64,
        #[serde(default = "default_coherence")]
        coherence: Coherence,
    },
    Gaussian {
        waist_m: f64,
    },
    HermiteGauss {
        waist_m: f64,
        order: u32,
    },
}

fn default_coherence() -> Coherence {
    Coherence::Coherent
}

/// Field family, used to select which features are meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Tophat,
    DoubleSlit,
    Gaussian,
    HermiteGauss,
}

impl FieldSpec {
    pub fn kind(&self) -> FieldKind {
        match self {
            FieldSpec::Tophat { .. } => FieldKind::Tophat,
            FieldSpec::DoubleSlit { .. } => FieldKind::DoubleSlit,
            FieldSpec::Gaussian { .. } => FieldKind::Gaussian,
            FieldSpec::HermiteGauss { .. } => FieldKind::HermiteGauss,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            FieldSpec::Tophat { width_m } => positive("width_m", width_m),
            FieldSpec::DoubleSlit { spacing_m, slit_width_m, .. } => {
                positive("spacing_m", spacing_m)?;
                positive("slit_width_m", slit_width_m)?;
                if spacing_m <= slit_width_m {
                    return Err(Error::InvalidSpec(format!(
                        "slit spacing {spacing_m} must exceed slit width {slit_width_m}"
                    )));
                }
                Ok(())
            }
            FieldSpec::Gaussian { waist_m } | FieldSpec::HermiteGauss { waist_m, .. } => {
                positive("waist_m", waist_m)
            }
        }
    }
}

/// Samples with `|x - center| <= width/2`; the hard edges are quantized to
/// the grid, so the realized width is `count * spacing`.
fn slit(grid: &Grid, center: f64, width: f64) -> Result<ComplexField> {
    let half = 0.5 * width;
    if center - half < grid.min() || center + half > grid.max() {
        return Err(Error::SupportExceedsGrid(format!(
            "slit [{}, {}] not inside grid [{}, {}]",
            center - half,
            center + half,
            grid.min(),
            grid.max()
        )));
    }
    let slack = 1e-9 * grid.spacing();
    let amplitude: Vec<Complex64> = grid
        .positions()
        .iter()
        .map(|&x| if (x - center).abs() <= half + slack { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
        .collect();
    let count = amplitude.iter().filter(|a| a.re > 0.0).count();
    if count < 4 {
        return Err(Error::Unresolved(format!(
            "slit of width {width} m spans {count} samples (need at least 4)"
        )));
    }
    ComplexField::new(*grid, amplitude)
}

/// Normalized Hermite-Gauss function of order `n` at `t = x/sigma`, by the
/// stable three-term recurrence.
fn hermite_function(order: u32, t: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * t * t).exp();
    for k in 0..order {
        let k = k as f64;
        let next = (2.0 / (k + 1.0)).sqrt() * t * cur - (k / (k + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn smooth_mode(grid: &Grid, waist: f64, order: u32) -> Result<ComplexField> {
    if waist < 2.0 * grid.spacing() {
        return Err(Error::Unresolved(format!(
            "waist {waist} m is below two grid steps ({} m)",
            2.0 * grid.spacing()
        )));
    }
    let amplitude: Vec<Complex64> = grid
        .positions()
        .iter()
        .map(|&x| Complex64::new(hermite_function(order, x / waist), 0.0))
        .collect();
    let peak = amplitude.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
    let edge = amplitude[0].norm_sqr().max(amplitude[grid.n() - 1].norm_sqr());
    if edge > 1e-12 * peak {
        return Err(Error::SupportExceedsGrid(format!(
            "mode intensity at the grid edge is {:.3e} of its peak",
            edge / peak
        )));
    }
    ComplexField::new(*grid, amplitude)
}

/// Builds the normalized ensemble described by `spec` on `grid`.
pub fn make_state(spec: &FieldSpec, grid: &Grid) -> Result<EnsembleState> {
    spec.validate()?;
    match *spec {
        FieldSpec::Tophat { width_m } => EnsembleState::pure(slit(grid, 0.0, width_m)?),
        FieldSpec::DoubleSlit { spacing_m, slit_width_m, coherence } => {
            let left = slit(grid, -0.5 * spacing_m, slit_width_m)?;
            let right = slit(grid, 0.5 * spacing_m, slit_width_m)?;
            match coherence {
                Coherence::Coherent => {
                    let sum = left.amplitude.iter().zip(&right.amplitude).map(|(a, b)| a + b).collect();
                    EnsembleState::pure(ComplexField::new(*grid, sum)?)
                }
                Coherence::Incoherent => {
                    EnsembleState::new(vec![left.normalized()?, right.normalized()?], vec![0.5, 0.5])
                }
            }
        }
        FieldSpec::Gaussian { waist_m } => EnsembleState::pure(smooth_mode(grid, waist_m, 0)?),
        FieldSpec::HermiteGauss { waist_m, order } => EnsembleState::pure(smooth_mode(grid, waist_m, order)?),
    }
}

/// Statistical mixture `sum_i p_i rho_i` of states on a shared grid.
pub fn mix_states(states: &[EnsembleState], weights: &[f64]) -> Result<EnsembleState> {
    if states.is_empty() || states.len() != weights.len() {
        return Err(Error::InvalidEnsemble(format!(
            "{} states but {} weights",
            states.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidEnsemble("mixing weights must be non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidEnsemble(format!("mixing weights sum to {total}, expected 1")));
    }
    let grid = states[0].grid;
    if states.iter().any(|s| !s.grid.same_as(&grid)) {
        return Err(Error::GridMismatch("states live on different grids".into()));
    }
    let mut modes = Vec::new();
    let mut mode_weights = Vec::new();
    for (s, &p) in states.iter().zip(weights) {
        for (m, &w) in s.modes.iter().zip(&s.weights) {
            modes.push(m.clone());
            mode_weights.push(p * w);
        }
    }
    let sum: f64 = mode_weights.iter().sum();
    mode_weights.iter_mut().for_each(|w| *w /= sum);
    EnsembleState::from_parts(modes, mode_weights)
}

/// Mutual intensity `<E(x1) E*(x2)>` at the nearest grid samples.
pub fn correlation(state: &EnsembleState, x1: f64, x2: f64) -> Result<Complex64> {
    let i = state.grid.nearest_index(x1)?;
    let j = state.grid.nearest_index(x2)?;
    Ok(state.components().map(|(w, a)| w * a[i] * a[j].conj()).sum())
}

/// `sum_m w_m sum_j |E_mj|^2 * spacing`.
pub fn total_power(state: &EnsembleState) -> f64 {
    state.weights.iter().zip(&state.modes).map(|(w, m)| w * m.power()).sum()
}

/// Paraxial free-space propagation over `distance`.
///
/// Each mode is multiplied on the discrete spatial-frequency axis by
/// `exp(+i z kappa^2 / (2 k0))`; the exponent sign pairs with the
/// `exp(+2ikx')` Wigner kernel so that propagation shears phase space as
/// `W_z(x, k) = W_0(x - z k / k0, k)`. The grid is treated as periodic, so the
/// operation is exactly unitary and composes additively in `distance`.
pub fn fresnel_propagate(state: &EnsembleState, distance: f64, wavelength: f64) -> Result<EnsembleState> {
    if !(wavelength > 0.0) || !wavelength.is_finite() {
        return Err(Error::InvalidSpec(format!("wavelength must be positive, got {wavelength}")));
    }
    if !distance.is_finite() {
        return Err(Error::NonFinite("propagation distance".into()));
    }
    let grid = *state.grid();
    let n = grid.n();
    let dx = grid.spacing();
    let k0 = 2.0 * PI / wavelength;
    let k_max = PI / dx;
    if k_max >= k0 {
        return Err(Error::Aliasing(format!(
            "grid Nyquist wavevector {k_max:.4e} rad/m is not paraxial (k0 = {k0:.4e})"
        )));
    }
    let walk = distance.abs() * k_max / k0;
    if walk > grid.extent() / 4.0 {
        return Err(Error::Aliasing(format!(
            "walk-off {walk:.4e} m exceeds a quarter of the grid extent {:.4e} m",
            grid.extent()
        )));
    }

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let transfer: Vec<Complex64> = (0..n)
        .map(|q| {
            let signed = if q <= n / 2 { q as f64 } else { q as f64 - n as f64 };
            let kappa = 2.0 * PI * signed / (n as f64 * dx);
            Complex64::from_polar(1.0, distance * kappa * kappa / (2.0 * k0))
        })
        .collect();
    let scale = 1.0 / n as f64;
    state.map_modes(|m| {
        let mut buf = m.amplitude.clone();
        forward.process(&mut buf);
        buf.iter_mut().zip(&transfer).for_each(|(b, h)| *b *= h);
        inverse.process(&mut buf);
        buf.iter_mut().for_each(|b| *b *= scale);
        ComplexField::new(grid, buf)
    })
}
