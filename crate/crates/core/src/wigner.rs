//! Transverse spatial Wigner function of 1D ensembles.
//!
//! All routes use the 1D normalization
//! `W(x, k) = (1/pi) int dx' <E(x + x') E*(x - x')> exp(2ikx')`,
//! discretized with `x'` on the field grid and the field taken as zero off
//! the grid. On a grid of spacing `dx` the discrete `W` is periodic in `k`
//! with period `pi / dx`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Coherence, EnsembleState, FieldSpec};
use crate::grid::{Axis, Grid};
use crate::sagnac::{displace_phase_space, parity_reflect};

/// Largest FFT length the transform will plan.
const MAX_FFT_LEN: usize = 1 << 24;

/// Point of phase space: position [m] and transverse wavevector [rad/m].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub k: f64,
}

impl PhasePoint {
    pub fn new(x: f64, k: f64) -> Self {
        PhasePoint { x, k }
    }
}

/// Real Wigner function sampled on an `(x, k)` raster, `values[[ix, ik]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapRepr", into = "MapRepr")]
pub struct WignerMap {
    x_axis: Axis,
    k_axis: Axis,
    values: Array2<f64>,
    /// Largest discarded imaginary part of the quadrature.
    imag_residue: f64,
}

#[derive(Serialize, Deserialize)]
struct MapRepr {
    x_m: Axis,
    k_radpm: Axis,
    values: Vec<Vec<f64>>,
}

impl TryFrom<MapRepr> for WignerMap {
    type Error = Error;
    fn try_from(r: MapRepr) -> Result<Self> {
        let (nx, nk) = (r.x_m.len(), r.k_radpm.len());
        if r.values.len() != nx || r.values.iter().any(|row| row.len() != nk) {
            return Err(Error::Shape(format!("values do not form a {nx}x{nk} array")));
        }
        let flat: Vec<f64> = r.values.into_iter().flatten().collect();
        let values = Array2::from_shape_vec((nx, nk), flat).map_err(|e| Error::Shape(e.to_string()))?;
        WignerMap::new(r.x_m, r.k_radpm, values)
    }
}

impl From<WignerMap> for MapRepr {
    fn from(m: WignerMap) -> Self {
        let values = m.values.rows().into_iter().map(|r| r.to_vec()).collect();
        MapRepr { x_m: m.x_axis, k_radpm: m.k_axis, values }
    }
}

impl WignerMap {
    pub fn new(x_axis: Axis, k_axis: Axis, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (x_axis.len(), k_axis.len()) {
            return Err(Error::Shape(format!(
                "values are {:?}, axes are {}x{}",
                values.dim(),
                x_axis.len(),
                k_axis.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Wigner value".into()));
        }
        Ok(WignerMap { x_axis, k_axis, values, imag_residue: 0.0 })
    }

    pub fn x_axis(&self) -> &Axis {
        &self.x_axis
    }

    pub fn k_axis(&self) -> &Axis {
        &self.k_axis
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn imag_residue(&self) -> f64 {
        self.imag_residue
    }

    pub fn value(&self, ix: usize, ik: usize) -> f64 {
        self.values[[ix, ik]]
    }

    /// `sum W dx dk` with the axes' cell widths.
    pub fn integral(&self) -> f64 {
        let wx = self.x_axis.cell_widths();
        let wk = self.k_axis.cell_widths();
        self.values
            .rows()
            .into_iter()
            .zip(&wx)
            .map(|(row, dx)| dx * row.iter().zip(&wk).map(|(v, dk)| v * dk).sum::<f64>())
            .sum()
    }

    /// Largest `|W|` on the raster.
    pub fn peak(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Copy scaled so that `sum W dx dk = 1`.
    pub fn normalized(&self) -> Result<WignerMap> {
        let s = self.integral();
        if !(s.abs() > 0.0) || !s.is_finite() {
            return Err(Error::Reconstruction("map integral is zero; cannot normalize".into()));
        }
        Ok(self.map_values(|v| v / s))
    }

    pub fn map_values<F: Fn(f64) -> f64>(&self, f: F) -> WignerMap {
        WignerMap { values: self.values.mapv(f), ..self.clone() }
    }
}

/// `<E(x_j + m dx) E*(x_j - m dx)>` for `m` in `-(n-1)..=(n-1)`, stored at
/// `m + n - 1`, with the inclusive range of `m` where it can be non-zero.
fn correlation_row(state: &EnsembleState, j: usize) -> (Vec<Complex64>, Option<(isize, isize)>) {
    let n = state.grid().n() as isize;
    let j = j as isize;
    let mut row = vec![Complex64::new(0.0, 0.0); (2 * n - 1) as usize];
    let mut span: Option<(isize, isize)> = None;
    for (mode, (w, amp)) in state.modes().iter().zip(state.components()) {
        let Some((lo, hi)) = mode.support() else { continue };
        let (lo, hi) = (lo as isize, hi as isize);
        let m_lo = (lo - j).max(j - hi);
        let m_hi = (hi - j).min(j - lo);
        if m_lo > m_hi {
            continue;
        }
        span = Some(match span {
            None => (m_lo, m_hi),
            Some((a, b)) => (a.min(m_lo), b.max(m_hi)),
        });
        for m in m_lo..=m_hi {
            row[(m + n - 1) as usize] += w * amp[(j + m) as usize] * amp[(j - m) as usize].conj();
        }
    }
    (row, span)
}

fn x_indices(grid: &Grid, x_axis: &Axis) -> Result<Vec<usize>> {
    x_axis
        .values()
        .iter()
        .map(|&x| {
            let j = grid.nearest_index(x)?;
            let d = (grid.position(j) - x).abs();
            if d > 1e-6 * grid.spacing() {
                return Err(Error::OffGrid { value: x, distance: d });
            }
            Ok(j)
        })
        .collect()
}

fn finish(x_axis: &Axis, k_axis: &Axis, rows: Vec<(Vec<f64>, f64)>) -> Result<WignerMap> {
    let imag = rows.iter().fold(0.0_f64, |m, (_, r)| m.max(*r));
    let flat: Vec<f64> = rows.into_iter().flat_map(|(v, _)| v).collect();
    let values = Array2::from_shape_vec((x_axis.len(), k_axis.len()), flat).map_err(|e| Error::Shape(e.to_string()))?;
    let mut map = WignerMap::new(x_axis.clone(), k_axis.clone(), values)?;
    map.imag_residue = imag;
    Ok(map)
}

fn check_inputs(state: &EnsembleState, k_axis: &Axis) -> Result<()> {
    state.check_finite()?;
    if k_axis.is_empty() {
        return Err(Error::InvalidGrid("empty k axis".into()));
    }
    Ok(())
}

/// Direct quadrature at arbitrary `k`; `x_axis` values must be grid samples.
pub fn wigner_transform_direct(state: &EnsembleState, x_axis: &Axis, k_axis: &Axis) -> Result<WignerMap> {
    check_inputs(state, k_axis)?;
    let grid = *state.grid();
    let n = grid.n() as isize;
    let dx = grid.spacing();
    let idx = x_indices(&grid, x_axis)?;
    let ks = k_axis.values();
    let rows: Vec<(Vec<f64>, f64)> = idx
        .par_iter()
        .map(|&j| {
            let (row, span) = correlation_row(state, j);
            let mut vals = vec![0.0; ks.len()];
            let mut residue = 0.0_f64;
            if let Some((lo, hi)) = span {
                for (v, &k) in vals.iter_mut().zip(ks) {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for m in lo..=hi {
                        acc += row[(m + n - 1) as usize] * Complex64::from_polar(1.0, 2.0 * k * m as f64 * dx);
                    }
                    let w = acc * dx / PI;
                    *v = w.re;
                    residue = residue.max(w.im.abs());
                }
            }
            (vals, residue)
        })
        .collect();
    finish(x_axis, k_axis, rows)
}

/// FFT length and per-sample bins when `k_axis` lies on the native frequency
/// grid `q pi / (L dx)` of some `L >= 2n - 1`.
fn fft_layout(grid: &Grid, k_axis: &Axis) -> Option<(usize, Vec<usize>)> {
    let dx = grid.spacing();
    let step = k_axis.uniform_spacing().or_else(|| (k_axis.len() == 1).then_some(PI / (2.0 * grid.n() as f64 * dx)))?;
    let ratio = PI / (step * dx);
    let base = ratio.round();
    if base < 1.0 || (ratio - base).abs() > 1e-9 * ratio {
        return None;
    }
    let base = base as usize;
    let min_len = 2 * grid.n() - 1;
    let stride = min_len.div_ceil(base);
    let len = base * stride;
    if len > MAX_FFT_LEN {
        return None;
    }
    let mut bins = Vec::with_capacity(k_axis.len());
    for &k in k_axis.values() {
        let q = k / step;
        let qr = q.round();
        if (q - qr).abs() > 1e-6 {
            return None;
        }
        bins.push(((qr as i64 * stride as i64).rem_euclid(len as i64)) as usize);
    }
    Some((len, bins))
}

/// True when [`wigner_transform_fft`] can evaluate this axis.
pub fn fft_compatible(grid: &Grid, k_axis: &Axis) -> bool {
    fft_layout(grid, k_axis).is_some()
}

/// Same quadrature as [`wigner_transform_direct`], evaluated by one FFT per
/// `x` row. `k_axis` must be uniform with spacing `pi / (L0 dx)` for an
/// integer `L0` and contain only multiples of that spacing; the correlation
/// row is zero-padded to a multiple of `L0` of at least `2n - 1` samples.
pub fn wigner_transform_fft(state: &EnsembleState, x_axis: &Axis, k_axis: &Axis) -> Result<WignerMap> {
    check_inputs(state, k_axis)?;
    let grid = *state.grid();
    let (len, bins) = fft_layout(&grid, k_axis).ok_or_else(|| {
        Error::Unsupported("k axis does not lie on an FFT frequency grid for this field grid".into())
    })?;
    let n = grid.n() as isize;
    let dx = grid.spacing();
    let idx = x_indices(&grid, x_axis)?;
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(len);
    let rows: Vec<(Vec<f64>, f64)> = idx
        .par_iter()
        .map_init(
            || vec![Complex64::new(0.0, 0.0); len],
            |buf, &j| {
                let (row, span) = correlation_row(state, j);
                let Some((lo, hi)) = span else {
                    return (vec![0.0; bins.len()], 0.0);
                };
                buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
                for m in lo..=hi {
                    buf[m.rem_euclid(len as isize) as usize] = row[(m + n - 1) as usize];
                }
                fft.process(buf);
                let mut residue = 0.0_f64;
                let vals = bins
                    .iter()
                    .map(|&b| {
                        let w = buf[b] * dx / PI;
                        residue = residue.max(w.im.abs());
                        w.re
                    })
                    .collect();
                (vals, residue)
            },
        )
        .collect();
    finish(x_axis, k_axis, rows)
}

/// Wigner map on an arbitrary raster; uses the FFT route when the `k` axis
/// allows it and the direct sum otherwise.
pub fn wigner_map(state: &EnsembleState, x_axis: &Axis, k_axis: &Axis) -> Result<WignerMap> {
    if fft_compatible(state.grid(), k_axis) && k_axis.len() > 16 {
        wigner_transform_fft(state, x_axis, k_axis)
    } else {
        wigner_transform_direct(state, x_axis, k_axis)
    }
}

/// Wigner map with the field grid as the `x` axis.
pub fn wigner_transform(state: &EnsembleState, k_axis: &Axis) -> Result<WignerMap> {
    wigner_map(state, &Axis::from(state.grid()), k_axis)
}

/// Symmetric `k` axis of `n_k` samples covering one full period
/// `[-pi/(2dx), pi/(2dx))` of the discrete Wigner function.
pub fn nyquist_k_axis(grid: &Grid, n_k: usize) -> Result<Grid> {
    Grid::with_spacing(n_k, PI / (n_k as f64 * grid.spacing()), 0.0)
}

/// Displaced-parity route: `W(x, k) = (1/pi) Re sum_m w_m <F_m | Pi F_m>` with
/// `F = D(-x, -k) E`. The position is rounded to the nearest grid sample.
pub fn wigner_at_point_parity(state: &EnsembleState, p: PhasePoint) -> Result<f64> {
    state.check_finite()?;
    let grid = state.grid();
    let limit = PI / grid.spacing();
    if !(p.k.abs() < limit) {
        return Err(Error::BeyondNyquist { k: p.k, limit });
    }
    let displaced = displace_phase_space(state, -p.x, -p.k)?;
    let reflected = parity_reflect(&displaced)?;
    let overlap: f64 = displaced
        .components()
        .zip(reflected.modes())
        .map(|((w, f), r)| w * f.iter().zip(&r.amplitude).map(|(a, b)| (a.conj() * b).re).sum::<f64>())
        .sum();
    Ok(overlap * grid.spacing() / PI)
}

/// Normalized single slit of width `a` centered at the origin.
fn slit_wigner(a: f64, x: f64, k: f64) -> f64 {
    let base = a - 2.0 * x.abs();
    if base < 0.0 {
        return 0.0;
    }
    let ka = k * a;
    if ka.abs() < 1e-12 {
        base / (PI * a)
    } else {
        (k * base).sin() / (PI * ka)
    }
}

/// Closed-form Wigner functions of the ideal (continuous) test fields.
pub fn analytic_wigner(spec: &FieldSpec, p: PhasePoint) -> Result<f64> {
    spec.validate()?;
    let PhasePoint { x, k } = p;
    match *spec {
        FieldSpec::Tophat { width_m } => Ok(slit_wigner(width_m, x, k)),
        FieldSpec::Gaussian { waist_m: s } => Ok((-(x * x) / (s * s) - k * k * s * s).exp() / PI),
        FieldSpec::DoubleSlit { spacing_m: d, slit_width_m: w, coherence } => {
            let lobes = slit_wigner(w, x - 0.5 * d, k) + slit_wigner(w, x + 0.5 * d, k);
            let cross = match coherence {
                Coherence::Coherent => 2.0 * (k * d).cos() * slit_wigner(w, x, k),
                Coherence::Incoherent => 0.0,
            };
            Ok(0.5 * (lobes + cross))
        }
        FieldSpec::HermiteGauss { .. } => {
            Err(Error::Unsupported("no closed-form Wigner function for hermite_gauss".into()))
        }
    }
}

/// [`analytic_wigner`] on a raster.
pub fn analytic_map(spec: &FieldSpec, x_axis: &Axis, k_axis: &Axis) -> Result<WignerMap> {
    let mut values = Array2::zeros((x_axis.len(), k_axis.len()));
    for (i, &x) in x_axis.values().iter().enumerate() {
        for (j, &k) in k_axis.values().iter().enumerate() {
            values[[i, j]] = analytic_wigner(spec, PhasePoint::new(x, k))?;
        }
    }
    WignerMap::new(x_axis.clone(), k_axis.clone(), values)
}

/// `sum_k W(x, k) dk` for every `x`; equals the intensity when the `k` axis
/// spans one full period.
pub fn marginal_x(map: &WignerMap) -> Vec<f64> {
    let wk = map.k_axis.cell_widths();
    map.values.rows().into_iter().map(|r| r.iter().zip(&wk).map(|(v, dk)| v * dk).sum()).collect()
}

/// `sum_x W(x, k) dx` for every `k`; equals [`spectral_intensity`] when the
/// `x` axis covers the support.
pub fn marginal_k(map: &WignerMap) -> Vec<f64> {
    let wx = map.x_axis.cell_widths();
    map.values.columns().into_iter().map(|c| c.iter().zip(&wx).map(|(v, dx)| v * dx).sum()).collect()
}

/// Spectral intensity matched to the Wigner kernel,
/// `|E~(k)|^2` with `E~(k) = (2 pi)^(-1/2) int E(x) exp(ikx) dx`, folded onto
/// the `pi/dx` period of the discrete Wigner function:
/// `|E~(k)|^2 + |E~(k + pi/dx)|^2`.
pub fn spectral_intensity(state: &EnsembleState, k: f64) -> f64 {
    let grid = state.grid();
    let dx = grid.spacing();
    let x = grid.positions();
    let alias = k + PI / dx;
    let amp2 = |amp: &[Complex64], q: f64| {
        amp.iter().zip(&x).map(|(a, x)| a * Complex64::from_polar(1.0, q * x)).sum::<Complex64>().norm_sqr()
    };
    state
        .components()
        .map(|(w, amp)| w * (amp2(amp, k) + amp2(amp, alias)))
        .sum::<f64>()
        * dx
        * dx
        / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_state, mix_states};

    fn grid() -> Grid {
        Grid::new(512, 1.6384e-3, 0.0).unwrap()
    }

    fn tophat() -> EnsembleState {
        make_state(&FieldSpec::Tophat { width_m: 0.40e-3 }, &grid()).unwrap()
    }

    fn single(state: &EnsembleState, x: f64, k: f64) -> f64 {
        let m = wigner_transform_direct(state, &Axis::from_values(vec![x]).unwrap(), &Axis::from_values(vec![k]).unwrap()).unwrap();
        m.value(0, 0)
    }

    /// Brute-force Riemann sum of the correlation integral straight from the
    /// mode amplitudes, independent of the row bookkeeping.
    fn brute(state: &EnsembleState, j: usize, k: f64) -> f64 {
        let g = state.grid();
        let n = g.n() as isize;
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, a) in state.components() {
            for m in -n..=n {
                let (p, q) = (j as isize + m, j as isize - m);
                if p < 0 || q < 0 || p >= n || q >= n {
                    continue;
                }
                acc += w * a[p as usize] * a[q as usize].conj() * Complex64::new(0.0, 2.0 * k * m as f64 * g.spacing()).exp();
            }
        }
        acc.re * g.spacing() / PI
    }

    #[test]
    fn tophat_origin_value() {
        let s = tophat();
        assert!((single(&s, 0.0, 0.0) - 1.0 / PI).abs() < 1e-12);
        assert!((wigner_at_point_parity(&s, PhasePoint::new(0.0, 0.0)).unwrap() - 1.0 / PI).abs() < 1e-12);
        assert!(wigner_at_point_parity(&s, PhasePoint::new(0.5e-3, 0.0)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn tophat_first_zero() {
        // 0.40 mm = 125 samples, so the discrete kernel is a Dirichlet kernel
        // with its first zero exactly at pi / a.
        let s = tophat();
        let kz = PI / 0.40e-3;
        assert!((kz - 7853.98).abs() < 0.01);
        let j = s.grid().center_index();
        assert!(brute(&s, j, kz).abs() < 1e-12);
        assert!(single(&s, 0.0, kz).abs() < 1e-12);
        assert!(single(&s, 0.0, 0.9 * kz) > 0.0 && single(&s, 0.0, 1.1 * kz) < 0.0);
    }

    #[test]
    fn odd_mode_is_negative_at_origin() {
        let g = Grid::new(256, 1.024e-3, 0.0).unwrap();
        let s = make_state(&FieldSpec::HermiteGauss { waist_m: 0.05e-3, order: 1 }, &g).unwrap();
        let j = g.center_index();
        assert!((brute(&s, j, 0.0) + 1.0 / PI).abs() < 1e-12);
        assert!((single(&s, 0.0, 0.0) + 1.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn direct_matches_brute_force() {
        let g = Grid::new(128, 0.512e-3, 0.0).unwrap();
        let a = make_state(&FieldSpec::Gaussian { waist_m: 0.03e-3 }, &g).unwrap();
        let b = make_state(&FieldSpec::Tophat { width_m: 0.1e-3 }, &g).unwrap();
        let s = mix_states(&[a, b], &[0.4, 0.6]).unwrap();
        for (j, k) in [(64usize, 0.0), (70, 1.3e4), (50, -4e4), (90, 2.2e4)] {
            let v = single(&s, g.position(j), k);
            assert!((v - brute(&s, j, k)).abs() < 1e-12);
        }
    }

    #[test]
    fn fft_matches_direct() {
        let g = Grid::new(96, 0.48e-3, 0.0).unwrap();
        let spec = FieldSpec::DoubleSlit { spacing_m: 0.2e-3, slit_width_m: 0.05e-3, coherence: Coherence::Coherent };
        let s = make_state(&spec, &g).unwrap();
        let xs = Axis::from(g);
        for n_k in [192, 64, 400] {
            let ks = Axis::from(nyquist_k_axis(&g, n_k).unwrap());
            let f = wigner_transform_fft(&s, &xs, &ks).unwrap();
            let d = wigner_transform_direct(&s, &xs, &ks).unwrap();
            let peak = d.peak();
            for (a, b) in f.values().iter().zip(d.values()) {
                assert!((a - b).abs() < 1e-9 * peak);
            }
            assert!(f.imag_residue() < 1e-9 && d.imag_residue() < 1e-9);
        }
        let odd = Axis::from_values(vec![0.0, 1234.5]).unwrap();
        assert!(wigner_transform_fft(&s, &xs, &odd).is_err());
    }

    #[test]
    fn off_grid_x_rejected() {
        let s = tophat();
        let r = wigner_transform_direct(&s, &Axis::from_values(vec![1.1e-6]).unwrap(), &Axis::from_values(vec![0.0]).unwrap());
        assert!(matches!(r, Err(Error::OffGrid { .. })));
        assert!(matches!(
            wigner_at_point_parity(&s, PhasePoint::new(0.0, 1e7)),
            Err(Error::BeyondNyquist { .. })
        ));
    }

    #[test]
    fn analytic_forms() {
        let t = FieldSpec::Tophat { width_m: 0.40e-3 };
        assert!((analytic_wigner(&t, PhasePoint::new(0.0, 0.0)).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert_eq!(analytic_wigner(&t, PhasePoint::new(0.2e-3, 0.0)).unwrap(), 0.0);
        assert!(analytic_wigner(&t, PhasePoint::new(0.1e-3, 0.0)).unwrap() > 0.0);
        let g = FieldSpec::Gaussian { waist_m: 1e-4 };
        assert!((analytic_wigner(&g, PhasePoint::new(1e-4, 0.0)).unwrap() - (-1.0f64).exp() / PI).abs() < 1e-15);
        let hg = FieldSpec::HermiteGauss { waist_m: 1e-4, order: 2 };
        assert!(matches!(analytic_wigner(&hg, PhasePoint::new(0.0, 0.0)), Err(Error::Unsupported(_))));

        let ds = FieldSpec::DoubleSlit { spacing_m: 0.28e-3, slit_width_m: 0.06e-3, coherence: Coherence::Coherent };
        let period = 2.0 * PI / 0.28e-3;
        assert!((period - 22440.0).abs() < 1.0);
        assert!((period / (2.0 * PI / 633e-9) - 2.26e-3).abs() < 0.01e-3);
        let at = |k: f64| analytic_wigner(&ds, PhasePoint::new(0.0, k)).unwrap();
        // cos(kd) flips sign every half period
        assert!(at(0.0) > 0.0 && at(0.5 * period) < 0.0);
        // lobes at +-d/2 with half the single-slit peak
        let lobe = analytic_wigner(&ds, PhasePoint::new(0.14e-3, 0.0)).unwrap();
        assert!((lobe - 0.5 / PI).abs() < 1e-12);
        let inc = FieldSpec::DoubleSlit { spacing_m: 0.28e-3, slit_width_m: 0.06e-3, coherence: Coherence::Incoherent };
        assert_eq!(analytic_wigner(&inc, PhasePoint::new(0.0, 1e3)).unwrap(), 0.0);
    }

    #[test]
    fn fringe_period_of_constructed_double_slit() {
        let g = Grid::new(768, 1.024e-3, 0.0).unwrap();
        let spec = FieldSpec::DoubleSlit { spacing_m: 0.28e-3, slit_width_m: 0.06e-3, coherence: Coherence::Coherent };
        let s = make_state(&spec, &g).unwrap();
        let period = 2.0 * PI / 0.28e-3;
        let at = |k: f64| single(&s, 0.0, k);
        // maxima of cos(kd) at multiples of the period, minima in between
        assert!(at(0.0) > at(0.25 * period));
        assert!(at(0.5 * period) < 0.0);
        assert!(at(period) > at(0.75 * period) && at(period) > at(1.25 * period));
    }

    #[test]
    fn marginals_of_tophat() {
        let s = tophat();
        let g = *s.grid();
        let ks = Axis::from(nyquist_k_axis(&g, 2 * g.n()).unwrap());
        let map = wigner_transform(&s, &ks).unwrap();
        let mx = marginal_x(&map);
        let intensity = s.intensity();
        for (m, i) in mx.iter().zip(&intensity) {
            assert!((m - i).abs() <= 1e-6 * 2500.0);
        }
        assert!(mx.iter().any(|m| (m - 2500.0).abs() < 1e-6));
        assert!((mx.iter().sum::<f64>() * g.spacing() - 1.0).abs() < 1e-6);
        assert!((map.integral() - 1.0).abs() < 1e-6);
        let mk = marginal_k(&map);
        for (m, k) in mk.iter().zip(ks.values()).step_by(37) {
            let e = spectral_intensity(&s, *k);
            assert!((m - e).abs() < 1e-9 * 2e-4_f64.max(e), "{m} {e}");
        }
    }

    #[test]
    fn gaussian_momentum_marginal() {
        let g = Grid::new(256, 1.024e-3, 0.0).unwrap();
        let sigma = 0.05e-3;
        let s = make_state(&FieldSpec::Gaussian { waist_m: sigma }, &g).unwrap();
        let ks = Axis::from(nyquist_k_axis(&g, 512).unwrap());
        let map = wigner_transform(&s, &ks).unwrap();
        let mk = marginal_k(&map);
        let peak = sigma / PI.sqrt();
        for (m, &k) in mk.iter().zip(ks.values()) {
            let exact = (-(k * k) * sigma * sigma).exp() * peak;
            assert!((m - exact).abs() < 1e-9 * peak, "{k}: {m} vs {exact}");
        }
    }

    #[test]
    fn serde_roundtrip() {
        let s = tophat();
        let xs = Axis::from_values(vec![-0.96e-4, 0.0, 1.6e-4]).unwrap();
        let ks = Axis::from_values(vec![-1e4, 0.0, 5e3, 7e3]).unwrap();
        let m = wigner_map(&s, &xs, &ks).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: WignerMap = serde_json::from_str(&json).unwrap();
        assert_eq!(back.values(), m.values());
        assert_eq!(back.x_axis(), m.x_axis());
    }
}
