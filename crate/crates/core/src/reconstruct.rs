//! From raw counts back to a normalized Wigner map, plus feature extraction
//! and map comparison.
//!
//! The count rate is `constant - eta F (pi/2) W`, so the map is recovered by
//! subtracting the constant term, flipping the sign and normalizing to unit
//! phase-space integral.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldKind;
use crate::grid::Axis;
use crate::sagnac::{DetectorModel, InterferometerConfig};
use crate::scan::{poisson, CountMap};
use crate::wigner::{marginal_x, WignerMap};

/// Fraction of the peak that bounds a feature's support.
pub const SUPPORT_FRACTION: f64 = 0.05;
/// Upper end of the flank samples used for the base-width line fit.
pub const FLANK_UPPER_FRACTION: f64 = 0.9;
/// Relative width of the border frame used by the plateau estimate.
pub const BORDER_FRACTION: f64 = 0.1;

/// How the constant (non-interfering) part of the count rate is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BackgroundMethod {
    /// Blocked-arm runs: each arm alone gives `eta F / 4`, measured for
    /// `integration` seconds each (defaults to the full raster time), plus a
    /// dark run with both arms blocked.
    Calibration { detector: DetectorModel, seed: u64, noiseless: bool, integration: Option<f64> },
    /// Mean count over the outer border frame of the raster, where `W` should
    /// vanish.
    Plateau,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundEstimate {
    /// Constant term in counts per raster point.
    pub counts: f64,
    pub warning: Option<String>,
}

/// Stream ids reserved for calibration runs; raster points use
/// `(ix << 32) | itheta`.
const CALIBRATION_STREAMS: [u64; 3] = [u64::MAX, u64::MAX - 1, u64::MAX - 2];

fn border_width(n: usize) -> usize {
    ((BORDER_FRACTION * n as f64).ceil() as usize).max(1)
}

fn border_cells(nx: usize, nt: usize) -> Result<Vec<(usize, usize)>> {
    if nx < 3 || nt < 3 {
        return Err(Error::Reconstruction(format!("raster {nx}x{nt} has no border frame")));
    }
    let (bx, bt) = (border_width(nx), border_width(nt));
    Ok((0..nx)
        .flat_map(|i| (0..nt).map(move |j| (i, j)))
        .filter(|&(i, j)| i < bx || i >= nx - bx || j < bt || j >= nt - bt)
        .collect())
}

pub fn estimate_background(map: &CountMap, method: &BackgroundMethod) -> Result<BackgroundEstimate> {
    let (nx, nt) = map.shape();
    if nx == 0 || nt == 0 {
        return Err(Error::Reconstruction("empty count map".into()));
    }
    let dwell = map.config.dwell;
    match *method {
        BackgroundMethod::Calibration { detector, seed, noiseless, integration } => {
            detector.validate()?;
            let arm = detector.arm_rate() + detector.dark_rate;
            if noiseless {
                return Ok(BackgroundEstimate { counts: (2.0 * detector.arm_rate() + detector.dark_rate) * dwell, warning: None });
            }
            let t = integration.unwrap_or(dwell * (nx * nt) as f64);
            if !(t > 0.0) {
                return Err(Error::Reconstruction(format!("calibration time must be positive, got {t}")));
            }
            let draw = |stream: u64, mean: f64| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(stream);
                poisson(&mut rng, mean)
            };
            let c1 = draw(CALIBRATION_STREAMS[0], arm * t)?;
            let c2 = draw(CALIBRATION_STREAMS[1], arm * t)?;
            let dark = draw(CALIBRATION_STREAMS[2], detector.dark_rate * t)?;
            Ok(BackgroundEstimate { counts: (c1 + c2 - dark) * dwell / t, warning: None })
        }
        BackgroundMethod::Plateau => {
            let cells = border_cells(nx, nt)?;
            let vals: Vec<f64> = cells.iter().map(|&c| map.counts[c]).collect();
            let len = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / len;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (len - 1.0).max(1.0);
            // Poisson frame: variance ~ mean; noiseless frame: exactly flat.
            let flat = if map.sampled {
                var <= mean.max(1.0) * (1.0 + 5.0 * (2.0 / len).sqrt())
            } else {
                vals.iter().all(|v| (v - mean).abs() <= 1e-6 * mean.abs().max(1.0))
            };
            let warning = (!flat).then(|| {
                "border frame is not flat: the raster may not leave the state's support, plateau background is biased"
                    .to_string()
            });
            Ok(BackgroundEstimate { counts: mean, warning })
        }
    }
}

/// Scalar features read off a Wigner map. Lengths in metres, wavevectors in
/// rad/m, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureSet {
    /// Base width of the main peak of the `k = 0` section, from a line fit
    /// of its flanks between 5% and 90% of the peak extrapolated to zero.
    pub support_width: Option<f64>,
    /// Distance between the centroids of the two outer lobes of the
    /// position marginal (double slit).
    pub lobe_separation: Option<f64>,
    /// Period along `k` of the central `x = 0` section (double slit); absent
    /// when the fringe visibility is below 5%.
    pub fringe_period_k: Option<f64>,
    /// `arcsin(k_zero / k0)` for the first zero of the divergence section,
    /// averaged over both sides.
    pub first_zero_theta: Option<f64>,
    /// Angle between the first zeros on either side of `k = 0`.
    pub full_width_theta: Option<f64>,
    /// Central fringe amplitude over the sum of the lobe peaks, in [0, 1]
    /// (double slit).
    pub fringe_visibility: Option<f64>,
}

impl FeatureSet {
    fn get(v: Option<f64>, name: &str) -> Result<f64> {
        v.ok_or_else(|| Error::FeatureAbsent(name.to_string()))
    }

    pub fn support_width(&self) -> Result<f64> {
        Self::get(self.support_width, "support_width")
    }

    pub fn lobe_separation(&self) -> Result<f64> {
        Self::get(self.lobe_separation, "lobe_separation")
    }

    pub fn fringe_period_k(&self) -> Result<f64> {
        Self::get(self.fringe_period_k, "fringe_period_k")
    }

    pub fn first_zero_theta(&self) -> Result<f64> {
        Self::get(self.first_zero_theta, "first_zero_theta")
    }

    pub fn full_width_theta(&self) -> Result<f64> {
        Self::get(self.full_width_theta, "full_width_theta")
    }

    pub fn fringe_visibility(&self) -> Result<f64> {
        Self::get(self.fringe_visibility, "fringe_visibility")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapMetrics {
    pub l2_relative: f64,
    pub pearson: f64,
    /// Distance between the two maps' peaks, in raster steps.
    pub peak_shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub wigner: WignerMap,
    /// Constant term removed from the counts.
    pub background: f64,
    /// Counts per unit of `W`; estimates `eta F dwell pi/2` times the
    /// raster's share of the phase-space integral.
    pub scale: f64,
    /// Shot-noise standard deviation of each `W` sample.
    pub sigma: Vec<Vec<f64>>,
    /// Mean of the reconstructed map over the border frame, in units of its
    /// peak; a uniform offset signals a mis-estimated background.
    pub plateau_residual: f64,
    pub features: Option<FeatureSet>,
    pub comparison: Option<MapMetrics>,
    pub warnings: Vec<String>,
}

/// `W = -(counts - background) / scale` on the axes `(x, k0 sin theta)`,
/// with `scale` chosen so that `sum W dx dk = 1`.
pub fn reconstruct_wigner(map: &CountMap, background: f64, cfg: &InterferometerConfig) -> Result<ReconstructionReport> {
    if !(background >= 0.0) || !background.is_finite() {
        return Err(Error::Reconstruction(format!("background must be >= 0, got {background}")));
    }
    cfg.validate()?;
    if map.counts.iter().all(|c| *c == 0.0) {
        return Err(Error::Reconstruction("all-zero count map; normalization undefined".into()));
    }
    let k0 = cfg.k0();
    let x_axis = Axis::from_values(map.x_m.clone())?;
    let k_axis = Axis::from_values(map.theta_rad.iter().map(|t| k0 * t.sin()).collect())?;
    let raw = WignerMap::new(x_axis, k_axis, map.counts.mapv(|c| background - c))?;
    let scale = raw.integral();
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Reconstruction(format!("phase-space integral of the signal is {scale}; cannot normalize")));
    }
    let wigner = raw.map_values(|v| v / scale);
    let sigma_arr: Array2<f64> = map.counts.mapv(|c| c.max(0.0).sqrt() / scale);

    let (nx, nt) = map.shape();
    let mut warnings = Vec::new();
    let peak = wigner.peak();
    let plateau_residual = match border_cells(nx, nt) {
        Ok(cells) => {
            let len = cells.len() as f64;
            let offset = cells.iter().map(|&c| wigner.values()[c]).sum::<f64>() / len;
            let noise = cells.iter().map(|&c| sigma_arr[c].powi(2)).sum::<f64>().sqrt() / len;
            if offset.abs() > 5.0 * noise + 0.01 * peak {
                warnings.push(format!(
                    "uniform offset {:.3e} of peak over the border frame; background may be mis-estimated",
                    offset / peak
                ));
            }
            offset / peak
        }
        Err(_) => 0.0,
    };
    let sigma = sigma_arr.rows().into_iter().map(|r| r.to_vec()).collect();
    Ok(ReconstructionReport { wigner, background, scale, sigma, plateau_residual, features: None, comparison: None, warnings })
}

/// Least-squares line through `(x, y)` points, returning its zero.
fn line_zero(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 || sxy == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(mx - my / slope)
}

/// Outer edge of the peak at `ip` walking in direction `step`.
fn flank_edge(xs: &[f64], s: &[f64], ip: usize, step: isize) -> Option<f64> {
    let peak = s[ip];
    let lo = SUPPORT_FRACTION * peak;
    let hi = FLANK_UPPER_FRACTION * peak;
    let mut pts = Vec::new();
    let mut i = ip as isize + step;
    let mut last_inside = ip;
    while i >= 0 && (i as usize) < s.len() && s[i as usize] > lo {
        let v = s[i as usize];
        if v <= hi {
            pts.push((xs[i as usize], v));
        }
        last_inside = i as usize;
        i += step;
    }
    line_zero(&pts).or_else(|| {
        // too few flank samples for a fit: interpolate the threshold crossing
        let j = i.clamp(0, s.len() as isize - 1) as usize;
        if j == last_inside {
            return Some(xs[j]);
        }
        let (x1, y1, x2, y2) = (xs[last_inside], s[last_inside], xs[j], s[j]);
        Some(x1 + (y1 - lo) / (y1 - y2) * (x2 - x1))
    })
}

/// First zero crossing of `s` walking from `i0` in direction `step`.
fn first_zero(ks: &[f64], s: &[f64], i0: usize, step: isize) -> Option<f64> {
    let mut i = i0 as isize;
    loop {
        let j = i + step;
        if j < 0 || j as usize >= s.len() {
            return None;
        }
        let (a, b) = (s[i as usize], s[j as usize]);
        if a > 0.0 && b <= 0.0 {
            return Some(ks[i as usize] + a / (a - b) * (ks[j as usize] - ks[i as usize]));
        }
        i = j;
    }
}

/// Centroid of the contiguous region around the maximum of `m[range]` that
/// stays above 5% of that maximum.
fn lobe_centroid(xs: &[f64], m: &[f64], range: std::ops::Range<usize>) -> Option<f64> {
    let (start, end) = (range.start, range.end);
    let ip = (start..end).max_by(|&a, &b| m[a].total_cmp(&m[b]))?;
    let top = m[ip];
    if !(top > 0.0) {
        return None;
    }
    let cut = SUPPORT_FRACTION * top;
    let mut lo = ip;
    while lo > start && m[lo - 1] > cut {
        lo -= 1;
    }
    let mut hi = ip;
    while hi + 1 < end && m[hi + 1] > cut {
        hi += 1;
    }
    let (num, den) = (lo..=hi).fold((0.0, 0.0), |(n, d), i| (n + xs[i] * m[i], d + m[i]));
    Some(num / den)
}

/// Period of the dominant oscillation of `s(k)`: Hann-windowed Fourier
/// magnitude over trial frequencies, located by the power-weighted centroid
/// of the strongest peak above half its maximum.
fn dominant_period(ks: &[f64], s: &[f64]) -> Option<f64> {
    let n = ks.len();
    if n < 8 {
        return None;
    }
    let span = ks[n - 1] - ks[0];
    let widths = Axis::from_values(ks.to_vec()).ok()?.cell_widths();
    let weighted: Vec<f64> = (0..n)
        .map(|i| {
            let hann = 0.5 - 0.5 * (2.0 * PI * (ks[i] - ks[0]) / span).cos();
            s[i] * hann * widths[i]
        })
        .collect();
    let f_min = 1.5 / span;
    let f_max = 0.5 * (n - 1) as f64 / span;
    let trials = 4096;
    let freqs: Vec<f64> = (0..trials).map(|t| f_min + (f_max - f_min) * t as f64 / (trials - 1) as f64).collect();
    let power: Vec<f64> = freqs
        .iter()
        .map(|&f| {
            let (re, im) = ks.iter().zip(&weighted).fold((0.0, 0.0), |(re, im), (k, v)| {
                let ph = 2.0 * PI * f * k;
                (re + v * ph.cos(), im - v * ph.sin())
            });
            re * re + im * im
        })
        .collect();
    let ip = (0..trials).max_by(|&a, &b| power[a].total_cmp(&power[b]))?;
    if !(power[ip] > 0.0) {
        return None;
    }
    let half = 0.5 * power[ip];
    let mut lo = ip;
    while lo > 0 && power[lo - 1] > half {
        lo -= 1;
    }
    let mut hi = ip;
    while hi + 1 < trials && power[hi + 1] > half {
        hi += 1;
    }
    let (num, den) = (lo..=hi).fold((0.0, 0.0), |(a, b), i| (a + freqs[i] * power[i], b + power[i]));
    Some(den / num)
}

/// Features of a Wigner map for the given field family. `k0` converts
/// wavevectors to angles.
pub fn extract_features(map: &WignerMap, kind: FieldKind, cfg: &InterferometerConfig) -> Result<FeatureSet> {
    let xs = map.x_axis().values();
    let ks = map.k_axis().values();
    let (nx, nk) = (xs.len(), ks.len());
    if nx < 3 || nk < 3 {
        return Err(Error::Reconstruction(format!("raster {nx}x{nk} is too small for feature extraction")));
    }
    let k0 = cfg.k0();
    let ik0 = map.k_axis().nearest(0.0);
    let ix0 = map.x_axis().nearest(0.0);
    let section: Vec<f64> = (0..nx).map(|i| map.value(i, ik0)).collect();
    let ip = (0..nx).max_by(|&a, &b| section[a].total_cmp(&section[b])).expect("non-empty");
    if !(section[ip] > 0.0) {
        return Err(Error::Reconstruction("k = 0 section has no positive peak".into()));
    }

    let mut f = FeatureSet {
        support_width: flank_edge(xs, &section, ip, 1).zip(flank_edge(xs, &section, ip, -1)).map(|(r, l)| r - l),
        ..FeatureSet::default()
    };

    let mut divergence_x = ip;
    if kind == FieldKind::DoubleSlit {
        let marginal = marginal_x(map);
        let split = xs.iter().position(|x| *x >= 0.0).unwrap_or(nx / 2);
        let left = lobe_centroid(xs, &marginal, 0..split);
        let right = lobe_centroid(xs, &marginal, split..nx);
        let (Some(l), Some(r)) = (left, right) else {
            return Err(Error::FeatureAbsent("double-slit lobes not found in the position marginal".into()));
        };
        f.lobe_separation = Some(r - l);
        divergence_x = map.x_axis().nearest(r);

        let center: Vec<f64> = (0..nk).map(|j| map.value(ix0, j)).collect();
        let period = dominant_period(ks, &center);
        f.fringe_period_k = period;
        let window = 0.5 * period.unwrap_or(ks[nk - 1] - ks[0]);
        let inside: Vec<f64> = (0..nk).filter(|&j| (ks[j] - ks[ik0]).abs() <= window).map(|j| center[j]).collect();
        let max = inside.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = inside.iter().copied().fold(f64::INFINITY, f64::min);
        let lobes = map.value(map.x_axis().nearest(l), ik0) + map.value(divergence_x, ik0);
        if lobes > 0.0 {
            let visibility = (0.5 * (max - min) / lobes).clamp(0.0, 1.0);
            f.fringe_visibility = Some(visibility);
            if visibility < SUPPORT_FRACTION {
                // no interference term: the spectral peak is noise
                f.fringe_period_k = None;
            }
        }
    }

    let div: Vec<f64> = (0..nk).map(|j| map.value(divergence_x, j)).collect();
    let to_theta = |k: f64| (k / k0).clamp(-1.0, 1.0).asin();
    let right = first_zero(ks, &div, ik0, 1).map(to_theta);
    let left = first_zero(ks, &div, ik0, -1).map(to_theta);
    f.first_zero_theta = match (left, right) {
        (Some(l), Some(r)) => Some(0.5 * (r - l)),
        (Some(l), None) => Some(-l),
        (None, Some(r)) => Some(r),
        (None, None) => None,
    };
    f.full_width_theta = left.zip(right).map(|(l, r)| r - l);
    Ok(f)
}

/// L2 distance relative to `b`, Pearson correlation and peak displacement.
pub fn compare_maps(a: &WignerMap, b: &WignerMap) -> Result<MapMetrics> {
    if !a.x_axis().matches(b.x_axis(), 1e-9) || !a.k_axis().matches(b.k_axis(), 1e-9) {
        return Err(Error::AxisMismatch("maps are sampled on different rasters".into()));
    }
    let (va, vb) = (a.values(), b.values());
    let diff: f64 = va.iter().zip(vb.iter()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm_b: f64 = vb.iter().map(|y| y * y).sum::<f64>().sqrt();
    let l2_relative = if norm_b > 0.0 { diff / norm_b } else if diff == 0.0 { 0.0 } else { f64::INFINITY };

    let n = va.len() as f64;
    let (ma, mb) = (va.sum() / n, vb.sum() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in va.iter().zip(vb.iter()) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    let pearson = if saa > 0.0 && sbb > 0.0 { sab / (saa * sbb).sqrt() } else { 0.0 };

    let argmax = |v: &Array2<f64>| {
        let mut best = (0, 0);
        for ((i, j), x) in v.indexed_iter() {
            if x.abs() > v[best].abs() {
                best = (i, j);
            }
        }
        best
    };
    let (pa, pb) = (argmax(va), argmax(vb));
    let peak_shift = ((pa.0 as f64 - pb.0 as f64).powi(2) + (pa.1 as f64 - pb.1 as f64).powi(2)).sqrt();
    Ok(MapMetrics { l2_relative, pearson, peak_shift })
}
