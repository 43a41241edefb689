//! Uniform sample grids and general (possibly non-uniform) axes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform 1D sample grid with positions `center + (j - n/2) * spacing`.
///
/// With integer division `n/2`, sample `n/2` sits exactly on `center`. For
/// even `n` the grid has one more sample on the negative side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    center: f64,
    spacing: f64,
}

impl Grid {
    /// Builds a grid of `n` samples covering `extent` (spacing `extent / n`).
    pub fn new(n: usize, extent: f64, center: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 samples, got {n}")));
        }
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::InvalidGrid(format!("extent must be positive, got {extent}")));
        }
        if !center.is_finite() {
            return Err(Error::InvalidGrid(format!("center must be finite, got {center}")));
        }
        Ok(Grid { n, center, spacing: extent / n as f64 })
    }

    /// Builds a grid directly from its spacing.
    pub fn with_spacing(n: usize, spacing: f64, center: f64) -> Result<Self> {
        Self::new(n, spacing * n as f64, center).map(|g| Grid { spacing, ..g })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn extent(&self) -> f64 {
        self.spacing * self.n as f64
    }

    /// Index of the sample located at `center`.
    pub fn center_index(&self) -> usize {
        self.n / 2
    }

    pub fn position(&self, j: usize) -> f64 {
        self.center + (j as f64 - (self.n / 2) as f64) * self.spacing
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.position(j)).collect()
    }

    pub fn min(&self) -> f64 {
        self.position(0)
    }

    pub fn max(&self) -> f64 {
        self.position(self.n - 1)
    }

    /// Signed (possibly fractional) sample coordinate of `x`.
    pub fn fractional_index(&self, x: f64) -> f64 {
        (x - self.center) / self.spacing + (self.n / 2) as f64
    }

    /// Nearest sample index to `x`, accepted if it lies within `spacing/2`
    /// (plus rounding slack) of a sample on the grid.
    pub fn nearest_index(&self, x: f64) -> Result<usize> {
        let f = self.fractional_index(x);
        let r = f.round();
        let distance = (f - r).abs() * self.spacing;
        if !f.is_finite() || r < 0.0 || r > (self.n - 1) as f64 || distance > 0.5 * self.spacing * (1.0 + 1e-9) {
            return Err(Error::OffGrid { value: x, distance });
        }
        Ok(r as usize)
    }

    /// Sample index (relative to the grid) of the origin `x = 0`, if the origin
    /// falls on a sample.
    pub fn origin_offset(&self) -> Result<isize> {
        let f = self.fractional_index(0.0);
        let r = f.round();
        if (f - r).abs() > 1e-9 {
            return Err(Error::AsymmetricGrid(format!(
                "origin lies between samples (fractional index {f})"
            )));
        }
        Ok(r as isize)
    }

    /// True when both grids describe the same sample positions.
    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n
            && (self.spacing - other.spacing).abs() <= 1e-12 * self.spacing.abs()
            && (self.center - other.center).abs() <= 1e-9 * self.spacing.abs()
    }
}

/// Sample positions along one axis of a phase-space map.
///
/// Uniform axes remember their spacing; non-uniform axes (for example
/// `k = k0 sin(theta)` built from a uniform tilt raster) carry only the
/// positions. Integration weights use midpoint cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spacing: Option<f64>,
}

impl Axis {
    /// Explicit sample positions (strictly increasing, at least one).
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidGrid("axis has no samples".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("axis sample".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("axis samples must be strictly increasing".into()));
        }
        Ok(Axis { values, spacing: None })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn uniform_spacing(&self) -> Option<f64> {
        self.spacing
    }

    /// Integration weight of each sample. Uniform axes use the spacing;
    /// otherwise half the distance between neighbours (one-sided at the ends).
    /// A single-sample axis has unit weight.
    pub fn cell_widths(&self) -> Vec<f64> {
        let n = self.values.len();
        if let Some(d) = self.spacing {
            return vec![d; n];
        }
        if n == 1 {
            return vec![1.0];
        }
        let v = &self.values;
        (0..n)
            .map(|i| match i {
                0 => v[1] - v[0],
                _ if i == n - 1 => v[n - 1] - v[n - 2],
                _ => 0.5 * (v[i + 1] - v[i - 1]),
            })
            .collect()
    }

    /// Index of the sample closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if (v - x).abs() < (self.values[best] - x).abs() {
                best = i;
            }
        }
        best
    }

    /// Agreement of two axes sample by sample, relative to the axis scale.
    pub fn matches(&self, other: &Axis, rel_tol: f64) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let scale = self
            .values
            .iter()
            .chain(other.values.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        self.values
            .iter()
            .zip(&other.values)
            .all(|(a, b)| (a - b).abs() <= rel_tol * scale)
    }
}

impl From<Grid> for Axis {
    fn from(g: Grid) -> Self {
        Axis { values: g.positions(), spacing: Some(g.spacing()) }
    }
}

impl From<&Grid> for Axis {
    fn from(g: &Grid) -> Self {
        Axis::from(*g)
    }
}
