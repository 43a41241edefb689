//! JSON experiment description tying together field, grid, interferometer,
//! detector, raster and outputs.
//!
//! Unknown keys are rejected. Validation errors name the offending key and,
//! when the source text is available, the line it sits on.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::field::{make_state, EnsembleState, FieldSpec};
use crate::grid::Grid;
use crate::reconstruct::BackgroundMethod;
use crate::sagnac::{DetectorModel, InterferometerConfig, Uniformity};
use crate::scan::ScanConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub field: FieldSpec,
    pub grid: GridSection,
    pub interferometer: InterferometerSection,
    pub detector: DetectorSection,
    pub scan: ScanSection,
    #[serde(default)]
    pub outputs: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub extent_m: f64,
    #[serde(default)]
    pub center_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferometerSection {
    pub wavelength_m: f64,
    #[serde(default = "default_na")]
    pub na_limit: f64,
}

fn default_na() -> f64 {
    InterferometerConfig::default().na_limit
}

/// Either `photon_flux_hz` or `background_rate_hz` (the count rate far from
/// the state in phase space, `eta * flux / 2`) must be given, not both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub eta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photon_flux_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background_rate_hz: Option<f64>,
    #[serde(default)]
    pub dark_rate_hz: f64,
    #[serde(default)]
    pub uniformity: Uniformity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasterAxis {
    pub n: usize,
    pub extent: f64,
    #[serde(default)]
    pub center: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundKind {
    #[default]
    Calibration,
    Plateau,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    /// Mirror translations [m].
    pub x_points: RasterAxis,
    /// Beam tilts [rad].
    pub theta_points: RasterAxis,
    pub dwell_s: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub noiseless: bool,
    #[serde(default)]
    pub background: BackgroundKind,
    /// Blocked-arm integration time per arm [s]; defaults to the whole raster
    /// time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default = "yes")]
    pub json: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn yes() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: default_dir(), csv: true, json: true }
    }
}

/// A config problem pinned to a dotted key path such as `scan.dwell_s`.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub key: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: `{}`: {}", self.key, self.message),
            None => write!(f, "`{}`: {}", self.key, self.message),
        }
    }
}

impl ConfigError {
    fn new(key: &str, message: impl fmt::Display) -> Self {
        ConfigError { key: key.to_string(), line: None, message: message.to_string() }
    }

    fn at(mut self, text: &str) -> Self {
        self.line = key_line(text, &self.key);
        self
    }
}

/// 1-based line of a dotted key: each segment is searched for as `"name"`
/// after the line where the previous segment was found.
pub fn key_line(text: &str, key: &str) -> Option<usize> {
    let lines: Vec<&str> = text.lines().collect();
    let mut from = 0;
    let mut found = None;
    for part in key.split('.') {
        let needle = format!("\"{part}\"");
        let hit = (from..lines.len()).find(|&i| lines[i].contains(&needle))?;
        found = Some(hit + 1);
        from = hit;
    }
    found
}

fn check(ok: bool, key: &str, message: impl FnOnce() -> String) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::new(key, message()))
    }
}

fn positive(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

impl ExperimentConfig {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| ConfigError {
            key: "<document>".into(),
            line: Some(e.line()),
            message: e.to_string(),
        })?;
        cfg.validate().map_err(|e| e.at(text))?;
        Ok(cfg)
    }

    /// Checks every section before any computation runs.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let field_key = |e: Error| {
            let msg = e.to_string();
            let key = ["width_m", "spacing_m", "slit_width_m", "waist_m"]
                .into_iter()
                .find(|k| msg.contains(k))
                .map(|k| format!("field.{k}"))
                .unwrap_or_else(|| "field".into());
            ConfigError::new(&key, msg)
        };
        self.field.validate().map_err(field_key)?;

        let g = &self.grid;
        check(g.n >= 2, "grid.n", || format!("need at least 2 samples, got {}", g.n))?;
        check(positive(g.extent_m), "grid.extent_m", || format!("must be positive, got {}", g.extent_m))?;
        check(g.center_m.is_finite(), "grid.center_m", || "must be finite".into())?;

        let i = &self.interferometer;
        check(positive(i.wavelength_m), "interferometer.wavelength_m", || {
            format!("must be positive, got {}", i.wavelength_m)
        })?;
        check(i.na_limit > 0.0 && i.na_limit <= 1.0, "interferometer.na_limit", || {
            format!("must lie in (0, 1], got {}", i.na_limit)
        })?;

        let d = &self.detector;
        check(d.eta > 0.0 && d.eta <= 1.0, "detector.eta", || format!("must lie in (0, 1], got {}", d.eta))?;
        match (d.photon_flux_hz, d.background_rate_hz) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::new("detector.background_rate_hz", "give either photon_flux_hz or background_rate_hz, not both"))
            }
            (None, None) => return Err(ConfigError::new("detector", "one of photon_flux_hz or background_rate_hz is required")),
            (Some(f), None) => check(f >= 0.0 && f.is_finite(), "detector.photon_flux_hz", || format!("must be >= 0, got {f}"))?,
            (None, Some(r)) => {
                check(r >= 0.0 && r.is_finite(), "detector.background_rate_hz", || format!("must be >= 0, got {r}"))?
            }
        }
        check(d.dark_rate_hz >= 0.0 && d.dark_rate_hz.is_finite(), "detector.dark_rate_hz", || {
            format!("must be >= 0, got {}", d.dark_rate_hz)
        })?;
        self.detector().map_err(|e| ConfigError::new("detector.uniformity", e))?;

        let s = &self.scan;
        check(positive(s.dwell_s), "scan.dwell_s", || format!("must be positive, got {}", s.dwell_s))?;
        for (name, axis) in [("scan.x_points", &s.x_points), ("scan.theta_points", &s.theta_points)] {
            check(axis.n >= 2, &format!("{name}.n"), || format!("need at least 2 points, got {}", axis.n))?;
            check(positive(axis.extent), &format!("{name}.extent"), || format!("must be positive, got {}", axis.extent))?;
            check(axis.center.is_finite(), &format!("{name}.center"), || "must be finite".into())?;
        }
        if let Some(t) = s.calibration_s {
            check(positive(t), "scan.calibration_s", || format!("must be positive, got {t}"))?;
        }
        let scan = self.scan_config().map_err(|e| ConfigError::new("scan", e))?;
        let icfg = self.interferometer();
        let worst = scan.theta_points.min().abs().max(scan.theta_points.max().abs());
        check(worst.sin() <= i.na_limit, "scan.theta_points.extent", || {
            format!("tilt {worst} rad exceeds the numerical aperture {}", i.na_limit)
        })?;
        let grid = self.field_grid().map_err(|e| ConfigError::new("grid", e))?;
        let k_nyquist = std::f64::consts::PI / grid.spacing();
        check(icfg.k0() * worst.sin() < k_nyquist, "scan.theta_points.extent", || {
            format!("tilt {worst} rad is beyond the field grid's Nyquist wavevector {k_nyquist} rad/m")
        })?;
        check(
            scan.x_points.min() >= grid.min() && scan.x_points.max() <= grid.max(),
            "scan.x_points.extent",
            || "mirror translations exceed the field grid".into(),
        )?;

        let o = &self.outputs;
        check(o.csv || o.json, "outputs", || "at least one of csv or json must be enabled".into())?;
        Ok(())
    }

    pub fn field_grid(&self) -> crate::Result<Grid> {
        Grid::new(self.grid.n, self.grid.extent_m, self.grid.center_m)
    }

    pub fn state(&self) -> crate::Result<EnsembleState> {
        make_state(&self.field, &self.field_grid()?)
    }

    pub fn interferometer(&self) -> InterferometerConfig {
        InterferometerConfig { wavelength: self.interferometer.wavelength_m, na_limit: self.interferometer.na_limit }
    }

    pub fn detector(&self) -> crate::Result<DetectorModel> {
        let d = &self.detector;
        let base = match (d.photon_flux_hz, d.background_rate_hz) {
            (Some(f), _) => DetectorModel::new(d.eta, f, d.dark_rate_hz)?,
            (None, Some(r)) => DetectorModel::from_background_rate(d.eta, r, d.dark_rate_hz)?,
            (None, None) => return Err(Error::InvalidDetector("no photon flux or background rate given".into())),
        };
        base.with_uniformity(d.uniformity)
    }

    pub fn scan_config(&self) -> crate::Result<ScanConfig> {
        let s = &self.scan;
        Ok(ScanConfig {
            x_points: Grid::new(s.x_points.n, s.x_points.extent, s.x_points.center)?,
            theta_points: Grid::new(s.theta_points.n, s.theta_points.extent, s.theta_points.center)?,
            dwell: s.dwell_s,
            seed: s.seed,
            noiseless: s.noiseless,
        })
    }

    /// Background method; `noiseless` selects exact blocked-arm rates.
    pub fn background_method(&self, noiseless: bool) -> crate::Result<BackgroundMethod> {
        Ok(match self.scan.background {
            BackgroundKind::Calibration => BackgroundMethod::Calibration {
                detector: self.detector()?,
                seed: self.scan.seed,
                noiseless,
                integration: self.scan.calibration_s,
            },
            BackgroundKind::Plateau => BackgroundMethod::Plateau,
        })
    }
}
