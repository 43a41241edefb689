//! CSV and JSON files for count maps, Wigner maps and reports.
//!
//! Floats are written in shortest round-trip form, so identical data gives
//! byte-identical files. Every write goes to a temporary file in the target
//! directory first and is renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::grid::Axis;
use crate::scan::CountMap;
use crate::wigner::WignerMap;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Fs { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

fn fs_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Fs { path: path.to_path_buf(), source }
}

fn format_err(path: &Path, message: impl ToString) -> IoError {
    IoError::Format { path: path.to_path_buf(), message: message.to_string() }
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(fs_err(dir))?;
    let name = path.file_name().ok_or_else(|| format_err(path, "not a file path"))?.to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(fs_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| format_err(path, e))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(fs_err(path))?;
    serde_json::from_str(&text).map_err(|e| format_err(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct CountRow {
    ix: usize,
    itheta: usize,
    x_m: f64,
    theta_rad: f64,
    counts: f64,
    mean_rate_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct WignerRow {
    x_m: f64,
    k_radpm: f64,
    w: f64,
}

fn to_csv<R: Serialize>(rows: impl Iterator<Item = R>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("serializing plain numbers cannot fail");
    }
    w.into_inner().expect("writing to memory cannot fail")
}

fn from_csv<R: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<Vec<R>, IoError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    reader
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| format_err(path, format!("data row {}: {e}", i + 1))))
        .collect()
}

/// Count map as CSV, one row per raster point in `ix`-major order.
pub fn counts_to_csv(map: &CountMap) -> Vec<u8> {
    let (nx, nt) = map.shape();
    to_csv((0..nx).flat_map(|i| (0..nt).map(move |j| (i, j))).map(|(i, j)| CountRow {
        ix: i,
        itheta: j,
        x_m: map.x_m[i],
        theta_rad: map.theta_rad[j],
        counts: map.counts[[i, j]],
        mean_rate_hz: map.mean_rate_hz[[i, j]],
    }))
}

/// Raw columns of a count CSV, checked for a complete `ix`-major raster.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    pub x_m: Vec<f64>,
    pub theta_rad: Vec<f64>,
    pub counts: Array2<f64>,
    pub mean_rate_hz: Array2<f64>,
}

/// Reads a count CSV. With `shape = Some((nx, ntheta))` the raster size is
/// enforced, otherwise it is inferred from the largest indices.
pub fn read_counts_csv(path: &Path, shape: Option<(usize, usize)>) -> Result<CountTable, IoError> {
    let text = fs::read_to_string(path).map_err(fs_err(path))?;
    let rows: Vec<CountRow> = from_csv(path, &text)?;
    if rows.is_empty() {
        return Err(format_err(path, "no data rows"));
    }
    let (nx, nt) = shape.unwrap_or_else(|| {
        (rows.iter().map(|r| r.ix).max().unwrap_or(0) + 1, rows.iter().map(|r| r.itheta).max().unwrap_or(0) + 1)
    });
    if rows.len() != nx * nt {
        return Err(format_err(path, format!("expected {} rows for a {nx}x{nt} raster, found {}", nx * nt, rows.len())));
    }
    let mut x_m = vec![0.0; nx];
    let mut theta_rad = vec![0.0; nt];
    let mut counts = Array2::zeros((nx, nt));
    let mut rates = Array2::zeros((nx, nt));
    for (p, r) in rows.iter().enumerate() {
        if (r.ix, r.itheta) != (p / nt, p % nt) {
            return Err(format_err(path, format!("data row {} has index ({}, {}), expected ({}, {})", p + 1, r.ix, r.itheta, p / nt, p % nt)));
        }
        if r.itheta == 0 {
            x_m[r.ix] = r.x_m;
        } else if r.x_m != x_m[r.ix] {
            return Err(format_err(path, format!("data row {}: x_m differs within row ix = {}", p + 1, r.ix)));
        }
        if r.ix == 0 {
            theta_rad[r.itheta] = r.theta_rad;
        } else if r.theta_rad != theta_rad[r.itheta] {
            return Err(format_err(path, format!("data row {}: theta_rad differs within column itheta = {}", p + 1, r.itheta)));
        }
        counts[[r.ix, r.itheta]] = r.counts;
        rates[[r.ix, r.itheta]] = r.mean_rate_hz;
    }
    Ok(CountTable { x_m, theta_rad, counts, mean_rate_hz: rates })
}

/// Wigner map as CSV with columns `x_m, k_radpm, w`, `x`-major.
pub fn wigner_to_csv(map: &WignerMap) -> Vec<u8> {
    let xs = map.x_axis().values();
    let ks = map.k_axis().values();
    to_csv(
        (0..xs.len())
            .flat_map(|i| (0..ks.len()).map(move |j| (i, j)))
            .map(|(i, j)| WignerRow { x_m: xs[i], k_radpm: ks[j], w: map.value(i, j) }),
    )
}

pub fn read_wigner_csv(path: &Path) -> Result<WignerMap, IoError> {
    let text = fs::read_to_string(path).map_err(fs_err(path))?;
    let rows: Vec<WignerRow> = from_csv(path, &text)?;
    if rows.is_empty() {
        return Err(format_err(path, "no data rows"));
    }
    let nk = rows.iter().position(|r| r.x_m != rows[0].x_m).unwrap_or(rows.len());
    if !rows.len().is_multiple_of(nk) {
        return Err(format_err(path, format!("{} rows do not form complete x rows of {nk} k samples", rows.len())));
    }
    let nx = rows.len() / nk;
    let ks: Vec<f64> = rows[..nk].iter().map(|r| r.k_radpm).collect();
    let xs: Vec<f64> = (0..nx).map(|i| rows[i * nk].x_m).collect();
    for (p, r) in rows.iter().enumerate() {
        if r.x_m != xs[p / nk] || r.k_radpm != ks[p % nk] {
            return Err(format_err(path, format!("data row {} breaks the x-major raster layout", p + 1)));
        }
    }
    let values = Array2::from_shape_vec((nx, nk), rows.iter().map(|r| r.w).collect()).map_err(|e| format_err(path, e))?;
    let x_axis = Axis::from_values(xs).map_err(|e| format_err(path, e))?;
    let k_axis = Axis::from_values(ks).map_err(|e| format_err(path, e))?;
    WignerMap::new(x_axis, k_axis, values).map_err(|e| format_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::scan::ScanConfig;

    fn sample_map() -> CountMap {
        let scan = ScanConfig {
            x_points: Grid::new(3, 3e-4, 0.0).unwrap(),
            theta_points: Grid::new(2, 2e-3, 0.0).unwrap(),
            dwell: 0.1,
            seed: 0,
            noiseless: true,
        };
        let rates = Array2::from_shape_fn((3, 2), |(i, j)| 1e5 + 0.1 * (i * 2 + j) as f64 + 1.0 / 3.0);
        CountMap::from_mean_rates(scan, scan.x_points.positions(), scan.theta_points.positions(), rates).unwrap()
    }

    #[test]
    fn counts_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("counts.csv");
        let map = sample_map();
        let bytes = counts_to_csv(&map);
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("ix,itheta,x_m,theta_rad,counts,mean_rate_hz\n"));
        assert_eq!(text.lines().count(), 7);
        write_atomic(&path, &bytes).unwrap();
        let t = read_counts_csv(&path, Some((3, 2))).unwrap();
        assert_eq!(t.counts, map.counts);
        assert_eq!(t.mean_rate_hz, map.mean_rate_hz);
        assert_eq!(t.x_m, map.x_m);
        assert_eq!(t.theta_rad, map.theta_rad);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1, "temporary file left behind");
    }

    #[test]
    fn truncated_counts_are_diagnosed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("counts.csv");
        let text = String::from_utf8(counts_to_csv(&sample_map())).unwrap();
        let cut: Vec<&str> = text.lines().take(5).collect();
        fs::write(&path, cut.join("\n")).unwrap();
        let msg = read_counts_csv(&path, Some((3, 2))).unwrap_err().to_string();
        assert!(msg.contains("expected 6 rows") && msg.contains("found 4"), "{msg}");
        let cut: Vec<&str> = text.lines().take(4).collect();
        fs::write(&path, cut.join("\n")).unwrap();
        assert!(read_counts_csv(&path, None).is_err());
        fs::write(&path, "ix,itheta,x_m\n0,0,1.0\n").unwrap();
        assert!(read_counts_csv(&path, None).is_err());
    }

    #[test]
    fn wigner_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        let xs = Axis::from_values(vec![-1e-4, 0.0, 1e-4]).unwrap();
        let ks = Axis::from_values(vec![-10.5, 0.0, 10.5, 21.0]).unwrap();
        let values = Array2::from_shape_fn((3, 4), |(i, j)| (i as f64 - 1.0) / 7.0 + j as f64 * 1e-17);
        let map = WignerMap::new(xs, ks, values).unwrap();
        write_atomic(&path, &wigner_to_csv(&map)).unwrap();
        let back = read_wigner_csv(&path).unwrap();
        assert_eq!(back.values(), map.values());
        assert_eq!(back.x_axis().values(), map.x_axis().values());
        assert_eq!(back.k_axis().values(), map.k_axis().values());
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/counts.json");
        let map = sample_map();
        write_json(&path, &map).unwrap();
        let back: CountMap = read_json(&path).unwrap();
        assert_eq!(back, map);
    }
}
