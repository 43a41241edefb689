//! Acceptance suite. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line per criterion and exits non-zero if any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sagnac_wigner::config::ExperimentConfig;
use sagnac_wigner::io::{counts_to_csv, read_wigner_csv};
use sagnac_wigner::reconstruct::{compare_maps, FeatureSet};
use sagnac_wigner::scan::effective_x;
use sagnac_wigner::wigner::{analytic_map, nyquist_k_axis, spectral_intensity};
use sagnac_wigner::{
    estimate_background, extract_features, fresnel_propagate, interfere, make_state, marginal_k, marginal_x,
    reconstruct_wigner, run_scan, sample_counts, wigner_at_point_parity, wigner_map, wigner_transform, Axis,
    Coherence, CountMap, EnsembleState, FieldSpec, Grid, MirrorSetting, PhasePoint, ScanConfig, WignerMap,
};

const PRESETS: [&str; 4] = ["tophat", "double_slit", "double_slit_incoherent", "gaussian"];

type Outcome = Result<String, String>;

fn preset(name: &str) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(format!("{name}.json"));
    ExperimentConfig::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_time(start: Instant, limit: Duration, detail: String) -> Outcome {
    let t = start.elapsed();
    ensure(t < limit, format!("{detail}; {:.2} s (limit {} s)", t.as_secs_f64(), limit.as_secs()))
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    d / b.iter().map(|y| y * y).sum::<f64>().sqrt()
}

/// `(effective x, k0 sin theta)` axes of a scan on a field grid.
fn raster_axes(scan: &ScanConfig, grid: &Grid, k0: f64) -> (Axis, Axis) {
    let xs = Axis::from_values(effective_x(scan, grid)).unwrap();
    let ks = Axis::from_values(scan.theta_points.positions().iter().map(|t| k0 * t.sin()).collect()).unwrap();
    (xs, ks)
}

struct Reconstruction {
    wigner: WignerMap,
    sigma: Vec<Vec<f64>>,
    features: FeatureSet,
    analytic: WignerMap,
}

fn noisy_reconstruction(cfg: &ExperimentConfig) -> Reconstruction {
    let state = cfg.state().unwrap();
    let scan = cfg.scan_config().unwrap();
    let det = cfg.detector().unwrap();
    let icfg = cfg.interferometer();
    let counts = run_scan(&state, &scan, &det, &icfg).unwrap();
    assert!(counts.sampled);
    let bg = estimate_background(&counts, &cfg.background_method(false).unwrap()).unwrap();
    let report = reconstruct_wigner(&counts, bg.counts, &icfg).unwrap();
    let features = extract_features(&report.wigner, cfg.field.kind(), &icfg).unwrap();
    let analytic = analytic_map(&cfg.field, report.wigner.x_axis(), report.wigner.k_axis()).unwrap();
    Reconstruction { wigner: report.wigner, sigma: report.sigma, features, analytic }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let grid = Grid::new(256, 2.56e-3, 0.0).unwrap();
    let fields = [
        ("tophat", FieldSpec::Tophat { width_m: 0.4e-3 }),
        ("gaussian", FieldSpec::Gaussian { waist_m: 0.1e-3 }),
        ("hermite_gauss(1)", FieldSpec::HermiteGauss { waist_m: 0.1e-3, order: 1 }),
        (
            "coherent double slit",
            FieldSpec::DoubleSlit { spacing_m: 0.28e-3, slit_width_m: 0.06e-3, coherence: Coherence::Coherent },
        ),
        (
            "incoherent double slit",
            FieldSpec::DoubleSlit { spacing_m: 0.28e-3, slit_width_m: 0.06e-3, coherence: Coherence::Incoherent },
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dx = grid.spacing();
    let k_lim = 0.5 * PI / dx;
    let mut worst: f64 = 0.0;
    for (name, spec) in &fields {
        let state = make_state(spec, &grid).map_err(|e| format!("{name}: {e}"))?;
        for _ in 0..100 {
            let x = rng.random_range(-40i32..=40) as f64 * dx;
            let k = rng.random_range(-k_lim..k_lim);
            let parity = wigner_at_point_parity(&state, PhasePoint::new(x, k)).map_err(|e| format!("{name}: {e}"))?;
            let xs = Axis::from_values(vec![x]).unwrap();
            let ks = Axis::from_values(vec![k]).unwrap();
            let direct = wigner_map(&state, &xs, &ks).map_err(|e| format!("{name}: {e}"))?.value(0, 0);
            worst = worst.max((parity - direct).abs());
        }
    }
    let detail = format!("5 fields x 100 points on n=256, max |parity - transform| = {worst:.2e} (limit 1e-9)");
    if worst >= 1e-9 {
        return Err(detail);
    }
    within_time(start, Duration::from_secs(10), detail)
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let a = 0.4e-3;
    let cases = [
        ("tophat", FieldSpec::Tophat { width_m: a }, a / 401.0),
        (
            "double slit",
            FieldSpec::DoubleSlit { spacing_m: 0.28e-3, slit_width_m: 0.06e-3, coherence: Coherence::Coherent },
            4.0e-6 / 3.0,
        ),
        ("gaussian", FieldSpec::Gaussian { waist_m: 0.1e-3 }, 2.0e-6),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, spec, dx) in cases {
        let grid = Grid::with_spacing(1024, dx, 0.0).unwrap();
        let state = make_state(&spec, &grid).map_err(|e| format!("{name}: {e}"))?;
        let ks = Axis::from(Grid::with_spacing(128, PI / (2048.0 * dx), 0.0).unwrap());
        let numeric = wigner_transform(&state, &ks).map_err(|e| format!("{name}: {e}"))?;
        let exact = analytic_map(&spec, numeric.x_axis(), &ks).unwrap();
        let peak = exact.peak();
        let err = numeric.values().iter().zip(exact.values().iter()).fold(0.0_f64, |m, (p, q)| m.max((p - q).abs()));
        ok &= err < 1e-3 * peak;
        parts.push(format!("{name} {:.2e}", err / peak));
    }
    let detail = format!("max |numeric - closed form| / peak at n=1024: {} (limit 1e-3)", parts.join(", "));
    if !ok {
        return Err(detail);
    }
    within_time(start, Duration::from_secs(30), detail)
}

fn criterion_3() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for name in PRESETS {
        let cfg = preset(name);
        let state = cfg.state().unwrap();
        let grid = *state.grid();
        let ks = Axis::from(nyquist_k_axis(&grid, 2 * grid.n()).unwrap());
        let map = wigner_transform(&state, &ks).unwrap();
        let ex = rel_l2(&marginal_x(&map), &state.intensity());
        let spectrum: Vec<f64> = ks.values().iter().map(|&k| spectral_intensity(&state, k)).collect();
        let ek = rel_l2(&marginal_k(&map), &spectrum);
        let en = (map.integral() - 1.0).abs();
        ok &= ex < 1e-6 && ek < 1e-6 && en < 1e-6;
        parts.push(format!("{name} x {ex:.1e} k {ek:.1e} norm {en:.1e}"));
    }
    ensure(ok, format!("marginal rel-L2 and |integral - 1| (limit 1e-6): {}", parts.join("; ")))
}

fn criterion_4() -> Outcome {
    let cfg = preset("tophat");
    let state = cfg.state().unwrap();
    let scan = cfg.scan_config().unwrap();
    let det = cfg.detector().unwrap();
    let icfg = cfg.interferometer();
    let (xs, ks) = raster_axes(&scan, state.grid(), icfg.k0());
    let w = wigner_map(&state, &xs, &ks).unwrap();
    let peak = w.peak();
    let (mut ratios, mut n1s, mut n2s) = (Vec::new(), Vec::new(), Vec::new());
    for (i, &x) in scan.x_points.positions().iter().enumerate() {
        for (j, &t) in scan.theta_points.positions().iter().enumerate() {
            let r = interfere(&state, &MirrorSetting::new(x, t), &det, &icfg).unwrap();
            n1s.push(r.n1);
            n2s.push(r.n2);
            if w.value(i, j).abs() > 1e-6 * peak {
                ratios.push(r.n12 / w.value(i, j));
            }
        }
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = ratios.iter().fold(0.0_f64, |m, r| m.max((r / mean - 1.0).abs()));
    let expected = -det.eta * det.photon_flux * PI / 2.0;
    let n1_exact = n1s.iter().all(|v| *v == n1s[0]);
    let n2_exact = n2s.iter().all(|v| *v == n2s[0]);
    ensure(
        spread < 1e-9 && n1_exact && n2_exact,
        format!(
            "64x64 raster: n12/W spread {spread:.1e} over {} points (limit 1e-9), ratio/(-eta F pi/2) = {:.12}; n1 identical: {n1_exact}, n2 identical: {n2_exact}",
            ratios.len(),
            mean / expected
        ),
    )
}

/// Divergence candidates against `lambda/(2 s)` and `lambda/s`.
fn divergence_check(f: &FeatureSet, size: f64, lambda: f64, label: &str) -> (bool, String) {
    let first = f.first_zero_theta.unwrap_or(f64::NAN);
    let full = f.full_width_theta.unwrap_or(f64::NAN);
    let (p1, p2) = (lambda / (2.0 * size), lambda / size);
    let (e1, e2) = ((first / p1 - 1.0).abs(), (full / p2 - 1.0).abs());
    (
        e1 < 0.05 && e2 < 0.05,
        format!(
            "{label}: first zero {:.3} mrad vs {:.3} ({:.1}%), full width {:.3} mrad vs {:.3} ({:.1}%)",
            first * 1e3,
            p1 * 1e3,
            e1 * 100.0,
            full * 1e3,
            p2 * 1e3,
            e2 * 100.0
        ),
    )
}

fn criterion_5() -> (Outcome, (bool, String)) {
    let start = Instant::now();
    let cfg = preset("tophat");
    let r = noisy_reconstruction(&cfg);
    let pearson = compare_maps(&r.wigner, &r.analytic).unwrap().pearson;
    let step = cfg.scan_config().unwrap().x_points.spacing();
    let width = r.features.support_width.unwrap_or(f64::NAN);
    let width_ok = (width - 0.4e-3).abs() <= step;

    // k = 0 section from the center outward to the support edge on both sides
    let ik = r.wigner.k_axis().nearest(0.0);
    let xs = r.wigner.x_axis().values();
    let ic = r.wigner.x_axis().nearest(0.0);
    let mut violations = 0;
    let mut checked = 0;
    for dir in [1isize, -1] {
        let mut i = ic as isize;
        loop {
            let j = i + dir;
            if j < 0 || j as usize >= xs.len() || xs[j as usize].abs() > 0.2e-3 {
                break;
            }
            let (a, b) = (i as usize, j as usize);
            let noise = (r.sigma[a][ik].powi(2) + r.sigma[b][ik].powi(2)).sqrt();
            checked += 1;
            if r.wigner.value(b, ik) > r.wigner.value(a, ik) + 3.0 * noise {
                violations += 1;
            }
            i = j;
        }
    }
    let lambda = cfg.interferometer.wavelength_m;
    let divergence = divergence_check(&r.features, 0.4e-3, lambda, "tophat a=0.40 mm");
    let detail = format!(
        "pearson {pearson:.5} (> 0.99); support width {:.2} um vs 400 um, step {:.2} um; ridge: {violations}/{checked} steps rise by more than 3 sigma",
        width * 1e6,
        step * 1e6
    );
    let ok = pearson > 0.99 && width_ok && violations == 0;
    let outcome = if ok { within_time(start, Duration::from_secs(60), detail) } else { Err(detail) };
    (outcome, divergence)
}

fn criterion_6() -> (Outcome, (bool, String)) {
    let coherent = preset("double_slit");
    let incoherent = preset("double_slit_incoherent");
    let rc = noisy_reconstruction(&coherent);
    let ri = noisy_reconstruction(&incoherent);
    let step = coherent.scan_config().unwrap().x_points.spacing();
    let lambda = coherent.interferometer.wavelength_m;
    let k0 = coherent.interferometer().k0();
    let sep = rc.features.lobe_separation.unwrap_or(f64::NAN);
    let period = rc.features.fringe_period_k.unwrap_or(f64::NAN);
    // small-angle period along theta
    let period_theta = (period / k0).asin();
    let expected = lambda / 0.28e-3;
    let vc = rc.features.fringe_visibility.unwrap_or(f64::NAN);
    let vi = ri.features.fringe_visibility.unwrap_or(f64::NAN);
    let ok = (sep - 0.28e-3).abs() <= step && (period_theta / expected - 1.0).abs() < 0.05 && vc > 0.9 && vi < 0.05;
    let divergence = divergence_check(&rc.features, 0.06e-3, lambda, "double slit w=0.06 mm");
    (
        ensure(
            ok,
            format!(
                "lobe separation {:.2} um vs 280 um (step {:.2} um); fringe period {:.4} mrad vs {:.4} mrad ({:+.2}%); visibility coherent {vc:.3} (> 0.9), incoherent {vi:.4} (< 0.05)",
                sep * 1e6,
                step * 1e6,
                period_theta * 1e3,
                expected * 1e3,
                (period_theta / expected - 1.0) * 100.0
            ),
        ),
        divergence,
    )
}

fn criterion_7() -> Outcome {
    let grid = Grid::with_spacing(4096, 4e-6, 0.0).unwrap();
    let lambda = 633e-9;
    let k0 = 2.0 * PI / lambda;
    let z = 0.05;
    let spec = FieldSpec::Tophat { width_m: 0.4e-3 };
    let state = make_state(&spec, &grid).unwrap();
    let moved = fresnel_propagate(&state, z, lambda).map_err(|e| e.to_string())?;
    let dx = grid.spacing();
    // k_q shears by exactly q samples
    let qs: Vec<i32> = (-40..=40).collect();
    let ks = Axis::from_values(qs.iter().map(|&q| q as f64 * dx * k0 / z).collect()).unwrap();
    let span = 130;
    let xs = Axis::from_values((-span..=span).map(|j| j as f64 * dx).collect()).unwrap();
    let wide = Axis::from_values((-span - 40..=span + 40).map(|j| j as f64 * dx).collect()).unwrap();
    let w0 = wigner_map(&state, &wide, &ks).unwrap();
    let wz = wigner_map(&moved, &xs, &ks).unwrap();
    let peak = w0.peak();
    let mut err: f64 = 0.0;
    for (ix, _) in xs.values().iter().enumerate() {
        for (iq, &q) in qs.iter().enumerate() {
            let src = (ix as i64 + 40 - q as i64) as usize;
            err = err.max((wz.value(ix, iq) - w0.value(src, iq)).abs());
        }
    }
    ensure(
        err < 1e-3 * peak,
        format!("z = 50 mm, n=4096, dx=4 um: max |W_z(x,k) - W_0(x - zk/k0, k)| / peak = {:.2e} (limit 1e-3)", err / peak),
    )
}

fn criterion_8() -> Outcome {
    let scan = ScanConfig {
        x_points: Grid::new(40, 40e-6, 0.0).unwrap(),
        theta_points: Grid::new(25, 1e-3, 0.0).unwrap(),
        dwell: 0.1,
        seed: 7,
        noiseless: true,
    };
    let rates = Array2::from_elem((40, 25), 1e5);
    let expected = CountMap::from_mean_rates(scan, scan.x_points.positions(), scan.theta_points.positions(), rates).unwrap();
    let drawn = sample_counts(&expected, 7).unwrap();
    let n = drawn.counts.len() as f64;
    let mean = drawn.counts.sum() / n;
    let var = drawn.counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let ratio = var / mean;
    let again = sample_counts(&expected, 7).unwrap();
    let same_seed = counts_to_csv(&drawn) == counts_to_csv(&again);

    let cfg = preset("tophat");
    let state = cfg.state().unwrap();
    let full = cfg.scan_config().unwrap();
    let (det, icfg) = (cfg.detector().unwrap(), cfg.interferometer());
    let in_pool = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| counts_to_csv(&run_scan(&state, &full, &det, &icfg).unwrap()))
    };
    let one = in_pool(1);
    let threads_same = [2, 4, 7].iter().all(|&t| in_pool(t) == one);
    ensure(
        (0.9..=1.1).contains(&ratio) && same_seed && threads_same,
        format!(
            "1000 pixels at mean {mean:.1}: variance/mean {ratio:.4} (in [0.9, 1.1]); same seed byte-identical: {same_seed}; 1/2/4/7 threads byte-identical: {threads_same}"
        ),
    )
}

fn run_cli(args: &[&str]) -> Result<i32, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_sagnac-wigner")).args(args).output().map_err(|e| e.to_string())?;
    Ok(out.status.code().unwrap_or(-1))
}

fn criterion_9() -> Outcome {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for name in PRESETS {
        let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(format!("{name}.json"));
        let config = config.to_str().unwrap();
        let dir = root.path().join(name);
        let d = dir.to_str().unwrap();
        let counts = dir.join("counts.csv");
        let wig = dir.join("wigner.csv");
        let ana = dir.join("wigner_analytic.csv");
        let codes = [
            run_cli(&["simulate", "--config", config, "--out", d, "--noiseless"])?,
            run_cli(&["reconstruct", counts.to_str().unwrap(), "--config", config, "--out", d])?,
            run_cli(&["analytic", "--config", config, "--out", d])?,
            run_cli(&["compare", wig.to_str().unwrap(), ana.to_str().unwrap()])?,
        ];
        let cfg = preset(name);
        let state: EnsembleState = cfg.state().unwrap();
        let rec = read_wigner_csv(&wig).map_err(|e| e.to_string())?;
        let reference = wigner_map(&state, rec.x_axis(), rec.k_axis()).unwrap().normalized().unwrap();
        let l2 = compare_maps(&rec, &reference).unwrap().l2_relative;
        ok &= codes == [0, 0, 0, 0] && l2 < 1e-9;
        parts.push(format!("{name} exits {codes:?} l2 {l2:.1e}"));
    }
    ensure(ok, format!("simulate/reconstruct/analytic/compare (reconstruction vs transform limit 1e-9): {}", parts.join("; ")))
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 route equivalence", criterion_1()),
        ("2 closed-form agreement", criterion_2()),
        ("3 marginals and normalization", criterion_3()),
        ("4 rate proportionality", criterion_4()),
    ];
    let (c5, div_tophat) = criterion_5();
    results.push(("5 single-slit reproduction", c5));
    let (c6, div_double) = criterion_6();
    results.push(("6 double-slit reproduction", c6));
    results.push(("7 Fresnel shear", criterion_7()));
    results.push(("8 photon statistics", criterion_8()));
    results.push(("9 CLI round trip", criterion_9()));
    let div_ok = div_tophat.0 && div_double.0;
    let divergence = ensure(div_ok, format!("{}; {}", div_tophat.1, div_double.1));
    results.push(("divergence candidates", divergence));

    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(d) => println!("acceptance {name}: PASS ({d})"),
            Err(d) => {
                failed += 1;
                println!("acceptance {name}: FAIL ({d})");
            }
        }
    }
    println!("acceptance summary: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
