//! Acceptance suite: twelve criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every line is printed even when the
//! suite fails. Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test -p markerflow-cli --test acceptance -- 4 5`.

use std::f64::consts::{FRAC_PI_4, PI};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use markerflow_cli::experiment::polyline_hausdorff;
use markerflow_cli::output::parse_pgm;
use markerflow_cli::{parse_config, run_experiment, run_with_threads, Summary};
use markerflow_core::diagnostics::{keys, DiagnosticRecord};
use markerflow_core::gating::{argmax, assemble_soft_vorticity, softmax_weights};
use markerflow_core::geometry::{extract_tie_set, hausdorff, hausdorff_brute, min_gradient_on_strip};
use markerflow_core::preset::Preset;
use markerflow_core::{Grid, Mode, Point, Polyline, ScalarField, Spectral, StepControl, Transport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Check {
    Check { pass, detail }
}

fn run_cli(dir: &Path, name: &str, config: &str) -> Summary {
    let cfg = parse_config(config).unwrap_or_else(|e| panic!("{name}: {e}"));
    run_experiment(&cfg, Some(&dir.join(name))).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn at(records: &[DiagnosticRecord], beta: f64, t: f64) -> &DiagnosticRecord {
    records
        .iter()
        .find(|r| r.beta == beta && r.t == t)
        .unwrap_or_else(|| panic!("no record at beta {beta}, t {t}"))
}

fn spectral_correctness(_: &Path) -> Check {
    let g = Grid::new(64).unwrap();
    let sp = Spectral::new(g);
    let cos_x = ScalarField::from_fn(g, |x, _| x.cos());
    let sin_2y = ScalarField::from_fn(g, |_, y| (2.0 * y).sin());
    let e1 = sp.solve_stream(&cos_x).unwrap().sup_distance(&cos_x).unwrap();
    let e2 = sp
        .solve_stream(&sin_2y)
        .unwrap()
        .sup_distance(&sin_2y.map(|v| v / 4.0))
        .unwrap();
    check(
        e1 <= 1e-10 && e2 <= 1e-10,
        format!("cos x error {e1:.2e}, sin 2y error {e2:.2e} (tol 1e-10)"),
    )
}

fn softmax_algebra(_: &Path) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut sum_err, mut shift_err, mut ratio_err) = (0.0f64, 0.0f64, 0.0f64);
    let mut argmax_bad = 0;
    let mut ratios = 0usize;
    for _ in 0..100_000 {
        let k = rng.random_range(2..=8);
        let beta = rng.random_range(0.1..200.0);
        let scores: Vec<f64> = (0..k).map(|_| rng.random_range(-10.0..10.0)).collect();
        let w = softmax_weights(&scores, beta).unwrap();
        sum_err = sum_err.max((w.iter().sum::<f64>() - 1.0).abs());
        let c = rng.random_range(-50.0..50.0);
        let shifted: Vec<f64> = scores.iter().map(|s| s + c).collect();
        let ws = softmax_weights(&shifted, beta).unwrap();
        shift_err = w.iter().zip(&ws).map(|(a, b)| (a - b).abs()).fold(shift_err, f64::max);
        for i in 0..k {
            for j in 0..k {
                if i != j && w[i] > 1e-250 && w[j] > 1e-250 {
                    let expected = (beta * (scores[i] - scores[j])).exp();
                    ratio_err = ratio_err.max((w[i] / w[j] / expected - 1.0).abs());
                    ratios += 1;
                }
            }
        }
        if argmax(&w) != argmax(&scores) {
            argmax_bad += 1;
        }
    }
    check(
        sum_err <= 1e-12 && shift_err <= 1e-12 && ratio_err <= 1e-10 && argmax_bad == 0,
        format!(
            "sum {sum_err:.1e}, shift {shift_err:.1e}, ratio {ratio_err:.1e} over {ratios} pairs, argmax mismatches {argmax_bad}"
        ),
    )
}

fn steady_states(_: &Path) -> Check {
    let g = Grid::new(128).unwrap();
    let transport = Transport::new(g);
    let ctrl = StepControl {
        t_end: 2.0,
        ..Default::default()
    };
    let mut parts = Vec::new();
    let mut worst = 0.0f64;
    for p in [Preset::Shear2, Preset::Bands3] {
        let m = p.build(g, 40.0).unwrap();
        let initial = m.clone();
        let traj = transport.run(m, Mode::Soft, &ctrl, |_| {}).unwrap();
        let mut drift = 0.0f64;
        for s in &traj.states {
            for (a, b) in s.markers.markers().iter().zip(initial.markers()) {
                drift = drift.max(a.sup_distance(b).unwrap());
            }
        }
        assert_eq!(traj.last().unwrap().time, 2.0);
        worst = worst.max(drift);
        parts.push(format!("{} drift {drift:.2e}", p.name()));
    }
    check(worst <= 1e-6, format!("{} (tol 1e-6)", parts.join(", ")))
}

fn closure_config(n: usize) -> String {
    format!("preset = cells3\nn = {n}\nbetas = 40\nkind = closure\nt_end = 1\ntimes = 0.25, 0.5, 0.75, 1\n")
}

fn max_of(records: &[DiagnosticRecord], key: &str) -> f64 {
    records.iter().filter_map(|r| r.value(key)).fold(0.0, f64::max)
}

fn closure(dir: &Path) -> Check {
    let coarse = run_cli(dir, "closure128", &closure_config(128));
    let fine = run_cli(dir, "closure256", &closure_config(256));
    let r128 = max_of(&coarse.records, keys::CLOSURE_RESIDUAL);
    let r256 = max_of(&fine.records, keys::CLOSURE_RESIDUAL);
    let ratio = r128 / r256;
    check(
        r128 <= 1e-4 && ratio >= 4.0,
        format!("sup residual n=128 {r128:.3e} (tol 1e-4), n=256 {r256:.3e}, reduction {ratio:.2}x (need 4x)"),
    )
}

fn l1_rate(dir: &Path) -> Check {
    let s = run_cli(
        dir,
        "l1rate",
        "preset = cells3\nn = 256\nbetas = 10, 20, 40, 80, 160\nkind = init-approx\n",
    );
    let fit = s.fits.iter().find(|f| f.quantity == keys::L1_ERROR).expect("l1 fit");
    check(
        (-1.15..=-0.85).contains(&fit.slope) && fit.r2 >= 0.99,
        format!("slope {:.4} (need [-1.15, -0.85]), r2 {:.5}", fit.slope, fit.r2),
    )
}

fn pointwise_decay(dir: &Path) -> Check {
    let s = run_cli(
        dir,
        "pointwise0",
        &format!("preset = shear2\nn = 128\nbetas = 5, 10, 20, 40\ndelta = {FRAC_PI_4}\nkind = init-approx\n"),
    );
    let h = Grid::new(128).unwrap().spacing();
    let fit = s
        .fits
        .iter()
        .find(|f| f.quantity == keys::SUP_ERROR_DELTA)
        .expect("sup fit");
    let target = -FRAC_PI_4.sin();
    let rel = (fit.slope / target - 1.0).abs();
    let min_margin = s
        .records
        .iter()
        .map(|r| r.value(keys::BOUND_MARGIN).unwrap_or(f64::NAN))
        .fold(f64::INFINITY, f64::min);
    let all_pass = s.records.iter().all(|r| r.notes.iter().any(|n| n == "pass"));
    check(
        rel <= 0.2 && all_pass && min_margin >= 1.0 / (1.0 + 10.0 * h),
        format!(
            "slope {:.4} vs {target:.4} ({:.1}% off), min margin {min_margin:.3} (need >= {:.3}), all pass {all_pass}",
            fit.slope,
            100.0 * rel,
            1.0 / (1.0 + 10.0 * h)
        ),
    )
}

const SWEEP_BETAS: [f64; 3] = [20.0, 40.0, 80.0];

fn dynamic_bound(dir: &Path) -> Check {
    let s = run_cli(
        dir,
        "pointwise",
        "preset = cells3\nn = 128\nbetas = 20, 40, 80\nkind = pointwise-sweep\nt_end = 1\ntimes = 0.25, 0.5, 0.75, 1\n",
    );
    let fails: Vec<String> = s
        .records
        .iter()
        .filter(|r| r.notes.iter().any(|n| n == "fail" || n == "skipped"))
        .map(|r| format!("beta {} t {}", r.beta, r.t))
        .collect();
    let degenerate = s
        .records
        .iter()
        .filter(|r| r.notes.iter().any(|n| n == "degenerate regime"))
        .count();
    let e: Vec<f64> = SWEEP_BETAS
        .iter()
        .map(|&b| at(&s.records, b, 1.0).value(keys::MARKER_SUP_ERROR).unwrap())
        .collect();
    let decreasing = e.windows(2).all(|w| w[1] < w[0]);
    check(
        fails.is_empty() && decreasing && s.records.len() == 12,
        format!(
            "bound failures {:?}, degenerate {degenerate}/{}, E(1) = {:.4} {:.4} {:.4}",
            fails,
            s.records.len(),
            e[0],
            e[1],
            e[2]
        ),
    )
}

fn hausdorff_trend(dir: &Path) -> Check {
    let s = run_cli(
        dir,
        "hausdorff",
        "preset = cells3\nn = 128\nbetas = 20, 40, 80\nkind = hausdorff-sweep\nt_end = 1\ntimes = 0.25, 0.5, 1\n",
    );
    let h = Grid::new(128).unwrap().spacing();
    let mut violations = Vec::new();
    let mut final_small = true;
    for t in [0.25, 0.5, 1.0] {
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let key = keys::hausdorff(i, j);
            let d: Vec<f64> = SWEEP_BETAS
                .iter()
                .map(|&b| at(&s.records, b, t).get(&key).unwrap().or_infinity())
                .collect();
            for k in 1..d.len() {
                if d[k] > 1.1 * d[k - 1] {
                    violations.push(format!(
                        "t {t} pair {}{}: {:.3} -> {:.3}",
                        i + 1,
                        j + 1,
                        d[k - 1],
                        d[k]
                    ));
                }
            }
            if t == 0.25 && d[2] > 2.0 * h {
                final_small = false;
                violations.push(format!("t 0.25 pair {}{} at beta 80: {:.4} > 2h", i + 1, j + 1, d[2]));
            }
        }
    }
    check(
        violations.is_empty() && final_small,
        if violations.is_empty() {
            "nonincreasing within 10% at every time, <= 2h at beta 80, t 0.25".to_string()
        } else {
            format!("violations: {}", violations.join("; "))
        },
    )
}

fn persistence(dir: &Path) -> Check {
    let s = run_cli(
        dir,
        "nondegeneracy",
        "preset = cells3\nn = 128\nbetas = 20, 40, 80\nkind = nondegeneracy\nt_end = 1\ntimes = 0.25, 0.5, 0.75, 1\n",
    );
    let mut violations = Vec::new();
    let mut checked = 0;
    for r in &s.records {
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if let (Some(bound), Some(now)) = (
                r.value(&keys::persistence_bound(i, j)),
                r.value(&keys::min_grad_strip(i, j)),
            ) {
                checked += 1;
                if now < bound {
                    violations.push(format!(
                        "beta {} t {} pair {}{}: {now:.4} < {bound:.4}",
                        r.beta,
                        r.t,
                        i + 1,
                        j + 1
                    ));
                }
            }
        }
    }
    let m0: Vec<String> = s
        .nondegeneracy
        .pairs
        .iter()
        .map(|p| format!("{}{}={:.2e}", p.i + 1, p.j + 1, p.min_gradient.or_infinity()))
        .collect();
    check(
        violations.is_empty() && checked > 0,
        format!(
            "m0 {}; {} of {checked} checks below 0.9 m0 exp(-int |grad u|){}",
            m0.join(" "),
            violations.len(),
            if violations.is_empty() {
                String::new()
            } else {
                format!(": {}", violations.join("; "))
            }
        ),
    )
}

fn conservation(dir: &Path) -> Check {
    let soft = run_cli(
        dir,
        "conservation",
        "preset = cells3\nn = 256\nbetas = 40\nkind = evolve\nt_end = 1\nsave_every = 1000\n",
    );
    let direct = run_cli(dir, "conservation_direct", &closure_config(256));
    let first = at(&soft.records, 40.0, 0.0);
    let last = at(&soft.records, 40.0, 1.0);
    let rel = |key: &str| {
        let a = first.value(key).unwrap();
        (last.value(key).unwrap() - a) / a
    };
    let enstrophy = rel(keys::ENSTROPHY);
    let energy = rel(keys::ENERGY);
    let marker_mean_drift = (0..3)
        .map(|k| (last.value(&keys::marker_mean(k)).unwrap() - first.value(&keys::marker_mean(k)).unwrap()).abs())
        .fold(0.0, f64::max);
    // the closure run starts from the same soft field at t = 0
    let omega0 = assemble_soft_vorticity(&Preset::Cells3.build(Grid::new(256).unwrap(), 40.0).unwrap());
    let direct_mean_drift = (at(&direct.records, 40.0, 1.0).value(keys::MEAN_OMEGA).unwrap() - omega0.mean()).abs();
    let soft_mean_drift = (last.value(keys::MEAN_OMEGA).unwrap() - first.value(keys::MEAN_OMEGA).unwrap()).abs();
    check(
        marker_mean_drift <= 1e-12 && direct_mean_drift <= 1e-12 && enstrophy.abs() <= 1e-6 && energy.abs() <= 1e-6,
        format!(
            "mode-0 drift: markers {marker_mean_drift:.1e}, vorticity equation {direct_mean_drift:.1e}; \
             enstrophy {enstrophy:.2e}, energy {energy:.2e} (tol 1e-6); assembled soft mean drift {soft_mean_drift:.1e}"
        ),
    )
}

fn geometry_oracles(_: &Path) -> Check {
    let g = Grid::new(128).unwrap();
    let h = g.spacing();
    let shear = Preset::Shear2.build(g, 40.0).unwrap();
    let lines = extract_tie_set(&shear, 0, 1, true).unwrap();
    let analytic: Vec<Polyline> = [0.0, PI]
        .iter()
        .map(|&y| Polyline {
            points: (0..256).map(|s| Point::new(s as f64 * g.length() / 256.0, y)).collect(),
            closed: true,
        })
        .collect();
    let tie_distance = polyline_hausdorff(&g, &lines, &analytic).or_infinity();

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let set = |rng: &mut ChaCha8Rng| -> Vec<Point> {
        let n = rng.random_range(1..=30);
        (0..n)
            .map(|_| Point::new(rng.random_range(0.0..g.length()), rng.random_range(0.0..g.length())))
            .collect()
    };
    let mut axiom_failures = 0;
    for _ in 0..1000 {
        let (a, b, c) = (set(&mut rng), set(&mut rng), set(&mut rng));
        let d = |x: &[Point], y: &[Point]| hausdorff(&g, x, y).value().unwrap();
        let ab = d(&a, &b);
        let ok = d(&a, &a) == 0.0
            && ab >= 0.0
            && ab == d(&b, &a)
            && d(&a, &c) <= ab + d(&b, &c) + 1e-12
            && Some(ab) == hausdorff_brute(&g, &a, &b).value();
        if !ok {
            axiom_failures += 1;
        }
    }
    let m = min_gradient_on_strip(&Spectral::new(g), &shear, 0, 1, 0.5)
        .unwrap()
        .value()
        .unwrap();
    let m_err = (m - 3f64.sqrt() / 2.0).abs();
    check(
        tie_distance <= h && axiom_failures == 0 && m_err <= 1e-6,
        format!(
            "shear tie lines within {tie_distance:.2e} of analytic (h = {h:.4}), axiom failures {axiom_failures}/1000, \
             strip gradient error {m_err:.1e}"
        ),
    )
}

fn determinism(dir: &Path) -> Check {
    let config = "preset = cells3\nn = 64\nbetas = 10, 20, 40\nkind = evolve\nt_end = 0.2\nsave_every = 3\n";
    let cfg = parse_config(config).unwrap();
    let mut bytes = Vec::new();
    for (run, threads) in [(0, 1), (1, 3)] {
        let out = dir.join(format!("determinism{run}"));
        run_with_threads(&cfg, Some(&out), Some(threads)).unwrap();
        bytes.push(std::fs::read(out.join("records.csv")).unwrap());
    }
    let identical = bytes[0] == bytes[1];

    let s = run_cli(dir, "pgm", "preset = cells3\nn = 64\nbetas = 10, 20\nkind = init-approx\npgm = true\n");
    let level = 2.0 / 255.0;
    let mut worst = 0.0f64;
    for beta in [10.0, 20.0] {
        let img = parse_pgm(&std::fs::read(s.out_dir.join(format!("omega_{beta}_0.pgm"))).unwrap()).unwrap();
        let omega = assemble_soft_vorticity(&Preset::Cells3.build(Grid::new(64).unwrap(), beta).unwrap());
        for (a, b) in omega.values().iter().zip(img.to_values(-1.0, 1.0)) {
            worst = worst.max((a - b).abs());
        }
    }
    check(
        identical && worst <= level,
        format!(
            "records.csv identical across reruns (1 and 3 threads): {identical}; PGM round-trip error {worst:.2e} (level {level:.2e})"
        ),
    )
}

type Criterion = (u32, &'static str, u64, fn(&Path) -> Check);

const CRITERIA: [Criterion; 12] = [
    (1, "spectral correctness", 1, spectral_correctness),
    (2, "softmax algebra", 5, softmax_algebra),
    (3, "steady states", 120, steady_states),
    (4, "closure", 600, closure),
    (5, "L1 rate", 30, l1_rate),
    (6, "pointwise decay at t = 0", 60, pointwise_decay),
    (7, "dynamic pointwise bound", 1200, dynamic_bound),
    (8, "Hausdorff trend", 1800, hausdorff_trend),
    (9, "nondegeneracy persistence", 1200, persistence),
    (10, "conservation", 600, conservation),
    (11, "geometry oracles", 60, geometry_oracles),
    (12, "determinism and I/O", 60, determinism),
];

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let dir = tempfile::tempdir().expect("temp dir");
    let mut failed = Vec::new();
    let mut ran = 0;
    for (id, name, budget, f) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let c = f(dir.path());
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let pass = c.pass && in_time;
        println!(
            "criterion {id:>2} [{}] {name}: {} [{:.1}s of {budget}s{}]",
            if pass { "PASS" } else { "FAIL" },
            c.detail,
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over budget" }
        );
        if !pass {
            failed.push(id);
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
