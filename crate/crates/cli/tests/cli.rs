use std::path::Path;
use std::process::{Command, Output};

fn markerflow(args: &[&str], env: Option<(&str, &str)>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_markerflow"));
    cmd.args(args).env_remove("MARKERFLOW_THREADS");
    if let Some((k, v)) = env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn run(dir: &Path, config: &str, out: &str) -> Output {
    let cfg = write_config(dir, "run.cfg", config);
    let out = dir.join(out);
    markerflow(&["run", &cfg, "--out", out.to_str().unwrap()], None)
}

#[test]
fn presets_lists_measured_constants() {
    let out = markerflow(&["presets", "--n", "64"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["shear2", "cells3", "bands3"] {
        assert!(text.contains(name), "{text}");
    }
    assert!(text.contains("strip delta 0.5"));
}

#[test]
fn init_approx_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        "preset = shear2\nn = 64\nbetas = 10, 20, 40\nkind = init-approx\npgm = true\n",
        "o",
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let o = dir.path().join("o");
    let records = std::fs::read_to_string(o.join("records.csv")).unwrap();
    let mut lines = records.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("t,beta,"));
    assert!(header.contains("l1_error"));
    assert_eq!(lines.count(), 3);
    for beta in ["10", "20", "40"] {
        assert!(o.join(format!("tieset_12_{beta}_0.csv")).exists());
        assert!(o.join(format!("omega_{beta}_0.pgm")).exists());
    }
    let tie = std::fs::read_to_string(o.join("tieset_12_10_0.csv")).unwrap();
    assert!(tie.starts_with("pair,polyline,x,y\n12,0,"));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(o.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["config"]["kind"], "init-approx");
    assert_eq!(manifest["config"]["n"], 64);
    let fits = manifest["fits"].as_array().unwrap();
    assert!(fits.iter().any(|f| f["quantity"] == "l1_error"));
    let m = manifest["nondegeneracy"]["m"].as_f64().unwrap();
    assert!((m - 3f64.sqrt() / 2.0).abs() < 1e-6);
}

#[test]
fn config_output_key_used_without_flag() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from_config");
    let cfg = write_config(
        dir.path(),
        "a.cfg",
        &format!(
            "preset = shear2\nn = 16\nbetas = 10\nkind = init-approx\noutput = {}\n",
            target.display()
        ),
    );
    assert!(markerflow(&["run", &cfg], None).status.success());
    assert!(target.join("records.csv").exists());
}

#[test]
fn unknown_key_exits_1_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "preset = shear2\nbetta = 10\n", "o");
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2") && err.contains("betta"), "{err}");
    assert!(!dir.path().join("o").exists());
}

#[test]
fn decreasing_betas_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "preset = shear2\nbetas = 40, 20\nkind = evolve\n", "o");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("betas"));
}

#[test]
fn missing_config_exits_1() {
    let out = markerflow(&["run", "/nonexistent/markerflow.cfg"], None);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn integration_failure_exits_2_and_keeps_partial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        "preset = shear2\nn = 16\nlevels = 1e300, -1e300\nbetas = 10\nkind = evolve\nt_end = 0.1\n",
        "o",
    );
    assert_eq!(out.status.code(), Some(2));
    let o = dir.path().join("o");
    let records = std::fs::read_to_string(o.join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 2, "initial record kept");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(o.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "integration_failure");
    assert!(manifest["error"].as_str().unwrap().contains("beta 10"));
}

#[test]
fn thread_env_is_validated_and_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", "preset = shear2\nn = 16\nbetas = 10\nkind = init-approx\n");
    let o = dir.path().join("o");
    let o = o.to_str().unwrap();
    let bad = markerflow(&["run", &cfg, "--out", o, "--threads", "2"], Some(("MARKERFLOW_THREADS", "many")));
    assert_eq!(bad.status.code(), Some(1));
    let good = markerflow(&["run", &cfg, "--out", o, "--threads", "0"], Some(("MARKERFLOW_THREADS", "2")));
    assert!(good.status.success(), "{}", String::from_utf8_lossy(&good.stderr));
}

#[test]
fn same_config_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let config = "preset = cells3\nn = 32\nbetas = 10, 20\nkind = pointwise-sweep\nt_end = 0.1\ntimes = 0.05, 0.1\nperturbation = 0.05\nseed = 3\n";
    let a = run(dir.path(), config, "a");
    let b = run(dir.path(), config, "b");
    assert!(a.status.success() && b.status.success());
    for file in ["records.csv", "manifest.json"] {
        assert_eq!(
            std::fs::read(dir.path().join("a").join(file)).unwrap(),
            std::fs::read(dir.path().join("b").join(file)).unwrap(),
            "{file}"
        );
    }
    let c = run(dir.path(), &config.replace("seed = 3", "seed = 4"), "c");
    assert!(c.status.success());
    assert_ne!(
        std::fs::read(dir.path().join("a/records.csv")).unwrap(),
        std::fs::read(dir.path().join("c/records.csv")).unwrap()
    );
}

#[test]
fn hausdorff_sweep_writes_reference_tie_sets() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        "preset = cells3\nn = 32\nbetas = 10, 20\nkind = hausdorff-sweep\nt_end = 0.1\n",
        "o",
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let o = dir.path().join("o");
    for pair in ["12", "13", "23"] {
        assert!(o.join(format!("tieset_{pair}_sharp_0.1.csv")).exists());
        assert!(o.join(format!("tieset_{pair}_20_0.1.csv")).exists());
    }
    let header = std::fs::read_to_string(o.join("records.csv")).unwrap();
    assert!(header.lines().next().unwrap().contains("hausdorff_23"));
}

#[test]
fn every_kind_runs() {
    let dir = tempfile::tempdir().unwrap();
    let kinds = [
        ("evolve", "energy"),
        ("closure", "closure_residual"),
        ("pointwise-sweep", "bound_margin"),
        ("nondegeneracy", "persistence_bound_12"),
    ];
    for (kind, column) in kinds {
        let out = run(
            dir.path(),
            &format!("preset = bands3\nn = 16\nbetas = 10\nkind = {kind}\nt_end = 0.05\nreference = beta-ref\n"),
            kind,
        );
        assert!(out.status.success(), "{kind}: {}", String::from_utf8_lossy(&out.stderr));
        let records = std::fs::read_to_string(dir.path().join(kind).join("records.csv")).unwrap();
        assert!(records.lines().next().unwrap().contains(column), "{kind}: {records}");
    }
}

#[test]
fn custom_markers_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        "marker = 1 0 1 0\nmarker = 1 0 1 3.141592653589793\nlevels = 1, -1\nn = 32\nbetas = 10, 20, 40\nkind = init-approx\n",
        "o",
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["source"], "custom");
    assert_eq!(manifest["markers"]["custom"][1][0]["ky"], 1);
}
