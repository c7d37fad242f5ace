use std::path::Path;
use std::process::{Command, Output};

use fpt_core::harness::{csv_data, ExperimentConfig, RunKind};

fn fpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpt")).args(args).output().unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn spectrum_csv_reruns_bit_identically_from_its_header() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let out = fpt(&["spectrum", "--out", a.to_str().unwrap(), "--quiet"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = read(&a.join("run_spectrum.csv"));
    assert!(first.starts_with("# fpt-core output\n# meta.version = "));
    assert!(first.contains("# result.g_crit = "));

    let cfg = ExperimentConfig::from_csv_header(&first).unwrap();
    assert!(matches!(cfg.run, RunKind::Spectrum { points: 301, .. }));
    let cfg_path = dir.path().join("again.cfg");
    std::fs::write(&cfg_path, cfg.to_config_string().unwrap()).unwrap();
    let b = dir.path().join("b");
    let out = fpt(&[
        "spectrum",
        "--config",
        cfg_path.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let second = read(&b.join("run_spectrum.csv"));
    assert_eq!(csv_data(&first), csv_data(&second));
}

#[test]
fn trajectory_is_reproducible_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("traj.cfg");
    std::fs::write(
        &cfg,
        "label = t\nmodel.gain = 0.1 wR\ntraj.dt = 0.02 1/wR\ntraj.t_max = 20 1/wR\ntraj.record_every = 5\n",
    )
    .unwrap();
    let run = |sub: &str, seed: &str| {
        let out_dir = dir.path().join(sub);
        let o = fpt(&[
            "traj",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--seed",
            seed,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        read(&out_dir.join("t_traj.csv"))
    };
    let (a, b, c) = (run("a", "4"), run("b", "4"), run("c", "5"));
    assert_eq!(csv_data(&a), csv_data(&b));
    assert_ne!(csv_data(&a), csv_data(&c));
    assert_eq!(csv_data(&a)[0], "t,X_c,photocurrent,I_c");
    assert_eq!(csv_data(&a).len(), 1 + 201);
}

#[test]
fn config_errors_are_json_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "model.kappa = 100\n").unwrap();
    let o = fpt(&["critical", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let rec: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(rec["error"], "ConfigError");
    assert!(rec["message"].as_str().unwrap().contains("wR"));

    let o = fpt(&["preset", "fig9"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bec_map_and_bath_compare_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(fpt(&["bec-map", "--out", d]).status.success());
    let bec = read(&dir.path().join("run_bec.csv"));
    assert!(csv_data(&bec).iter().any(|l| l.starts_with("omega_r,")));

    let cfg = dir.path().join("bath.cfg");
    std::fs::write(
        &cfg,
        "label = b\nmodel.delta = 0 wR\nmodel.gain = 1 wR\nbath.s = 1\nbath.kappa_r = 0.1 wR\nbath.omega_c = 2 wR\nbath.cutoff = exponential\nspectrum.points = 11\n",
    )
    .unwrap();
    let o = fpt(&["bath-compare", "--config", cfg.to_str().unwrap(), "--out", d]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&dir.path().join("b_bath.csv"));
    let fb: f64 = result(&text, "feedback_soft_mode");
    let bath: f64 = result(&text, "bath_soft_mode");
    assert!((fb - bath).abs() < 1e-6, "{fb} vs {bath}");
}

fn result(text: &str, key: &str) -> f64 {
    let tag = format!("# result.{key} = ");
    text.lines()
        .find_map(|l| l.strip_prefix(&tag))
        .unwrap_or_else(|| panic!("missing {key}"))
        .parse()
        .unwrap()
}

#[test]
fn fig3_preset_writes_exponent_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = fpt(&["preset", "fig3", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&dir.path().join("fig3_exponents.csv"));
    let rows = csv_data(&text);
    assert_eq!(rows[0], "s,alpha,se_alpha,A,B,residual");
    assert_eq!(rows.len(), 6);
    let alpha20: f64 = rows[5].split(',').nth(1).unwrap().parse().unwrap();
    assert!((alpha20 - 1.0).abs() < 0.1);
    assert!(dir.path().join("fig3_s0.5_sweep.csv").exists());
    assert!(dir.path().join("fig3_s20_fit.csv").exists());
}
