use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pemfc::calibrate::Experiment;
use pemfc::config::{preset, preset_text};
use pemfc::experiment::{run_polarization_steady, SteadyOptions};
use pemfc::io;

fn pemfc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pemfc"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

/// Noise-free curves of the preset at three pressures, plus its settings file.
fn experiments(dir: &Path, curves: usize) -> (PathBuf, PathBuf) {
    let base = preset("EH-31").unwrap();
    let data = dir.join("data");
    let currents: Vec<f64> = (0..5).map(|k| 2000.0 + 3000.0 * k as f64).collect();
    for (k, p) in [1.5e5, 2e5, 2.5e5].into_iter().take(curves).enumerate() {
        let mut c = base.clone();
        c.operating.p_des = p;
        let curve = run_polarization_steady(&c, &currents, &SteadyOptions::default()).unwrap();
        let e = Experiment {
            name: format!("curve{k}"),
            operating: c.operating,
            points: curve.points,
        };
        io::write_experiment(&data, &e).unwrap();
    }
    let cfg = dir.join("cell.cfg");
    std::fs::write(&cfg, preset_text("EH-31").unwrap()).unwrap();
    (data, cfg)
}

#[test]
fn simulate_without_a_cell_names_the_flag() {
    let o = pemfc(&["simulate", "--mode", "step"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--config"), "{}", stderr(&o));
}

#[test]
fn unknown_preset_and_missing_file_are_invalid_input() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("o");
    let o = pemfc(&[
        "simulate",
        "--preset",
        "nope",
        "--mode",
        "step",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 2);
    let o = pemfc(&[
        "simulate",
        "--config",
        "/nonexistent.cfg",
        "--mode",
        "step",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 2);
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn invalid_setting_is_rejected_with_its_name() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.cfg");
    std::fs::write(
        &cfg,
        preset_text("EH-31")
            .unwrap()
            .replace("S_c = 2.0", "S_c = 0.5"),
    )
    .unwrap();
    let o = pemfc(&[
        "simulate",
        "--config",
        s(&cfg),
        "--mode",
        "step",
        "--out",
        s(&d.path().join("o")),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("S_c"), "{}", stderr(&o));
}

#[test]
fn unreachable_operating_point_is_a_numerical_failure() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("o");
    let args = [
        "--f-min",
        "1",
        "--f-max",
        "1",
        "--per-decade",
        "1",
        "--out",
        s(&out),
    ];
    let ok = pemfc(
        &[
            &[
                "simulate", "--preset", "EH-31", "--mode", "eis", "--i-dc", "1",
            ][..],
            &args,
        ]
        .concat(),
    );
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
    assert!(out.join("manifest.json").exists());
    let o = pemfc(
        &[
            &[
                "simulate", "--preset", "EH-31", "--mode", "eis", "--i-dc", "100",
            ][..],
            &args,
        ]
        .concat(),
    );
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert_eq!(stderr(&o).lines().count(), 1);
    // the earlier run's manifest is gone, so the directory reads as incomplete
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn presets_are_listed() {
    let o = pemfc(&["presets", "list"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout)
        .lines()
        .any(|l| l == "EH-31"));
}

#[test]
fn step_run_writes_its_manifest() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("o");
    let o = pemfc(&[
        "simulate",
        "--preset",
        "EH-31",
        "--mode",
        "step",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m["status"], "completed");
    assert_eq!(m["details"]["horizon"], 1000.0);
    assert_eq!(
        m["artifacts"],
        serde_json::json!(["timeseries.csv", "metadata.json"])
    );
    let rows = std::fs::read_to_string(out.join("timeseries.csv"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(rows, 1002);
}

#[test]
fn polarization_starts_at_the_resolution() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("o");
    let o = pemfc(&[
        "simulate",
        "--preset",
        "EH-31",
        "--mode",
        "polarization",
        "--i-max",
        "1.0",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let curve = io::read_curve(&out.join("polarization.csv")).unwrap();
    assert_eq!(curve[0].0, 1000.0);
    assert_eq!(curve.len(), 10);
}

#[test]
fn simulation_outputs_are_reproducible() {
    let d = tempfile::tempdir().unwrap();
    for k in 0..2 {
        let out = d.path().join(k.to_string());
        let o = pemfc(&[
            "simulate",
            "--preset",
            "EH-31",
            "--mode",
            "step",
            "--horizon",
            "100",
            "--step",
            "50:1.0",
            "--out",
            s(&out),
        ]);
        assert_eq!(code(&o), 0);
    }
    for f in ["timeseries.csv", "metadata.json"] {
        let a = std::fs::read(d.path().join("0").join(f)).unwrap();
        let b = std::fs::read(d.path().join("1").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn calibration_needs_three_curves() {
    let d = tempfile::tempdir().unwrap();
    let (data, cfg) = experiments(d.path(), 2);
    let o = pemfc(&[
        "calibrate",
        "--experiments",
        s(&data),
        "--config",
        s(&cfg),
        "--out",
        s(&d.path().join("o")),
    ]);
    assert_eq!(code(&o), 2);
    assert!(
        stderr(&o).contains("at least three polarization curves required"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn calibration_defaults_and_budget() {
    let d = tempfile::tempdir().unwrap();
    let (data, cfg) = experiments(d.path(), 3);
    let out = d.path().join("o");
    let o = pemfc(&[
        "calibrate",
        "--experiments",
        s(&data),
        "--config",
        s(&cfg),
        "--budget",
        "0",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m["status"], "interrupted");
    assert_eq!(m["details"]["population_size"], 160);
    assert_eq!(m["details"]["max_iterations"], 1500);
    assert_eq!(m["details"]["generation"], 0);
}

#[test]
fn calibration_resumes_and_is_reproducible() {
    let d = tempfile::tempdir().unwrap();
    let (data, cfg) = experiments(d.path(), 3);
    let common = [
        "--experiments",
        s(&data),
        "--config",
        s(&cfg),
        "--pop",
        "8",
        "--gens",
        "4",
        "--seed",
        "3",
    ];
    let whole = d.path().join("whole");
    let o = pemfc(&[&["calibrate"][..], &common, &["--out", s(&whole)]].concat());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(manifest(&whole)["status"], "completed");

    let part = d.path().join("part");
    let o = pemfc(
        &[
            &["calibrate"][..],
            &common,
            &["--budget", "2", "--out", s(&part)],
        ]
        .concat(),
    );
    assert_eq!(code(&o), 0);
    assert_eq!(manifest(&part)["status"], "interrupted");
    let cp = d.path().join("cp.json");
    std::fs::copy(part.join("checkpoint.json"), &cp).unwrap();
    let o = pemfc(
        &[
            &["calibrate"][..],
            &common,
            &["--resume", s(&cp), "--out", s(&part)],
        ]
        .concat(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let history = std::fs::read_to_string(part.join("history.csv")).unwrap();
    let gens: Vec<usize> = history
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(gens, vec![0, 1, 2, 3, 4]);
    for f in ["checkpoint.json", "history.csv", "best.cfg"] {
        assert_eq!(
            std::fs::read(whole.join(f)).unwrap(),
            std::fs::read(part.join(f)).unwrap(),
            "{f}"
        );
    }
    // the fitted fragment loads onto the base settings
    let mut c = preset("EH-31").unwrap();
    c.apply_fragment(&std::fs::read_to_string(whole.join("best.cfg")).unwrap())
        .unwrap();
}

#[test]
fn checkpoint_of_another_problem_exits_4() {
    let d = tempfile::tempdir().unwrap();
    let (data, cfg) = experiments(d.path(), 3);
    let out = d.path().join("o");
    let o = pemfc(&[
        "calibrate",
        "--experiments",
        s(&data),
        "--config",
        s(&cfg),
        "--pop",
        "8",
        "--gens",
        "2",
        "--budget",
        "0",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let other = d.path().join("other.cfg");
    let text = format!("{}\ntau.bounds = 1.0, 3.0\n", preset_text("EH-31").unwrap());
    std::fs::write(&other, text).unwrap();
    let cp = out.join("checkpoint.json");
    let o = pemfc(&[
        "calibrate",
        "--experiments",
        s(&data),
        "--config",
        s(&other),
        "--pop",
        "8",
        "--gens",
        "2",
        "--resume",
        s(&cp),
        "--out",
        s(&d.path().join("o2")),
    ]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    // unreadable checkpoints are invalid input
    std::fs::write(&cp, "{").unwrap();
    let o = pemfc(&[
        "calibrate",
        "--experiments",
        s(&data),
        "--config",
        s(&cfg),
        "--pop",
        "8",
        "--gens",
        "2",
        "--resume",
        s(&cp),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 2);
}
