use pemfc::calibrate::Experiment;
use pemfc::config::preset;
use pemfc::experiment::{run_step, RunOptions, StepProfile};
use pemfc::io::*;

fn short_run() -> pemfc::experiment::SimulationResult {
    let profile = StepProfile::single(5000.0, 8000.0, 10.0, 0.5);
    run_step(
        &preset("EH-31").unwrap(),
        &profile,
        20.0,
        &RunOptions::default(),
    )
    .unwrap()
}

#[test]
fn result_csv_has_one_row_per_sample() {
    let r = short_run();
    let text = result_csv(&r);
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header = rd.headers().unwrap().clone();
    assert_eq!(&header[0], "t_s");
    assert_eq!(header.len(), 3 + r.labels.len() + r.derived_labels.len());
    let rows: Vec<csv::StringRecord> = rd.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), r.len());
    let t: Vec<f64> = rows.iter().map(|x| x[0].parse().unwrap()).collect();
    assert!(t.windows(2).all(|w| w[1] > w[0]));
    // shortest round-trip formatting reproduces every value exactly
    for (row, k) in rows.iter().zip(0..) {
        assert_eq!(row[2].parse::<f64>().unwrap(), r.voltage[k]);
        assert_eq!(row[1].parse::<f64>().unwrap(), r.current[k] / 1e4);
    }
}

#[test]
fn persisted_artifacts_are_byte_identical() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let r = short_run();
        let m = RunManifest::new(vec!["pemfc".into()], String::new());
        persist(d.path(), &[("result.csv", result_csv(&r).into_bytes())], m).unwrap();
    }
    let read = |k: usize| std::fs::read(dirs[k].path().join("result.csv")).unwrap();
    assert_eq!(read(0), read(1));
}

#[test]
fn manifest_is_written_last() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("run");
    let mut m = RunManifest::new(vec!["pemfc".into(), "simulate".into()], "cfg".into());
    m.status = "completed".into();
    persist(&out, &[("a.csv", b"x\n1\n".to_vec())], m.clone()).unwrap();
    assert!(is_complete(&out));
    let back = read_manifest(&out).unwrap();
    assert_eq!(back.artifacts, vec!["a.csv".to_string()]);
    assert_eq!(back.status, "completed");
    // a new run in the same place is incomplete until persisted
    begin(&out).unwrap();
    assert!(!is_complete(&out));
    assert!(read_manifest(&out).is_err());
    // no temporaries left behind
    let names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, vec!["a.csv".to_string()]);
}

#[test]
fn experiments_round_trip_through_files() {
    let d = tempfile::tempdir().unwrap();
    let op = preset("EH-31").unwrap().operating;
    let mk = |name: &str, shift: f64| Experiment {
        name: name.into(),
        operating: op.clone(),
        points: (1..=6)
            .map(|k| (1000.0 * k as f64, 0.9 - 0.03 * k as f64 + shift))
            .collect(),
    };
    let written = vec![mk("a", 0.0), mk("b", 0.01)];
    for e in &written {
        write_experiment(d.path(), e).unwrap();
    }
    let back = load_experiments(d.path()).unwrap();
    assert_eq!(back.len(), 2);
    for (w, b) in written.iter().zip(&back) {
        assert_eq!(w.name, b.name);
        assert_eq!(w.operating, b.operating);
        for (p, q) in w.points.iter().zip(&b.points) {
            assert!((p.0 - q.0).abs() < 1e-9 && p.1 == q.1);
        }
    }
}

#[test]
fn malformed_curves_are_reported() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().join("c.csv");
    std::fs::write(&p, "x,y\n1,2\n").unwrap();
    assert!(matches!(read_curve(&p), Err(IoError::Format { .. })));
    std::fs::write(&p, "i_A_cm2,U_V\n0.1,abc\n").unwrap();
    let err = read_curve(&p).unwrap_err();
    assert!(err.to_string().contains("row 2"), "{err}");
    assert!(matches!(
        read_curve(&d.path().join("none.csv")),
        Err(IoError::Io { .. })
    ));
    // a curve without its operating conditions
    std::fs::write(&p, "i_A_cm2,U_V\n0.1,0.9\n").unwrap();
    assert!(load_experiments(d.path()).is_err());
}
