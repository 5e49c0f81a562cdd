use std::time::Instant;

use pemfc::config::{load_config, preset, FuelCellConfig};
use pemfc::experiment::{
    run_eis, run_polarization, run_step, DriverError, EisProfile, PolarizationProfile, RunOptions,
    RunStatus, StepProfile,
};
use pemfc::io::{self, RunManifest};
use serde_json::json;

use crate::{Failure, Mode, SimulateArgs, EXIT_NUMERICAL};

const A_CM2: f64 = 1e4;

fn driver_failure(e: DriverError) -> Failure {
    match e {
        DriverError::Invalid(_) | DriverError::Config(_) => Failure::invalid(e),
        _ => Failure {
            code: EXIT_NUMERICAL,
            message: e.to_string(),
        },
    }
}

fn source(a: &SimulateArgs) -> Result<FuelCellConfig, Failure> {
    match (&a.config, &a.preset) {
        (Some(path), _) => load_config(path).map_err(Failure::invalid),
        (None, Some(name)) => preset(name).map_err(Failure::invalid),
        (None, None) => Err(Failure::invalid("one of --config or --preset is required")),
    }
}

pub fn run(a: &SimulateArgs, argv: Vec<String>) -> Result<(), Failure> {
    let cfg = source(a)?;
    let opts = RunOptions {
        rtol: a.rtol,
        sample_dt: a.sample_dt,
        ..Default::default()
    };
    if !(a.rtol > 0.0 && a.rtol < 1.0) {
        return Err(Failure::invalid("--rtol must lie in (0, 1)"));
    }
    // a failed run must not leave an earlier manifest behind
    io::begin(&a.out).map_err(Failure::invalid)?;
    let mut manifest = RunManifest::new(argv, cfg.to_settings_string());
    let started = Instant::now();
    let mut artifacts: Vec<(&str, Vec<u8>)> = Vec::new();
    match a.mode {
        Mode::Step => {
            let switches = if a.steps.is_empty() {
                vec![(300.0, 1.0), (650.0, 1.5)]
            } else {
                a.steps.clone()
            };
            let profile = StepProfile {
                i_init: a.i_init * A_CM2,
                switches: switches.iter().map(|&(t, i)| (t, i * A_CM2)).collect(),
                t_smooth: a.t_smooth,
            };
            let r = run_step(&cfg, &profile, a.horizon, &opts).map_err(driver_failure)?;
            manifest.status = match r.status {
                RunStatus::Completed => "completed".into(),
                RunStatus::VoltageCollapse { .. } => "voltage_collapse".into(),
            };
            manifest.details = json!({
                "mode": "step",
                "horizon": a.horizon,
                "i_init_A_cm2": a.i_init,
                "switches": switches.iter().map(|&(t, i)| json!({"t_s": t, "i_A_cm2": i})).collect::<Vec<_>>(),
            });
            artifacts.push(("timeseries.csv", io::result_csv(&r).into_bytes()));
            artifacts.push(("metadata.json", pretty(&io::result_sidecar(&r))));
        }
        Mode::Polarization => {
            let profile = PolarizationProfile {
                i_max: a.i_max * A_CM2,
                delta_i: a
                    .delta_i
                    .map_or(cfg.computing.i_step_resolution, |d| d * A_CM2),
                hold: a.hold,
                ..Default::default()
            };
            let c = run_polarization(&cfg, &profile, &opts).map_err(driver_failure)?;
            manifest.status = if c.collapsed {
                "voltage_collapse"
            } else {
                "completed"
            }
            .into();
            manifest.details = json!({
                "mode": "polarization",
                "i_max_A_cm2": profile.i_max / A_CM2,
                "delta_i_A_cm2": profile.delta_i / A_CM2,
                "hold_s": profile.hold,
                "points": c.points.len(),
            });
            artifacts.push(("polarization.csv", io::polarization_csv(&c).into_bytes()));
            artifacts.push((
                "metadata.json",
                pretty(&json!({"collapsed": c.collapsed, "points": c.points.len()})),
            ));
        }
        Mode::Eis => {
            if !(a.f_min > 0.0 && a.f_max >= a.f_min && a.per_decade > 0) {
                return Err(Failure::invalid(
                    "need 0 < --f-min <= --f-max and --per-decade > 0",
                ));
            }
            let mut profile = EisProfile::new(
                a.i_dc * A_CM2,
                EisProfile::log_grid(a.f_min, a.f_max, a.per_decade),
            );
            profile.delta = a.amplitude;
            let s = run_eis(&cfg, &profile, &opts).map_err(driver_failure)?;
            for w in &s.warnings {
                eprintln!("warning: {w}");
            }
            manifest.status = "completed".into();
            manifest.details = json!({
                "mode": "eis",
                "i_dc_A_cm2": a.i_dc,
                "amplitude": a.amplitude,
                "frequencies": s.points.len(),
            });
            let warnings: Vec<_> = s
                .warnings
                .iter()
                .map(|w| json!({"f_Hz": w.f, "thd": w.thd}))
                .collect();
            artifacts.push(("eis.csv", io::eis_csv(&s).into_bytes()));
            artifacts.push((
                "metadata.json",
                pretty(&json!({"nonlinearity_warnings": warnings})),
            ));
        }
    }
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    io::persist(&a.out, &artifacts, manifest).map_err(Failure::invalid)?;
    Ok(())
}

fn pretty(v: &serde_json::Value) -> Vec<u8> {
    serde_json::to_string_pretty(v)
        .expect("json value")
        .into_bytes()
}
