use std::fs;
use std::time::Instant;

use pemfc::calibrate::{
    evolve, CalibrationError, CalibrationProblem, Checkpoint, GaSettings, Objective,
};
use pemfc::config::load_config;
use pemfc::io::{self, RunManifest};
use serde_json::json;

use crate::{CalibrateArgs, Failure, EXIT_MISMATCH};

const CHECKPOINT: &str = "checkpoint.json";
const HISTORY: &str = "history.csv";
const BEST: &str = "best.cfg";

fn ga_failure(e: CalibrationError) -> Failure {
    match e {
        CalibrationError::CheckpointMismatch { .. } => Failure {
            code: EXIT_MISMATCH,
            message: e.to_string(),
        },
        _ => Failure::invalid(e),
    }
}

pub fn run(a: &CalibrateArgs, argv: Vec<String>) -> Result<(), Failure> {
    let base = load_config(&a.config).map_err(Failure::invalid)?;
    let experiments = io::load_experiments(&a.experiments).map_err(Failure::invalid)?;
    let problem = CalibrationProblem::new(base.clone(), experiments).map_err(ga_failure)?;

    let resume = match &a.resume {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
            Some(Checkpoint::from_json(&text).map_err(ga_failure)?)
        }
        None => None,
    };
    let mut settings = GaSettings::defaults_for(problem.genes.len());
    if let Some(pop) = a.pop {
        settings = settings.with_population(pop);
    }
    if let Some(gens) = a.gens {
        settings.max_iterations = gens;
    }
    settings.seed = a.seed;
    settings.validate().map_err(ga_failure)?;
    if let Some(w) = settings.population_warning() {
        eprintln!("warning: {w}");
    }

    io::begin(&a.out).map_err(Failure::invalid)?;
    let mut manifest = RunManifest::new(argv, base.to_settings_string());
    let started = Instant::now();
    let mut write_error = None;
    let out = a.out.clone();
    let outcome = evolve(
        &problem,
        &settings,
        resume,
        a.budget,
        &mut |c: &Checkpoint| {
            eprintln!(
                "generation {} best {:.6} wall {:.1} s",
                c.generation,
                c.best.fitness,
                started.elapsed().as_secs_f64()
            );
            let r =
                io::write_atomic(&out.join(CHECKPOINT), c.to_json().as_bytes()).and_then(|_| {
                    io::write_atomic(&out.join(HISTORY), io::history_csv(&c.history).as_bytes())
                });
            if let Err(e) = r {
                write_error.get_or_insert(e);
            }
        },
    )
    .map_err(ga_failure)?;
    if let Some(e) = write_error {
        return Err(Failure::invalid(e));
    }

    let fragment = problem.fragment(&outcome.best.genome);
    manifest.status = if outcome.finished {
        "completed"
    } else {
        "interrupted"
    }
    .into();
    manifest.details = json!({
        "generation": outcome.checkpoint.generation,
        "max_iterations": settings.max_iterations,
        "population_size": settings.population_size,
        "seed": settings.seed,
        "best_fitness": outcome.best.fitness,
        "problem_hash": problem.fingerprint(),
    });
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    let artifacts = vec![
        (CHECKPOINT, outcome.checkpoint.to_json().into_bytes()),
        (HISTORY, io::history_csv(&outcome.history).into_bytes()),
        (BEST, fragment.into_bytes()),
    ];
    io::persist(&a.out, &artifacts, manifest).map_err(Failure::invalid)?;
    Ok(())
}
