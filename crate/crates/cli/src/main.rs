//! `pemfc` command line: simulate a cell, calibrate it, list presets.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure,
//! 4 checkpoint from a different problem.

mod calibrate;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_INVALID: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_MISMATCH: u8 = 4;

#[derive(Parser)]
#[command(
    name = "pemfc",
    version,
    about = "PEM fuel cell simulation and calibration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a step, polarization or impedance experiment.
    Simulate(SimulateArgs),
    /// Fit the undetermined parameters to measured polarization curves.
    Calibrate(CalibrateArgs),
    /// Shipped cell presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Step,
    Polarization,
    Eis,
}

#[derive(Args)]
struct SimulateArgs {
    /// Settings file.
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Preset name, see `presets list`.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Step mode: simulated time, s.
    #[arg(long, default_value_t = 1000.0)]
    horizon: f64,
    /// Step mode: starting current density, A/cm².
    #[arg(long, default_value_t = 0.5)]
    i_init: f64,
    /// Step mode: switch as `TIME:LEVEL` (s, A/cm²); repeatable.
    /// Defaults to 1.0 A/cm² at 300 s and 1.5 A/cm² at 650 s.
    #[arg(long = "step", value_parser = parse_step)]
    steps: Vec<(f64, f64)>,
    /// Step mode: smoothing time of each switch, s.
    #[arg(long, default_value_t = 0.5)]
    t_smooth: f64,
    /// Step mode: output sample interval, s.
    #[arg(long, default_value_t = 1.0)]
    sample_dt: f64,
    /// Polarization mode: highest current density, A/cm².
    #[arg(long, default_value_t = 3.0)]
    i_max: f64,
    /// Polarization mode: staircase increment, A/cm² (configured resolution by default).
    #[arg(long)]
    delta_i: Option<f64>,
    /// Polarization mode: longest hold per level, s.
    #[arg(long, default_value_t = 30.0)]
    hold: f64,
    /// EIS mode: DC current density, A/cm².
    #[arg(long, default_value_t = 1.0)]
    i_dc: f64,
    /// EIS mode: relative amplitude.
    #[arg(long, default_value_t = 0.05)]
    amplitude: f64,
    #[arg(long, default_value_t = 1e-3)]
    f_min: f64,
    #[arg(long, default_value_t = 1e4)]
    f_max: f64,
    #[arg(long, default_value_t = 10)]
    per_decade: usize,
    /// Relative integration tolerance.
    #[arg(long, default_value_t = 1e-6)]
    rtol: f64,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Directory of `<name>.csv` curves (columns i [A/cm²], U [V]) with `<name>.json` conditions.
    #[arg(long)]
    experiments: PathBuf,
    /// Settings file carrying geometry and parameter bounds.
    #[arg(long)]
    config: PathBuf,
    /// Checkpoint to continue from.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long)]
    gens: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop after this many generations in this session; resume later.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, default_value = "calibration")]
    out: PathBuf,
}

fn parse_step(s: &str) -> Result<(f64, f64), String> {
    let (t, i) = s.split_once(':').ok_or("expected TIME:LEVEL")?;
    let t: f64 = t.trim().parse().map_err(|_| format!("bad time `{t}`"))?;
    let i: f64 = i.trim().parse().map_err(|_| format!("bad level `{i}`"))?;
    Ok((t, i))
}

/// Failure reported on stderr with its exit code.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn invalid(message: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => simulate::run(&a, argv),
        Command::Calibrate(a) => calibrate::run(&a, argv),
        Command::Presets {
            action: PresetAction::List,
        } => {
            for name in pemfc::config::preset_names() {
                println!("{name}");
            }
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
