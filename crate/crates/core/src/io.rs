//! Result files, run manifests and experimental polarization data.
//!
//! Current densities are written in A·cm⁻²; everything else is SI.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::calibrate::{Experiment, GenerationRecord};
use crate::config::OperatingConditions;
use crate::experiment::{ImpedanceSpectrum, PolarizationCurve, SimulationResult};

pub const MANIFEST: &str = "manifest.json";

/// A·m⁻² per A·cm⁻².
const A_CM2: f64 = 1e4;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> IoError {
    IoError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> IoError {
    IoError::Format {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let name = path
        .file_name()
        .ok_or_else(|| format_err(path, "not a file path"))?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

fn csv_text(header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string()))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

/// Time series: time, current, voltage, every state slot, then the derived columns.
pub fn result_csv(r: &SimulationResult) -> String {
    let mut header: Vec<String> = vec!["t_s".into(), "i_A_cm2".into(), "U_V".into()];
    header.extend(r.labels.iter().cloned());
    header.extend(r.derived_labels.iter().cloned());
    let rows = (0..r.len()).map(|k| {
        let mut row = vec![r.times[k], r.current[k] / A_CM2, r.voltage[k]];
        row.extend_from_slice(&r.states[k]);
        row.extend(r.derived_columns.iter().map(|c| c[k]));
        row
    });
    csv_text(&header, rows)
}

pub fn polarization_csv(c: &PolarizationCurve) -> String {
    csv_text(
        &["i_A_cm2".into(), "U_V".into()],
        c.points.iter().map(|&(i, u)| vec![i / A_CM2, u]),
    )
}

pub fn eis_csv(s: &ImpedanceSpectrum) -> String {
    csv_text(
        &[
            "f_Hz".into(),
            "Re_Z_ohm_m2".into(),
            "Im_Z_ohm_m2".into(),
            "thd".into(),
        ],
        s.points.iter().map(|p| vec![p.f, p.z.re, p.z.im, p.thd]),
    )
}

pub fn history_csv(h: &[GenerationRecord]) -> String {
    csv_text(
        &[
            "generation".into(),
            "best".into(),
            "mean".into(),
            "best_so_far".into(),
        ],
        h.iter()
            .map(|r| vec![r.generation as f64, r.best, r.mean, r.best_so_far]),
    )
}

/// Run metadata that is not a time series.
pub fn result_sidecar(r: &SimulationResult) -> serde_json::Value {
    let s = &r.stats;
    json!({
        "status": r.status,
        "samples": r.len(),
        "events": r.events,
        "solver_stats": {
            "steps": s.steps,
            "rejected": s.rejected,
            "rhs_evals": s.rhs_evals,
            "newton_iters": s.newton_iters,
            "jac_evals": s.jac_evals,
            "lu_decomps": s.lu_decomps,
        },
        "units": {"t_s": "s", "i_A_cm2": "A/cm2", "U_V": "V"},
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub command_line: Vec<String>,
    /// Settings text of the configuration used.
    pub config: String,
    /// File names relative to the output directory.
    pub artifacts: Vec<String>,
    pub versions: serde_json::Value,
    pub wall_time_s: f64,
    pub status: String,
    /// Command-specific values such as the horizon.
    pub details: serde_json::Value,
}

impl RunManifest {
    pub fn new(command_line: Vec<String>, config: String) -> Self {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut h = Sha256::new();
        h.update(command_line.join("\u{1f}").as_bytes());
        h.update(config.as_bytes());
        h.update(secs.to_le_bytes());
        let short: String = h.finalize()[..4]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        Self {
            run_id: format!("{secs}-{short}"),
            command_line,
            config,
            artifacts: Vec::new(),
            versions: json!({"pemfc": env!("CARGO_PKG_VERSION")}),
            wall_time_s: 0.0,
            status: String::new(),
            details: json!({}),
        }
    }
}

/// Creates `dir` and drops any manifest in it, marking the run in progress.
pub fn begin(dir: &Path) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let old = dir.join(MANIFEST);
    if old.exists() {
        fs::remove_file(&old).map_err(|e| io_err(&old, e))?;
    }
    Ok(())
}

/// Writes the artifacts, then the manifest naming them. A directory without a
/// manifest is an incomplete run.
pub fn persist(
    dir: &Path,
    artifacts: &[(&str, Vec<u8>)],
    mut manifest: RunManifest,
) -> Result<RunManifest, IoError> {
    begin(dir)?;
    manifest.artifacts.clear();
    for (name, bytes) in artifacts {
        write_atomic(&dir.join(name), bytes)?;
        manifest.artifacts.push(name.to_string());
    }
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    write_atomic(&dir.join(MANIFEST), text.as_bytes())?;
    Ok(manifest)
}

pub fn is_complete(dir: &Path) -> bool {
    dir.join(MANIFEST).is_file()
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest, IoError> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    serde_json::from_str(&text).map_err(|e| format_err(&path, e.to_string()))
}

/// Operating conditions as stored next to an experimental curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Descriptor {
    #[serde(rename = "T_fc")]
    t_fc: f64,
    #[serde(rename = "P_des")]
    p_des: f64,
    #[serde(rename = "S_a")]
    s_a: f64,
    #[serde(rename = "S_c")]
    s_c: f64,
    #[serde(rename = "Phi_a_des")]
    phi_a_des: f64,
    #[serde(rename = "Phi_c_des")]
    phi_c_des: f64,
}

impl From<&OperatingConditions> for Descriptor {
    fn from(o: &OperatingConditions) -> Self {
        Self {
            t_fc: o.t_fc,
            p_des: o.p_des,
            s_a: o.s_a,
            s_c: o.s_c,
            phi_a_des: o.phi_a_des,
            phi_c_des: o.phi_c_des,
        }
    }
}

impl From<Descriptor> for OperatingConditions {
    fn from(d: Descriptor) -> Self {
        Self {
            t_fc: d.t_fc,
            p_des: d.p_des,
            s_a: d.s_a,
            s_c: d.s_c,
            phi_a_des: d.phi_a_des,
            phi_c_des: d.phi_c_des,
        }
    }
}

/// Reads a curve CSV with columns `i` (A·cm⁻²) and `U` (V); returns A·m⁻².
pub fn read_curve(path: &Path) -> Result<Vec<(f64, f64)>, IoError> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    let header = r
        .headers()
        .map_err(|e| format_err(path, e.to_string()))?
        .clone();
    let find = |prefix: &str| {
        header
            .iter()
            .position(|h| h == prefix || h.starts_with(&format!("{prefix}_")))
    };
    let (Some(ci), Some(cu)) = (find("i"), find("U")) else {
        return Err(format_err(path, "expected columns `i` (A/cm2) and `U` (V)"));
    };
    let mut out = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| format_err(path, e.to_string()))?;
        let num = |c: usize| -> Result<f64, IoError> {
            rec.get(c)
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| format_err(path, format!("row {}: not a number", k + 2)))
        };
        out.push((num(ci)? * A_CM2, num(cu)?));
    }
    Ok(out)
}

/// Loads every `<name>.csv` in `dir` with its `<name>.json` operating conditions,
/// in file-name order.
pub fn load_experiments(dir: &Path) -> Result<Vec<Experiment>, IoError> {
    let mut csvs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    csvs.sort();
    let mut out = Vec::new();
    for path in csvs {
        let json_path = path.with_extension("json");
        let text = fs::read_to_string(&json_path).map_err(|e| io_err(&json_path, e))?;
        let d: Descriptor =
            serde_json::from_str(&text).map_err(|e| format_err(&json_path, e.to_string()))?;
        out.push(Experiment {
            name: path
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned(),
            operating: d.into(),
            points: read_curve(&path)?,
        });
    }
    Ok(out)
}

/// Writes a curve and its descriptor in the layout [`load_experiments`] reads.
pub fn write_experiment(dir: &Path, e: &Experiment) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(|err| io_err(dir, err))?;
    let csv = csv_text(
        &["i_A_cm2".into(), "U_V".into()],
        e.points.iter().map(|&(i, u)| vec![i / A_CM2, u]),
    );
    write_atomic(&dir.join(format!("{}.csv", e.name)), csv.as_bytes())?;
    let d = serde_json::to_string_pretty(&Descriptor::from(&e.operating))
        .expect("descriptor serialises");
    write_atomic(&dir.join(format!("{}.json", e.name)), d.as_bytes())
}
