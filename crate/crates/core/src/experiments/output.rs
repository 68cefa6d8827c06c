//! CSV rows and the JSON sidecar.
//!
//! Floats are written in their shortest round-trip form (`{}` for the SNR
//! column, `{:e}` for probabilities), so output bytes depend only on the
//! values.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{Experiment, ExperimentOutput};
use crate::Result;

pub const CSV_HEADER: &str = "snr_db,method,abep,ci95";

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub snr_db: f64,
    pub method: String,
    pub abep: f64,
    /// Half-width of the 95% interval; `None` for analytical rows.
    pub ci95: Option<f64>,
}

pub fn format_csv(rows: &[CsvRow]) -> String {
    let mut s = String::with_capacity(40 * (rows.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = write!(s, "{},{},{:e},", r.snr_db, r.method, r.abep);
        if let Some(c) = r.ci95 {
            let _ = write!(s, "{c:e}");
        }
        s.push('\n');
    }
    s
}

/// Everything needed to rerun an experiment and interpret its CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub csv: String,
    pub columns: Vec<String>,
    pub version: String,
    pub experiment: Experiment,
    pub diagnostics: BTreeMap<String, f64>,
}

impl Sidecar {
    pub fn new(experiment: &Experiment, output: &ExperimentOutput) -> Self {
        Sidecar {
            csv: format!("{}.csv", experiment.name),
            columns: CSV_HEADER.split(',').map(str::to_string).collect(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: experiment.clone(),
            diagnostics: output.diagnostics.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Recovers the experiment recorded in a sidecar.
pub fn read_sidecar(text: &str) -> Result<Experiment> {
    let sidecar: Sidecar = serde_json::from_str(text)?;
    Ok(sidecar.experiment)
}

/// Writes `<name>.csv` and `<name>.meta.json` into `dir`.
pub fn write_outputs(dir: &Path, experiment: &Experiment, output: &ExperimentOutput) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{}.csv", experiment.name));
    let meta = dir.join(format!("{}.meta.json", experiment.name));
    fs::write(&csv, format_csv(&output.rows))?;
    fs::write(&meta, Sidecar::new(experiment, output).to_json()?)?;
    Ok((csv, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::presets::preset;

    #[test]
    fn csv_layout() {
        let rows = [
            CsvRow { snr_db: -32.5, method: "mc".into(), abep: 0.0123, ci95: Some(4.5e-5) },
            CsvRow { snr_db: 0.0, method: "gcq3".into(), abep: 1e-30, ci95: None },
        ];
        assert_eq!(format_csv(&rows), "snr_db,method,abep,ci95\n-32.5,mc,1.23e-2,4.5e-5\n0,gcq3,1e-30,\n");
    }

    #[test]
    fn sidecar_round_trips_every_preset() {
        let out = ExperimentOutput { rows: Vec::new(), diagnostics: BTreeMap::from([("ks".to_string(), 0.25)]) };
        for name in crate::experiments::PRESET_NAMES {
            let exp = preset(name).unwrap();
            let json = Sidecar::new(&exp, &out).to_json().unwrap();
            assert_eq!(read_sidecar(&json).unwrap(), exp, "{name}");
        }
    }

    #[test]
    fn writes_both_files() {
        let dir = std::env::temp_dir().join(format!("ris-ssk-out-{}", std::process::id()));
        let exp = preset("fig6").unwrap();
        let out = ExperimentOutput { rows: Vec::new(), diagnostics: BTreeMap::new() };
        let (csv, meta) = write_outputs(&dir, &exp, &out).unwrap();
        assert_eq!(fs::read_to_string(&csv).unwrap(), "snr_db,method,abep,ci95\n");
        assert!(fs::read_to_string(&meta).unwrap().contains("\"name\": \"fig6\""));
        fs::remove_dir_all(dir).unwrap();
    }
}
