// SPDX-License-Identifier: MIT OR Apache-2.0

//! Drivers for the heatmap grid, the two saturation sweeps and the ablation
//! benchmark.
//!
//! Each driver returns a typed result and can flatten it into an
//! [`ExperimentReport`]: per-item records plus aggregate tables, with the
//! configuration echoed so the run can be replayed.

mod ablation;
mod lrp_saturation;
mod qualitative;
mod saturation;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub use ablation::{
    ablation_report, run_ablation, run_ablation_on, run_ablation_suite, AblationClass, AblationConfig, AblationItem,
    AblationNetwork, AblationResult, AblationStrategy, AblationSummary, TIE_TOLERANCE,
};
pub use lrp_saturation::{run_lrp_saturation, LrpSaturationConfig, LrpSaturationResult, LrpSaturationRow};
pub use qualitative::{run_qualitative_suite, QualitativeCell, QualitativeResult, QualitativeRow, QUALITATIVE_ROWS};
pub use saturation::{run_saturation_sweep, SaturationResult, SaturationRow, SATURATION_INPUT, SATURATION_U_VALUES};

/// A named table of scalar cells, written as CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Input(format!("csv: {e}"));
        writer.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(cell_text)).map_err(io)?;
        }
        let bytes = writer.into_inner().map_err(|e| Error::Input(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

fn cell_text(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: Option<u64>,
    pub config: Value,
    pub records: Vec<Value>,
    pub tables: Vec<Table>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Writes `<experiment>.json` and one `<experiment>_<table>.csv` per
    /// table into `dir`; returns the paths written.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let io = |p: &Path, e: std::io::Error| Error::Input(format!("cannot write {}: {e}", p.display()));
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut written = Vec::new();
        let json_path = dir.join(format!("{}.json", self.experiment));
        fs::write(&json_path, self.to_json()).map_err(|e| io(&json_path, e))?;
        written.push(json_path);
        for table in &self.tables {
            let path = dir.join(format!("{}_{}.csv", self.experiment, table.name));
            fs::write(&path, table.to_csv()?).map_err(|e| io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

pub(crate) fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("experiment records serialise")
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_has_header_and_rows() {
        let mut t = Table::new("demo", &["u", "label"]);
        t.push(vec![json!(0.5), json!("True")]);
        t.push(vec![json!(null), json!("a,b")]);
        assert_eq!(t.to_csv().unwrap(), "u,label\n0.5,True\n,\"a,b\"\n");
    }

    #[test]
    fn mean_std_examples() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
        assert!(mean_std(&[]).0.is_nan());
    }
}
