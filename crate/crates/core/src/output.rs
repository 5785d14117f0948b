//! CSV traces and JSON summaries.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every finite `f64` exactly. Non-finite values become
//! `nan`/`inf`/`-inf` in CSV and `null` in JSON.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::value::RawValue;

use crate::config::ConfigValue;
use crate::error::{OptError, Result};
use crate::harness::{OptimizerSpec, RaceTable, RunRecord, RunSummary, SweepEntry};

/// Formats a float with 17 significant digits.
pub fn sig17(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// JSON number with 17 significant digits, or `null` when non-finite.
#[derive(Clone, Copy, Debug)]
struct Sig17(f64);

impl Serialize for Sig17 {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return ser.serialize_none();
        }
        RawValue::from_string(sig17(self.0))
            .map_err(serde::ser::Error::custom)?
            .serialize(ser)
    }
}

pub fn trace_header(dim: usize) -> String {
    let mut cols = vec!["t".to_string(), "loss".into(), "dist_to_opt".into()];
    cols.extend((0..dim).map(|i| format!("theta_{i}")));
    cols.extend(["k", "delta_hat", "b", "restarted"].map(String::from));
    cols.join(",")
}

/// Full CSV text for one run. Diagnostic columns are empty for optimizers without them.
pub fn trace_csv(record: &RunRecord) -> String {
    let mut out = trace_header(record.dim);
    out.push('\n');
    for row in &record.rows {
        let mut fields = vec![row.t.to_string(), sig17(row.loss), sig17(row.dist_to_opt)];
        fields.extend(row.theta.iter().map(|&x| sig17(x)));
        match row.diag {
            Some(d) => fields.extend([
                sig17(d.k),
                sig17(d.delta_hat),
                sig17(d.b),
                u8::from(d.restarted).to_string(),
            ]),
            None => fields.extend(std::iter::repeat_n(String::new(), 4)),
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn trace_file_name(objective: &str, optimizer: &str) -> String {
    format!("{objective}_{optimizer}.csv")
}

/// Writes `<dir>/<objective>_<optimizer>.csv` and returns its path.
pub fn write_trace_csv(dir: &Path, record: &RunRecord) -> Result<PathBuf> {
    let path = dir.join(trace_file_name(&record.objective, record.optimizer.id()));
    write_file(&path, &trace_csv(record))?;
    Ok(path)
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

/// A trace CSV read back into columns. Empty cells are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl TraceTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| OptError::InvalidConfig("empty trace".into()))?;
        let columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        if columns.first().map(String::as_str) != Some("t") {
            return Err(OptError::InvalidConfig(format!("not a trace header: `{header}`")));
        }
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != columns.len() {
                return Err(OptError::InvalidConfig(format!(
                    "trace row {} has {} cells, header has {}",
                    n + 1,
                    cells.len(),
                    columns.len()
                )));
            }
            let row = cells
                .iter()
                .zip(&columns)
                .map(|(c, col)| parse_cell(c, col))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(TraceTable { columns, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Number of `theta_i` columns.
    pub fn dim(&self) -> usize {
        self.columns.iter().filter(|c| c.starts_with("theta_")).count()
    }
}

fn parse_cell(cell: &str, col: &str) -> Result<Option<f64>> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    cell.parse::<f64>().map(Some).map_err(|_| OptError::InvalidValue {
        key: col.to_string(),
        value: cell.to_string(),
    })
}

#[derive(Serialize)]
#[serde(untagged)]
enum ConfigJson {
    Float(Sig17),
    Text(&'static str),
}

/// Hyperparameters in the optimizer's own key order.
struct ConfigMap(Vec<(&'static str, ConfigJson)>);

impl Serialize for ConfigMap {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_map(self.0.iter().map(|(k, v)| (k, v)))
    }
}

fn config_json(spec: &OptimizerSpec) -> ConfigMap {
    ConfigMap(
        spec.entries()
            .into_iter()
            .map(|(k, v)| {
                let value = match v {
                    ConfigValue::Float(x) => ConfigJson::Float(Sig17(x)),
                    ConfigValue::Schedule(s) => ConfigJson::Text(s.as_str()),
                };
                (k, value)
            })
            .collect(),
    )
}

#[derive(Serialize)]
struct RunJson {
    optimizer: &'static str,
    config: ConfigMap,
    final_loss: Sig17,
    best_loss: Sig17,
    first_step_within_tol: Option<u64>,
}

impl RunJson {
    fn new(spec: &OptimizerSpec, summary: &RunSummary) -> Self {
        RunJson {
            optimizer: spec.id(),
            config: config_json(spec),
            final_loss: Sig17(summary.final_loss),
            best_loss: Sig17(summary.best_loss),
            first_step_within_tol: summary.first_step_within_tol,
        }
    }
}

#[derive(Serialize)]
struct RaceJson<'a> {
    objective: &'a str,
    runs: Vec<RunJson>,
}

/// `{objective, runs: [{optimizer, config, final_loss, best_loss, first_step_within_tol}]}`
pub fn race_json(table: &RaceTable) -> String {
    let runs = table.entries.iter().map(|e| RunJson::new(&e.optimizer, &e.summary)).collect();
    let doc = RaceJson { objective: &table.objective, runs };
    let mut text = serde_json::to_string_pretty(&doc).expect("race summary serializes");
    text.push('\n');
    text
}

#[derive(Serialize)]
struct SweepRunJson {
    assignments: serde_json::Map<String, serde_json::Value>,
    #[serde(flatten)]
    run: RunJson,
    failed: bool,
    best: bool,
}

#[derive(Serialize)]
struct SweepJson<'a> {
    objective: &'a str,
    runs: Vec<SweepRunJson>,
}

/// Race-style summary with each point's grid assignments and the `best` flag.
pub fn sweep_json(objective: &str, entries: &[SweepEntry]) -> String {
    let runs = entries
        .iter()
        .map(|e| SweepRunJson {
            assignments: e
                .assignments
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                .collect(),
            run: RunJson::new(&e.spec.optimizer, &e.summary),
            failed: e.failed,
            best: e.best,
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&SweepJson { objective, runs })
        .expect("sweep summary serializes");
    text.push('\n');
    text
}
