use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use super::config::ExperimentConfig;
use super::metrics::MetricsRow;
use super::train::train_cell;
use super::HarnessError;

/// A base config and named value lists; every combination is one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: toml::Table,
    /// Dotted config paths and their values, in enumeration order (the
    /// last axis varies fastest).
    pub axes: Vec<(String, Vec<toml::Value>)>,
    pub seeds_per_cell: u64,
    pub base_dir: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    seeds_per_cell: u64,
    base: toml::Table,
    #[serde(default)]
    axes: toml::Table,
}

/// One point of the parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub index: usize,
    pub id: String,
    pub assignments: Vec<(String, toml::Value)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub cell_id: String,
    pub seed: u64,
    pub error: String,
}

/// Merged rows of every completed run plus the runs that failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResults {
    pub cells: Vec<SweepCell>,
    pub rows: Vec<MetricsRow>,
    pub failures: Vec<CellFailure>,
}

fn label(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn set_path(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<(), HarnessError> {
    let mut parts: Vec<&str> = path.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| {
        HarnessError::Config(format!("empty axis name {path:?}"))
    })?;
    let mut t = table;
    for p in parts {
        let entry = t
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        t = entry
            .as_table_mut()
            .ok_or_else(|| HarnessError::Config(format!("axis {path:?}: {p} is not a section")))?;
    }
    t.insert(last.to_string(), value);
    Ok(())
}

impl SweepSpec {
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self, HarnessError> {
        let f: SweepFile = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        let mut axes = Vec::new();
        for (k, v) in f.axes {
            let values = match v {
                toml::Value::Array(a) if !a.is_empty() => a,
                _ => {
                    return Err(HarnessError::Config(format!(
                        "axis {k:?} must be a non-empty list"
                    )))
                }
            };
            axes.push((k, values));
        }
        if f.seeds_per_cell == 0 {
            return Err(HarnessError::Config("seeds_per_cell must be positive".into()));
        }
        Ok(SweepSpec {
            base: f.base,
            axes,
            seeds_per_cell: f.seeds_per_cell,
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, path.parent().unwrap_or(Path::new("")))
    }

    /// The cross product of all axes in deterministic order.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut cells: Vec<Vec<(String, toml::Value)>> = vec![Vec::new()];
        for (name, values) in &self.axes {
            cells = cells
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |v| {
                        let mut a = prefix.clone();
                        a.push((name.clone(), v.clone()));
                        a
                    })
                })
                .collect();
        }
        cells
            .into_iter()
            .enumerate()
            .map(|(index, assignments)| {
                let id = if assignments.is_empty() {
                    "base".to_string()
                } else {
                    assignments
                        .iter()
                        .map(|(k, v)| format!("{k}={}", label(v)))
                        .collect::<Vec<_>>()
                        .join(";")
                };
                SweepCell {
                    index,
                    id,
                    assignments,
                }
            })
            .collect()
    }

    fn base_seed(&self) -> Result<u64, HarnessError> {
        self.base
            .get("seed")
            .and_then(toml::Value::as_integer)
            .and_then(|s| u64::try_from(s).ok())
            .ok_or_else(|| HarnessError::Config("base config needs a non-negative seed".into()))
    }

    /// Concrete config of replicate `replica` of `cell`.
    pub fn cell_config(&self, cell: &SweepCell, replica: u64) -> Result<ExperimentConfig, HarnessError> {
        let mut t = self.base.clone();
        for (k, v) in &cell.assignments {
            set_path(&mut t, k, v.clone())?;
        }
        let seed = self.base_seed()? + replica;
        t.insert("seed".into(), toml::Value::Integer(seed as i64));
        t.remove("metrics_path");
        if let Some(dir) = t.get("checkpoint_dir").and_then(toml::Value::as_str) {
            let sub = Path::new(dir).join(format!("cell{:03}_seed{seed}", cell.index));
            t.insert(
                "checkpoint_dir".into(),
                toml::Value::String(sub.to_string_lossy().into_owned()),
            );
        }
        let cfg = ExperimentConfig::from_value(toml::Value::Table(t), &self.base_dir)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs every (cell, seed) pair on `parallelism` worker threads. Results
/// are ordered by cell then seed and do not depend on the thread count; a
/// failing run is reported without stopping the others.
pub fn sweep(spec: &SweepSpec, parallelism: usize) -> Result<SweepResults, HarnessError> {
    let cells = spec.cells();
    let base_seed = spec.base_seed()?;
    let jobs: Vec<(&SweepCell, u64)> = cells
        .iter()
        .flat_map(|c| (0..spec.seeds_per_cell).map(move |k| (c, k)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<Vec<MetricsRow>, CellFailure>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(cell, k)| {
                spec.cell_config(cell, k)
                    .and_then(|cfg| train_cell(&cfg, &cell.id))
                    .map(|o| o.metrics)
                    .map_err(|e| CellFailure {
                        cell_id: cell.id.clone(),
                        seed: base_seed + k,
                        error: e.to_string(),
                    })
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => rows.extend(r),
            Err(f) => failures.push(f),
        }
    }
    Ok(SweepResults {
        cells,
        rows,
        failures,
    })
}
