//! Plot-ready data files derived from sweep and payoff results.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ssdlab_core::egta::{classify_matrix, EmpiricalPayoffMatrix};
use ssdlab_core::harness::MetricsRecord;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureKind {
    /// Long-form (x, y, value) over a two-axis sweep.
    Heatmap,
    /// Metric against the first swept parameter, one series per setting
    /// of the remaining axes.
    SweepCurves,
    /// (fear, greed, class) per payoff matrix.
    Scatter,
}

/// Input rows for a figure.
#[derive(Debug, Clone, PartialEq)]
pub enum ResultsTable {
    Metrics(Vec<MetricsRecord>),
    Payoffs(Vec<EmpiricalPayoffMatrix>),
}

#[derive(Debug, Error, PartialEq)]
pub enum FigureError {
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
}

fn mismatch<T>(msg: impl Into<String>) -> Result<T, FigureError> {
    Err(FigureError::SchemaMismatch(msg.into()))
}

/// Splits a sweep cell id `k=v;k=v` into its assignments.
pub fn parse_cell_id(id: &str) -> Option<Vec<(String, String)>> {
    id.split(';')
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
        })
        .collect()
}

/// Final-step metric averaged over seeds and agents, keyed by cell.
/// Cells whose metric is undefined everywhere are skipped.
fn final_means(rows: &[MetricsRecord]) -> BTreeMap<String, f64> {
    let mut last: BTreeMap<(&str, u64), u64> = BTreeMap::new();
    for r in rows {
        let s = last.entry((&r.cell_id, r.seed)).or_insert(r.step);
        *s = (*s).max(r.step);
    }
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in rows {
        if last[&(r.cell_id.as_str(), r.seed)] != r.step {
            continue;
        }
        if let Some(v) = r.metric_value {
            let e = acc.entry(r.cell_id.clone()).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

pub fn emit_figure_data(table: &ResultsTable, kind: FigureKind) -> Result<String, FigureError> {
    match (kind, table) {
        (FigureKind::Scatter, ResultsTable::Payoffs(ms)) => {
            if ms.is_empty() {
                return mismatch("no payoff matrices");
            }
            let mut out = String::from("fear,greed,class\n");
            for m in ms {
                writeln!(out, "{},{},{}", m.fear(), m.greed(), classify_matrix(m)).unwrap();
            }
            Ok(out)
        }
        (FigureKind::Heatmap | FigureKind::SweepCurves, ResultsTable::Metrics(rows)) => {
            if rows.is_empty() {
                return mismatch("no metrics rows");
            }
            let means = final_means(rows);
            let mut cells = Vec::new();
            for (id, v) in &means {
                let Some(axes) = parse_cell_id(id) else {
                    return mismatch(format!("cell id {id:?} is not a sweep cell"));
                };
                cells.push((axes, *v));
            }
            if kind == FigureKind::Heatmap {
                heatmap(&cells)
            } else {
                curves(&cells)
            }
        }
        (FigureKind::Scatter, _) => mismatch("scatter needs payoff matrices"),
        _ => mismatch("heatmap and sweep-curves need sweep metrics"),
    }
}

type Cell = (Vec<(String, String)>, f64);

fn heatmap(cells: &[Cell]) -> Result<String, FigureError> {
    let mut out = String::new();
    for (i, (axes, v)) in cells.iter().enumerate() {
        if axes.len() != 2 {
            return mismatch("heatmap needs exactly two swept axes");
        }
        if i == 0 {
            writeln!(out, "x,y,value").unwrap();
        }
        writeln!(out, "{},{},{}", axes[0].1, axes[1].1, v).unwrap();
    }
    Ok(out)
}

fn curves(cells: &[Cell]) -> Result<String, FigureError> {
    let mut out = String::from("series,x,value\n");
    for (axes, v) in cells {
        let (x, rest) = axes.split_first().expect("cell ids are never empty");
        let series = if rest.is_empty() {
            "all".to_string()
        } else {
            rest.iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(";")
        };
        writeln!(out, "{series},{},{}", x.1, v).unwrap();
    }
    Ok(out)
}
