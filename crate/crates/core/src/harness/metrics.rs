use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::HarnessError;

/// Fixed column order of the metrics file.
pub const METRICS_HEADER: [&str; 9] = [
    "cell_id",
    "seed",
    "step",
    "agent",
    "return",
    "metric_name",
    "metric_value",
    "epsilon",
    "loss",
];

/// Evaluation result for one (cell, seed, eval point).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub cell_id: String,
    pub seed: u64,
    pub step: u64,
    /// Mean undiscounted evaluation return per agent.
    pub returns: [f64; 2],
    pub metric_name: String,
    /// Per-agent social metric; `None` when undefined (no captures).
    pub metric: [Option<f64>; 2],
    pub epsilon: [f64; 2],
    /// Mean training loss since the previous eval point.
    pub loss: [Option<f64>; 2],
}

/// One line of the metrics file: a [`MetricsRow`] seen from one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub cell_id: String,
    pub seed: u64,
    pub step: u64,
    pub agent: usize,
    #[serde(rename = "return")]
    pub ret: f64,
    pub metric_name: String,
    pub metric_value: Option<f64>,
    pub epsilon: f64,
    pub loss: Option<f64>,
}

impl MetricsRow {
    pub fn records(&self) -> [MetricsRecord; 2] {
        [0, 1].map(|agent| MetricsRecord {
            cell_id: self.cell_id.clone(),
            seed: self.seed,
            step: self.step,
            agent,
            ret: self.returns[agent],
            metric_name: self.metric_name.clone(),
            metric_value: self.metric[agent],
            epsilon: self.epsilon[agent],
            loss: self.loss[agent],
        })
    }
}

pub fn write_metrics<W: Write>(rows: &[MetricsRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(METRICS_HEADER)?;
    for row in rows {
        for rec in row.records() {
            w.serialize(rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn metrics_to_string(rows: &[MetricsRow]) -> String {
    let mut buf = Vec::new();
    write_metrics(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

/// Reads a metrics file, rejecting any header other than the fixed one.
pub fn read_metrics<R: Read>(input: R) -> Result<Vec<MetricsRecord>, HarnessError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != METRICS_HEADER {
        return Err(HarnessError::Config(format!(
            "metrics header {header:?} does not match {METRICS_HEADER:?}"
        )));
    }
    r.deserialize()
        .map(|rec| rec.map_err(HarnessError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_round_trip() {
        let row = MetricsRow {
            cell_id: "gathering.n_apple=5".into(),
            seed: 3,
            step: 1000,
            returns: [4.0, 2.5],
            metric_name: "beam_use_rate".into(),
            metric: [Some(0.125), None],
            epsilon: [0.55, 0.55],
            loss: [None, Some(0.01)],
        };
        let text = metrics_to_string(&[row.clone()]);
        assert!(text.starts_with(
            "cell_id,seed,step,agent,return,metric_name,metric_value,epsilon,loss\n"
        ));
        assert_eq!(text.lines().count(), 3);
        let back = read_metrics(text.as_bytes()).unwrap();
        assert_eq!(back, row.records().to_vec());
    }

    #[test]
    fn foreign_header_rejected() {
        assert!(read_metrics("a,b\n1,2\n".as_bytes()).is_err());
    }
}
