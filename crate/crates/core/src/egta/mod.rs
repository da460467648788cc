//! Empirical game-theoretic analysis: split trained policies into
//! cooperators and defectors, estimate the induced 2x2 payoff matrix by
//! playouts, and classify the matrix game.

mod estimate;
mod matrix;
mod pool;
mod report;

use thiserror::Error;

pub use estimate::{estimate_payoffs, PayoffEstimate, PlayoutSpec, StopRule, Tolerance};
pub use matrix::{
    check_ssd_inequalities, classify_matrix, CellEstimate, DilemmaClass, EmpiricalPayoffMatrix,
    SsdVerdict,
};
pub use pool::{
    classify_policy, partition, Manifest, ManifestEntry, PolicyClass, PolicyPool, PoolMember,
    Pools, Thresholds,
};
pub use report::{read_payoff_report, summary_line, write_payoff_report, REPORT_HEADER};

use crate::harness::HarnessError;
use crate::learner::LearnerError;

#[derive(Debug, Error)]
pub enum EgtaError {
    #[error("invalid thresholds: alpha_c {alpha_c} exceeds alpha_d {alpha_d}")]
    InvalidThresholds { alpha_c: f64, alpha_d: f64 },
    #[error("pool {0} is empty")]
    EmptyPool(char),
    #[error("policy in both pools: {0}")]
    OverlappingPools(String),
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("payoff report: {0}")]
    Report(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
