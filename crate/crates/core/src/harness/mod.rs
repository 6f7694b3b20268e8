//! Experiment orchestration: configuration, sweeps, single runs and report files.

pub mod config;
pub mod enumerate;
pub mod report;
pub mod simulate;
pub mod sweep;

use thiserror::Error;

use crate::lowerbound::table::TableError;
use crate::topology::TopologyError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error("{0}: {1}")]
    Io(String, String),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("the configuration selects no instances")]
    NoInstances,
    #[error("{0}")]
    Unsupported(String),
}
