//! Seeded Monte Carlo experiments on spiked covariance models.
//!
//! Each experiment takes an [`ExperimentConfig`], runs its replications on a
//! worker pool (one generator stream per replication) and returns an
//! [`ExperimentReport`] holding per-replication CSV rows and named summary
//! metrics.

pub mod config;
pub mod error;
pub mod experiments;
pub mod pool;
pub mod report;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{HarnessError, Result};
pub use experiments::run;
pub use report::{Cell, ExperimentReport};
