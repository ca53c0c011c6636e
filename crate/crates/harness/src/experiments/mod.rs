//! The five experiments. Each `run_*` validates its parameters, runs
//! replications on the pool and aggregates in replication order.

mod angles;
mod eigen;
mod fdp;
mod rates;
mod spoet_errors;

use std::time::Instant;

use spikecov_core::error::Error as CoreError;
use spikecov_core::estimators::{Shrinkage, ThresholdConfig};
use spikecov_core::randgen::SpikedModelSpec;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{HarnessError, Result};
use crate::report::ExperimentReport;

pub use angles::run_angles;
pub use eigen::run_eigen;
pub use fdp::run_fdp;
pub use rates::{rates_grid, run_rates};
pub use spoet_errors::run_spoet_errors;

/// Runs the configured experiment and records its wall time.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut report = match cfg.experiment {
        ExperimentKind::Eigen => run_eigen(cfg),
        ExperimentKind::Angles => run_angles(cfg),
        ExperimentKind::Rates => run_rates(cfg),
        ExperimentKind::SpoetErrors => run_spoet_errors(cfg),
        ExperimentKind::Fdp => run_fdp(cfg),
    }?;
    report.wall_time = start.elapsed();
    log::info!(
        "{} finished: {} rows in {:.2?}",
        cfg.experiment,
        report.rows.len(),
        report.wall_time
    );
    Ok(report)
}

/// Maps a model-construction failure onto the config field that caused it.
pub(crate) fn invalid(field: &str) -> impl FnOnce(CoreError) -> HarnessError + '_ {
    move |e| HarnessError::config(field, e.to_string())
}

/// `n`, `p`, `spikes`, `nonspike` with the eigen-structure defaults.
pub(crate) fn spiked_spec(cfg: &ExperimentConfig) -> Result<SpikedModelSpec> {
    let n = cfg.get_usize("n", 50)?;
    let p = cfg.get_usize("p", 500)?;
    let spikes = cfg.get_f64_list("spikes", &[50.0, 20.0, 10.0])?;
    let nonspike = cfg.get_f64("nonspike", 1.0)?;
    if spikes.is_empty() {
        return Err(HarnessError::config("spikes", "at least one spike is required"));
    }
    if p < spikes.len() + 3 {
        return Err(HarnessError::config("p", format!("p = {p} must exceed the spike count by at least 3")));
    }
    if n < 2 {
        return Err(HarnessError::config("n", "n must be at least 2"));
    }
    SpikedModelSpec::new(p, n, spikes, &[nonspike]).map_err(invalid("spikes"))
}

pub(crate) fn threshold_config(cfg: &ExperimentConfig) -> Result<ThresholdConfig> {
    let mut t = ThresholdConfig::default();
    t.c = cfg.get_f64("C", t.c)?;
    if let Some(s) = cfg.get_str("shrinkage") {
        t.shrinkage = s
            .parse::<Shrinkage>()
            .map_err(|e| HarnessError::config("shrinkage", e.to_string()))?;
    }
    t.validate().map_err(invalid("C"))?;
    Ok(t)
}
