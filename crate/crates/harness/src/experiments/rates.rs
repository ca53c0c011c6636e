//! Convergence rate of the leading eigenvector angle, one spike against two.

use spikecov_core::linalg::gram_top_eig;
use spikecov_core::randgen::{gen_spiked_sample, rep_rng, SpikedModelSpec};
use spikecov_core::spiked::{spike_angle, summarize};
use spikecov_core::stats::{median, ols_slope};

use super::invalid;
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{HarnessError, Result};
use crate::pool::run_indexed;
use crate::report::{Cell, ExperimentReport};

const SCENARIOS: [&str; 2] = ["single", "double"];

/// `(n, p)` pairs with `n = floor(base growth^l)` for `l < levels` and
/// `p = round(n^3 / 100)`.
pub fn rates_grid(levels: usize, base: f64, growth: f64) -> Vec<(usize, usize)> {
    (0..levels)
        .map(|l| (base * growth.powi(l as i32) + 1e-9).floor() as usize)
        .map(|n| (n, p_for(n)))
        .collect()
}

fn p_for(n: usize) -> usize {
    ((n as f64).powi(3) / 100.0).round() as usize
}

fn scenario_spec(scenario: usize, n: usize, p: usize) -> spikecov_core::error::Result<SpikedModelSpec> {
    let lambda = p as f64;
    let spikes = if scenario == 0 { vec![lambda] } else { vec![lambda, lambda / 2.0] };
    SpikedModelSpec::new(p, n, spikes, &[1.0])
}

pub fn run_rates(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let grid = match cfg.get_str("n_grid") {
        Some(_) => cfg
            .get_usize_list("n_grid", &[])?
            .into_iter()
            .map(|n| (n, p_for(n)))
            .collect(),
        None => rates_grid(
            cfg.get_usize("levels", 10)?,
            cfg.get_f64("n_base", 10.0)?,
            cfg.get_f64("n_growth", 1.2)?,
        ),
    };
    let mut distinct: Vec<usize> = grid.iter().map(|g| g.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(HarnessError::config("n_grid", "need at least two distinct sample sizes"));
    }
    let mut specs = Vec::with_capacity(2 * grid.len());
    for s in 0..SCENARIOS.len() {
        for &(n, p) in &grid {
            if n < 2 || p < 4 {
                return Err(HarnessError::config("n_grid", format!("grid point n = {n}, p = {p} is too small")));
            }
            let spec = scenario_spec(s, n, p).map_err(invalid("n_grid"))?;
            let limit = summarize(&spec)?.angle_limit[0];
            specs.push((spec, limit));
        }
    }

    let reps = cfg.reps;
    let values = run_indexed(specs.len() * reps, |job| {
        let (cell, rep) = (job / reps, job % reps);
        let (spec, limit) = &specs[cell];
        let stream = ((cell as u64) << 32) | rep as u64;
        let mut rng = rep_rng(cfg.seed, stream);
        let x = gen_spiked_sample(spec, &mut rng);
        let eig = gram_top_eig(&x, 1)?;
        let angle = spike_angle(&eig.vector(0).to_vec(), 0);
        Ok((angle, (angle - limit).abs()))
    })?;

    let columns = ["scenario", "n", "p", "rep", "angle", "abs_error"]
        .map(String::from)
        .to_vec();
    let mut report = ExperimentReport::new(ExperimentKind::Rates, columns, cfg.echo());
    let g = grid.len();
    for (job, (angle, err)) in values.iter().enumerate() {
        let (cell, rep) = (job / reps, job % reps);
        let (n, p) = grid[cell % g];
        report.push_row(vec![
            SCENARIOS[cell / g].into(),
            n.into(),
            p.into(),
            rep.into(),
            Cell::Float(*angle),
            Cell::Float(*err),
        ]);
    }

    for (s, name) in SCENARIOS.iter().enumerate() {
        let mut log_n = Vec::with_capacity(g);
        let mut log_med = Vec::with_capacity(g);
        for (gi, &(n, _)) in grid.iter().enumerate() {
            let cell = s * g + gi;
            let errs: Vec<f64> = values[cell * reps..(cell + 1) * reps].iter().map(|v| v.1).collect();
            let med = median(&errs)?;
            report.metric(format!("median_abs_error_{name}_n{n}"), med)?;
            log_n.push((n as f64).ln());
            log_med.push(med.ln());
        }
        let fit = ols_slope(&log_n, &log_med)?;
        report.metric(format!("slope_{name}"), fit.slope)?;
        report.metric(format!("intercept_{name}"), fit.intercept)?;
        report.metric(format!("r2_{name}"), fit.r2)?;
    }
    Ok(report)
}
