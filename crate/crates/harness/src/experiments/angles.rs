//! Uniformity of the rescaled non-spike directions, via pairwise angles.

use spikecov_core::linalg::gram_top_eig;
use spikecov_core::randgen::{gen_spiked_sample, rep_rng};
use spikecov_core::spiked::rescaled_nonspike_direction;
use spikecov_core::stats::{ks_distance, mean, normal_cdf, pairwise_angle_stats, summarize_sample, DEFAULT_MAX_PAIRS};

use super::spiked_spec;
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{HarnessError, Result};
use crate::pool::run_indexed;
use crate::report::{Cell, ExperimentReport};

struct Rep {
    /// `||xi_hat_jB||` per spike.
    tail_norm: Vec<f64>,
    directions: Vec<Vec<f64>>,
}

pub fn run_angles(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let spec = spiked_spec(cfg)?;
    let max_pairs = cfg.get_usize("max_pairs", DEFAULT_MAX_PAIRS)?;
    if max_pairs == 0 {
        return Err(HarnessError::config("max_pairs", "must be positive"));
    }
    if cfg.reps < 2 {
        return Err(HarnessError::config("reps", "pairwise angles need at least 2 replications"));
    }
    let m = spec.m();

    let reps = run_indexed(cfg.reps, |rep| {
        let mut rng = rep_rng(cfg.seed, rep as u64);
        let x = gen_spiked_sample(&spec, &mut rng);
        let eig = gram_top_eig(&x, m)?;
        let mut out = Rep {
            tail_norm: Vec::with_capacity(m),
            directions: Vec::with_capacity(m),
        };
        for j in 0..m {
            let xi = eig.vector(j).to_vec();
            out.tail_norm.push(xi[m..].iter().map(|v| v * v).sum::<f64>().sqrt());
            out.directions.push(rescaled_nonspike_direction(&xi, &spec)?);
        }
        Ok(out)
    })?;

    let mut columns = vec!["rep".to_string()];
    columns.extend((1..=m).map(|j| format!("nonspike_norm_{j}")));
    let mut report = ExperimentReport::new(ExperimentKind::Angles, columns, cfg.echo());
    for (i, r) in reps.iter().enumerate() {
        let mut row: Vec<Cell> = vec![i.into()];
        row.extend(r.tail_norm.iter().map(|v| Cell::Float(*v)));
        report.push_row(row);
    }

    for j in 0..m {
        let dirs: Vec<Vec<f64>> = reps.iter().map(|r| r.directions[j].clone()).collect();
        let stats = pairwise_angle_stats(&dirs, Some(max_pairs), cfg.seed.wrapping_add(j as u64))?;
        let label = j + 1;
        report.metric(format!("pairs_{label}"), stats.len() as f64)?;
        report.metric(format!("ks_angles_{label}"), ks_distance(&stats, normal_cdf)?)?;
        report.metric(format!("mean_angle_stat_{label}"), mean(&stats))?;
        if stats.len() >= 2 {
            report.metric(format!("var_angle_stat_{label}"), summarize_sample(&stats)?.variance)?;
        }
        let norms: Vec<f64> = reps.iter().map(|r| r.tail_norm[j]).collect();
        report.metric(format!("mean_nonspike_norm_{label}"), mean(&norms))?;
    }
    Ok(report)
}
