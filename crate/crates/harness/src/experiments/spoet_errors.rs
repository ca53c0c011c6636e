//! Estimation error of the sample covariance, POET and S-POET on factor
//! models with spikes of order `sqrt(T)`.

use spikecov_core::estimators::{panel_trace, poet, sample_estimate, shrink_spikes, CovEstimate};
use spikecov_core::linalg::{spectral_norm_sym, SymMatrix, Whitener};
use spikecov_core::randgen::{gen_factor_panel, gen_idio_sd, make_loadings, rep_rng, FactorModelSpec, IdioCov};
use spikecov_core::stats::{mean, ols_slope};

use super::{invalid, threshold_config};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{HarnessError, Result};
use crate::pool::run_indexed;
use crate::report::{Cell, ExperimentReport};

pub const ESTIMATORS: [&str; 3] = ["sample", "poet", "spoet"];
/// `rel_spectral` is the unnormalised `||Sigma^{-1/2} E Sigma^{-1/2}||`;
/// `rel_spectral_scaled` carries the extra `p^{-1/2}`.
pub const NORMS: [&str; 5] = ["rel_spectral", "rel_frobenius", "spectral", "max", "rel_spectral_scaled"];
/// Norms compared across estimators.
const COMPARED: [&str; 4] = ["rel_spectral", "rel_frobenius", "spectral", "max"];

type Errors = [[f64; 5]; 3];

fn norms_of(est: &CovEstimate, sigma: &SymMatrix, whitener: &Whitener) -> Result<[f64; 5]> {
    let diff = est.assemble().sub(sigma)?;
    let rel = whitener.relative_norms_of_difference(&diff)?;
    let max = diff.as_array().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok([
        rel.rel_operator,
        rel.rel_frobenius,
        spectral_norm_sym(&diff)?,
        max,
        rel.rel_spectral,
    ])
}

pub fn run_spoet_errors(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let t_grid = cfg.get_usize_list("t_grid", &[50, 70, 90, 110, 130, 150])?;
    let exponent = cfg.get_f64("p_exponent", 1.5)?;
    let c = cfg.get_f64_list("c", &[0.2, 0.5, 1.0])?;
    let shape = cfg.get_f64("gamma_shape", 100.0)?;
    let rate = cfg.get_f64("gamma_rate", 100.0)?;
    let thresh = threshold_config(cfg)?;
    if t_grid.is_empty() {
        return Err(HarnessError::config("t_grid", "at least one sample size is required"));
    }
    if c.is_empty() || c.iter().any(|v| !(*v > 0.0)) {
        return Err(HarnessError::config("c", "spike ratios must be positive"));
    }
    if !(shape > 0.0 && rate > 0.0) {
        return Err(HarnessError::config("gamma_shape", "gamma parameters must be positive"));
    }
    let m = c.len();
    let grid: Vec<(usize, usize)> = t_grid
        .iter()
        .map(|&t| (t, (t as f64).powf(exponent).floor() as usize))
        .collect();
    for &(t, p) in &grid {
        let denominator = p as f64 - m as f64 - (p * m) as f64 / t as f64;
        if t < 2 || !(denominator > 0.0) {
            return Err(HarnessError::config(
                "t_grid",
                format!("T = {t}, p = {p} leaves no room for S-POET (p - m - pm/T = {denominator})"),
            ));
        }
    }

    let reps = cfg.reps;
    let results: Vec<Errors> = run_indexed(grid.len() * reps, |job| {
        let (cell, rep) = (job / reps, job % reps);
        let (t, p) = grid[cell];
        let mut rng = rep_rng(cfg.seed, ((cell as u64) << 32) | rep as u64);
        let spikes: Vec<f64> = c.iter().map(|cj| p as f64 / (t as f64 * cj)).collect();
        let b = make_loadings(p, &spikes, &mut rng);
        let sd = gen_idio_sd(p, shape, rate, &mut rng)?;
        let spec = FactorModelSpec::new(t, b, IdioCov::Diagonal(sd)).map_err(invalid("t_grid"))?;
        let fc = spec.factor_covariance()?;
        let sigma = fc.dense();
        let whitener = fc.whitener()?;
        let y = gen_factor_panel(&spec, &mut rng).y_matrix();

        let sample = sample_estimate(&y, false)?;
        let poet_est = poet(&y, m, &thresh)?;
        let spoet_est = shrink_spikes(&poet_est, panel_trace(&y), t)?;
        Ok([
            norms_of(&sample, &sigma, &whitener)?,
            norms_of(&poet_est, &sigma, &whitener)?,
            norms_of(&spoet_est, &sigma, &whitener)?,
        ])
    })?;

    let mut columns: Vec<String> = ["T", "p", "rep", "estimator"].map(String::from).to_vec();
    columns.extend(NORMS.iter().map(|s| s.to_string()));
    let mut report = ExperimentReport::new(ExperimentKind::SpoetErrors, columns, cfg.echo());
    for (job, errs) in results.iter().enumerate() {
        let (cell, rep) = (job / reps, job % reps);
        let (t, p) = grid[cell];
        for (e, name) in ESTIMATORS.iter().enumerate() {
            let mut row: Vec<Cell> = vec![t.into(), p.into(), rep.into(), (*name).into()];
            row.extend(errs[e].iter().map(|v| Cell::Float(*v)));
            report.push_row(row);
        }
    }

    // means[cell][estimator][norm]
    let means: Vec<Errors> = (0..grid.len())
        .map(|cell| {
            let block = &results[cell * reps..(cell + 1) * reps];
            let mut out = [[0.0; 5]; 3];
            for (e, row) in out.iter_mut().enumerate() {
                for (k, v) in row.iter_mut().enumerate() {
                    *v = mean(&block.iter().map(|r| r[e][k]).collect::<Vec<_>>());
                }
            }
            out
        })
        .collect();
    for (cell, &(t, _)) in grid.iter().enumerate() {
        for (e, est) in ESTIMATORS.iter().enumerate() {
            for (k, norm) in NORMS.iter().enumerate() {
                report.metric(format!("mean_{est}_{norm}_T{t}"), means[cell][e][k])?;
            }
        }
    }

    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let idx = |name: &str| NORMS.iter().position(|n| *n == name).expect("known norm");
    for norm in COMPARED {
        let k = idx(norm);
        let dominates = means.iter().all(|m| m[2][k] <= m[1][k]);
        report.metric(format!("spoet_dominates_poet_{norm}"), flag(dominates))?;
    }
    for norm in ["rel_frobenius", "max"] {
        let k = idx(norm);
        for (e, est) in [(1, "poet"), (2, "spoet")] {
            let beats = means.iter().all(|m| m[e][k] <= m[0][k]);
            report.metric(format!("{est}_beats_sample_{norm}"), flag(beats))?;
            let decreasing = means.windows(2).all(|w| w[1][e][k] <= w[0][e][k]);
            report.metric(format!("{est}_decreasing_{norm}"), flag(decreasing))?;
        }
    }
    if grid.len() >= 2 {
        let log_t: Vec<f64> = grid.iter().map(|g| (g.0 as f64).ln()).collect();
        for norm in ["rel_spectral", "rel_frobenius", "max"] {
            let k = idx(norm);
            for (e, est) in ESTIMATORS.iter().enumerate() {
                let log_err: Vec<f64> = means.iter().map(|m| m[e][k].ln()).collect();
                report.metric(format!("slope_{norm}_{est}"), ols_slope(&log_t, &log_err)?.slope)?;
            }
        }
    }
    Ok(report)
}
