//! False discovery proportion under factor dependence: true FDP against the
//! known-loadings approximation and the POET / S-POET plug-in estimates.

use ndarray::{Array1, ArrayView1};
use spikecov_core::apps::{fdp_approx, fdp_counts, fdp_estimate, least_squares_w, loadings_from_eigen, pvalues};
use spikecov_core::error::Error as CoreError;
use spikecov_core::estimators::{panel_trace, poet, shrink_spikes};
use spikecov_core::linalg::lanczos::{lanczos, LanczosTarget};
use spikecov_core::linalg::FactorCovariance;
use spikecov_core::randgen::{
    gen_fdp_stats, gen_idio_sd, make_loadings, rep_rng, sparse_mu_star, CovarianceModel, FdpModelSpec,
};
use spikecov_core::stats::{correlation, mean, median};

use super::{invalid, threshold_config};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{HarnessError, Result};
use crate::pool::run_indexed;
use crate::report::{Cell, ExperimentReport};

const LANCZOS_TOL: f64 = 1e-10;

struct Rep {
    r: usize,
    v: usize,
    fdp_true: f64,
    fdp_approx: f64,
    fdp_poet: f64,
    fdp_spoet: f64,
}

/// Leading `m` eigenpairs of `B B' + D` as loadings `sqrt(lambda_j) gamma_j`.
fn population_loadings(fc: &FactorCovariance, m: usize) -> Result<ndarray::Array2<f64>> {
    let b = fc.loadings();
    let d = fc.idio_var();
    let matvec = |x: &[f64], y: &mut [f64]| {
        let xv = ArrayView1::from(x);
        let proj = b.t().dot(&xv);
        let bx: Array1<f64> = b.dot(&proj);
        for i in 0..y.len() {
            y[i] = bx[i] + d[i] * x[i];
        }
    };
    let target = LanczosTarget {
        top: m,
        bottom: false,
        vectors: true,
    };
    let out = lanczos(fc.dim(), matvec, target, LANCZOS_TOL)?;
    let vectors = out.top_vectors.expect("vectors requested");
    Ok(loadings_from_eigen(&out.top_values, &vectors))
}

pub fn run_fdp(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let n = cfg.get_usize("n", 100)?;
    let p = cfg.get_usize("p", 1000)?;
    let t = cfg.get_f64("t", 0.01)?;
    let scale = cfg.get_f64_list("spike_scale", &[6.0, 4.8, 3.6])?;
    let fraction = cfg.get_f64("signal_fraction", 0.1)?;
    let mu = cfg.get_f64("mu", 0.4)?;
    let shape = cfg.get_f64("gamma_shape", 100.0)?;
    let rate = cfg.get_f64("gamma_rate", 100.0)?;
    let thresh = threshold_config(cfg)?;
    let m = scale.len();
    if m == 0 || scale.iter().any(|s| !(*s > 0.0)) {
        return Err(HarnessError::config("spike_scale", "need at least one positive spike constant"));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(HarnessError::config("t", format!("threshold {t} must lie in (0, 1)")));
    }
    if !(0.0..=1.0).contains(&fraction) {
        return Err(HarnessError::config("signal_fraction", "must lie in [0, 1]"));
    }
    if !(shape > 0.0 && rate > 0.0) {
        return Err(HarnessError::config("gamma_shape", "gamma parameters must be positive"));
    }
    if n < 2 {
        return Err(HarnessError::config("n", "n must be at least 2"));
    }
    let denominator = p as f64 - m as f64 - (p * m) as f64 / n as f64;
    if !(denominator > 0.0) {
        return Err(HarnessError::config(
            "p",
            format!("p = {p}, n = {n} leaves no room for S-POET (p - m - pm/n = {denominator})"),
        ));
    }
    let spikes: Vec<f64> = scale.iter().map(|s| s * p as f64 / (n as f64).sqrt()).collect();
    let count = (fraction * p as f64).round() as usize;
    let mu_star = sparse_mu_star(p, n, count, mu);

    let outcomes: Vec<Option<Rep>> = run_indexed(cfg.reps, |rep| {
        let mut rng = rep_rng(cfg.seed, rep as u64);
        let b0 = make_loadings(p, &spikes, &mut rng);
        let sd = gen_idio_sd(p, shape, rate, &mut rng)?;
        let fc = FactorCovariance::new(b0, sd.iter().map(|s| s * s).collect())
            .map_err(invalid("spike_scale"))?
            .correlation();
        let spec = FdpModelSpec::new(n, m, CovarianceModel::Factor(fc.clone()), mu_star.clone(), t)
            .map_err(invalid("p"))?;
        let sample = gen_fdp_stats(&spec, &mut rng);
        let mask = spec.null_mask();
        let (r, v) = fdp_counts(&pvalues(&sample.z), t, &mask);
        if r == 0 {
            return Ok(None);
        }

        let b = population_loadings(&fc, m)?;
        let w = least_squares_w(b.view(), &sample.z)?;
        let approx = fdp_approx(b.view(), &w, r, t)?;

        let y = sample.raw.transpose().center_rows();
        let poet_est = poet(&y, m, &thresh)?;
        let spoet_est = shrink_spikes(&poet_est, panel_trace(&y), n)?;
        let fdp_poet = fdp_estimate(&poet_est, &sample.z, t, Some(&mask))?;
        let fdp_spoet = fdp_estimate(&spoet_est, &sample.z, t, Some(&mask))?;
        Ok(Some(Rep {
            r,
            v,
            fdp_true: v as f64 / r as f64,
            fdp_approx: approx,
            fdp_poet: fdp_poet.fdp_est,
            fdp_spoet: fdp_spoet.fdp_est,
        }))
    })?;

    let columns = ["rep", "R", "V", "fdp_true", "fdp_approx", "fdp_poet", "fdp_spoet"]
        .map(String::from)
        .to_vec();
    let mut report = ExperimentReport::new(ExperimentKind::Fdp, columns, cfg.echo());
    let mut kept = Vec::new();
    for (i, o) in outcomes.iter().enumerate() {
        if let Some(r) = o {
            report.push_row(vec![
                i.into(),
                r.r.into(),
                r.v.into(),
                Cell::Float(r.fdp_true),
                Cell::Float(r.fdp_approx),
                Cell::Float(r.fdp_poet),
                Cell::Float(r.fdp_spoet),
            ]);
            kept.push(r);
        }
    }
    let skipped = outcomes.len() - kept.len();
    if skipped > 0 {
        log::warn!("{skipped} replications had no discoveries and were skipped");
    }
    report.metric("skipped_reps", skipped as f64)?;
    if kept.is_empty() {
        return Ok(report);
    }

    let truth: Vec<f64> = kept.iter().map(|r| r.fdp_true).collect();
    report.metric("mean_fdp_true", mean(&truth))?;
    let estimates: [(&str, Vec<f64>); 3] = [
        ("approx", kept.iter().map(|r| r.fdp_approx).collect()),
        ("poet", kept.iter().map(|r| r.fdp_poet).collect()),
        ("spoet", kept.iter().map(|r| r.fdp_spoet).collect()),
    ];
    for (name, est) in &estimates {
        let abs_err: Vec<f64> = est.iter().zip(&truth).map(|(a, b)| (a - b).abs()).collect();
        report.metric(format!("median_abs_error_{name}"), median(&abs_err)?)?;
        report.metric(format!("mean_fdp_{name}"), mean(est))?;
        match correlation(est, &truth) {
            Ok(rho) => report.metric(format!("corr_{name}"), rho)?,
            Err(CoreError::Degenerate(_) | CoreError::InvalidInput(_)) => {
                log::warn!("correlation for {name} is undefined (constant series or too few rows)")
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(report)
}
