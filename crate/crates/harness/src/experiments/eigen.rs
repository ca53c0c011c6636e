//! Empirical eigenvalues, eigenvector elements and spike angles on the
//! diagonal spiked model.

use spikecov_core::linalg::gram_top_eig;
use spikecov_core::randgen::{gen_spiked_sample, rep_rng};
use spikecov_core::spiked::{
    resign, spike_angle, standardize_eigenvalue, standardize_eigvec_diag, standardize_eigvec_offdiag,
    summarize,
};
use spikecov_core::stats::{correlation, ks_distance, mean, median, normal_cdf, summarize_sample};

use super::spiked_spec;
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::pool::run_indexed;
use crate::report::{Cell, ExperimentReport};

/// Leading coordinates whose pairwise correlations are reported.
const CORR_ELEMENTS: usize = 3;

struct Rep {
    lambda: Vec<f64>,
    eig_stat: Vec<f64>,
    angle: Vec<f64>,
    diag: Vec<f64>,
    /// Row-major over `j`, then `k != j`.
    offdiag: Vec<f64>,
    /// Row-major over `j`, then the first `CORR_ELEMENTS` coordinates.
    elems: Vec<f64>,
}

pub fn run_eigen(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let spec = spiked_spec(cfg)?;
    let oracle = summarize(&spec)?;
    let m = spec.m();
    let q = CORR_ELEMENTS.min(spec.p());

    let reps = run_indexed(cfg.reps, |rep| {
        let mut rng = rep_rng(cfg.seed, rep as u64);
        let x = gen_spiked_sample(&spec, &mut rng);
        let eig = gram_top_eig(&x, m)?;
        let mut out = Rep {
            lambda: Vec::with_capacity(m),
            eig_stat: Vec::with_capacity(m),
            angle: Vec::with_capacity(m),
            diag: Vec::with_capacity(m),
            offdiag: Vec::with_capacity(m * m),
            elems: Vec::with_capacity(m * q),
        };
        for j in 0..m {
            let mut xi = eig.vector(j).to_vec();
            resign(&mut xi, j);
            out.lambda.push(eig.values[j]);
            out.eig_stat.push(standardize_eigenvalue(eig.values[j], &spec, j)?);
            out.angle.push(spike_angle(&xi, j));
            out.diag.push(standardize_eigvec_diag(&xi, &spec, j)?);
            for k in (0..m).filter(|&k| k != j) {
                out.offdiag.push(standardize_eigvec_offdiag(&xi, &spec, j, k)?);
            }
            out.elems.extend_from_slice(&xi[..q]);
        }
        Ok(out)
    })?;

    let mut columns = vec!["rep".to_string()];
    for j in 1..=m {
        columns.push(format!("lambda_hat_{j}"));
        columns.push(format!("eig_stat_{j}"));
        columns.push(format!("angle_{j}"));
        columns.push(format!("diag_stat_{j}"));
        for k in (1..=m).filter(|&k| k != j) {
            columns.push(format!("offdiag_stat_{j}_{k}"));
        }
        for e in 1..=q {
            columns.push(format!("xi_{j}_{e}"));
        }
    }
    let mut report = ExperimentReport::new(ExperimentKind::Eigen, columns, cfg.echo());
    for (i, r) in reps.iter().enumerate() {
        let mut row: Vec<Cell> = vec![i.into()];
        let mut off = r.offdiag.iter();
        for j in 0..m {
            row.push(r.lambda[j].into());
            row.push(r.eig_stat[j].into());
            row.push(r.angle[j].into());
            row.push(r.diag[j].into());
            for _ in 1..m {
                row.push((*off.next().expect("m - 1 entries per spike")).into());
            }
            row.extend(r.elems[j * q..(j + 1) * q].iter().map(|v| Cell::Float(*v)));
        }
        report.push_row(row);
    }

    let many = reps.len() >= 2;
    for j in 0..m {
        let label = j + 1;
        let stats: Vec<f64> = reps.iter().map(|r| r.eig_stat[j]).collect();
        report.metric(format!("ks_eigenvalue_{label}"), ks_distance(&stats, normal_cdf)?)?;
        report.metric(format!("mean_eig_stat_{label}"), mean(&stats))?;
        if many {
            report.metric(format!("var_eig_stat_{label}"), summarize_sample(&stats)?.variance)?;
        }
        let angles: Vec<f64> = reps.iter().map(|r| r.angle[j]).collect();
        report.metric(format!("mean_angle_{label}"), mean(&angles))?;
        report.metric(format!("angle_limit_{label}"), oracle.angle_limit[j])?;
        let diag: Vec<f64> = reps.iter().map(|r| r.diag[j].abs()).collect();
        report.metric(format!("median_abs_diag_{label}"), median(&diag)?)?;
        for (slot, k) in (0..m).filter(|&k| k != j).enumerate() {
            let off: Vec<f64> = reps.iter().map(|r| r.offdiag[j * (m - 1) + slot]).collect();
            report.metric(format!("ks_offdiag_{label}_{}", k + 1), ks_distance(&off, normal_cdf)?)?;
        }
        if many {
            for a in 0..q {
                for b in (a + 1)..q {
                    let xa: Vec<f64> = reps.iter().map(|r| r.elems[j * q + a]).collect();
                    let xb: Vec<f64> = reps.iter().map(|r| r.elems[j * q + b]).collect();
                    report.metric(format!("corr_{label}_{}_{}", a + 1, b + 1), correlation(&xa, &xb)?)?;
                }
            }
        }
    }
    Ok(report)
}
