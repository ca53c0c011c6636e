//! Closed-form large-sample predictions for the spiked model and the
//! standardizations that compare empirical eigen-structure against them.
//!
//! Index arguments are zero-based: spike `j` is `spec.spike_values()[j]`.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::randgen::SpikedModelSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticSummary {
    /// `c_j = p / (n lambda_j)`.
    pub c: Vec<f64>,
    /// Mean of the non-spike eigenvalues.
    pub c_bar: f64,
    /// `1 + c_bar c_j`.
    pub eig_bias: Vec<f64>,
    /// `(1 + c_bar c_j)^{-1/2}`.
    pub angle_limit: Vec<f64>,
    /// `a_jk = sqrt(lambda_j lambda_k) / (lambda_j - lambda_k)`, zero diagonal.
    pub a: Array2<f64>,
}

pub fn summarize(spec: &SpikedModelSpec) -> Result<AsymptoticSummary> {
    let spikes = spec.spike_values();
    for (i, w) in spikes.windows(2).enumerate() {
        if !((w[0] - w[1]) / w[0] > 0.0) {
            return Err(Error::Separation {
                first: i,
                second: i + 1,
            });
        }
    }
    let (p, n) = (spec.p() as f64, spec.n() as f64);
    let c_bar = spec.c_bar();
    let c: Vec<f64> = spikes.iter().map(|l| p / (n * l)).collect();
    let eig_bias: Vec<f64> = c.iter().map(|cj| 1.0 + c_bar * cj).collect();
    let angle_limit = eig_bias.iter().map(|b| 1.0 / b.sqrt()).collect();
    let m = spikes.len();
    let a = Array2::from_shape_fn((m, m), |(j, k)| {
        if j == k {
            0.0
        } else {
            (spikes[j] * spikes[k]).sqrt() / (spikes[j] - spikes[k])
        }
    });
    Ok(AsymptoticSummary {
        c,
        c_bar,
        eig_bias,
        angle_limit,
        a,
    })
}

fn check_spike(spec: &SpikedModelSpec, j: usize) -> Result<()> {
    if j >= spec.m() {
        return Err(Error::InvalidInput(format!(
            "spike index {j} out of range (m = {})",
            spec.m()
        )));
    }
    Ok(())
}

fn check_len(xi_hat: &[f64], spec: &SpikedModelSpec) -> Result<()> {
    if xi_hat.len() != spec.p() {
        return Err(Error::InvalidInput(format!(
            "eigenvector has length {} instead of p = {}",
            xi_hat.len(),
            spec.p()
        )));
    }
    Ok(())
}

/// `sqrt(n / (kappa_j - 1)) (lambda_hat / lambda_j - 1 - c_bar c_j)`.
pub fn standardize_eigenvalue(lambda_hat: f64, spec: &SpikedModelSpec, j: usize) -> Result<f64> {
    check_spike(spec, j)?;
    let kappa = spec.kurtosis()[j];
    if !(kappa > 1.0) {
        return Err(Error::Kurtosis(kappa));
    }
    let lambda = spec.spike_values()[j];
    let c = spec.p() as f64 / (spec.n() as f64 * lambda);
    let n = spec.n() as f64;
    Ok((n / (kappa - 1.0)).sqrt() * (lambda_hat / lambda - 1.0 - spec.c_bar() * c))
}

/// Flips `xi_hat` so its `j`-th coordinate is non-negative.
pub fn resign(xi_hat: &mut [f64], j: usize) {
    if xi_hat[j] < 0.0 {
        xi_hat.iter_mut().for_each(|v| *v = -*v);
    }
}

fn spike_block_norm(xi_hat: &[f64], m: usize) -> Result<f64> {
    let norm = xi_hat[..m].iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm >= 1e-12) {
        return Err(Error::Degenerate(format!(
            "spike block of the eigenvector has norm {norm:e}"
        )));
    }
    Ok(norm)
}

/// `sqrt(n) xi_hat_k / ||xi_hat_A|| / sqrt(c_j c_k / (c_j - c_k)^2)` for the
/// `j`-th empirical eigenvector `xi_hat`, with `A` the first `m` coordinates.
pub fn standardize_eigvec_offdiag(xi_hat: &[f64], spec: &SpikedModelSpec, j: usize, k: usize) -> Result<f64> {
    check_spike(spec, j)?;
    check_spike(spec, k)?;
    check_len(xi_hat, spec)?;
    let (p, n) = (spec.p() as f64, spec.n() as f64);
    let cj = p / (n * spec.spike_values()[j]);
    let ck = p / (n * spec.spike_values()[k]);
    if j == k || cj == ck {
        return Err(Error::InvalidInput(format!(
            "off-diagonal statistic needs distinct spikes (j = {j}, k = {k})"
        )));
    }
    let norm = spike_block_norm(xi_hat, spec.m())?;
    let mut sign = 1.0;
    if xi_hat[j] < 0.0 {
        sign = -1.0;
    }
    let scale = (cj * ck / (cj - ck).powi(2)).sqrt();
    Ok(n.sqrt() * sign * xi_hat[k] / norm / scale)
}

/// `sqrt(n) (xi_hat_j / ||xi_hat_A|| - 1)` under the positive sign convention.
pub fn standardize_eigvec_diag(xi_hat: &[f64], spec: &SpikedModelSpec, j: usize) -> Result<f64> {
    check_spike(spec, j)?;
    check_len(xi_hat, spec)?;
    let norm = spike_block_norm(xi_hat, spec.m())?;
    Ok((spec.n() as f64).sqrt() * (xi_hat[j].abs() / norm - 1.0))
}

/// `<xi_hat, e_j>` after re-signing, so in `[0, 1]` for unit input.
pub fn spike_angle(xi_hat: &[f64], j: usize) -> f64 {
    xi_hat[j].abs()
}

/// `D0 xi_B / ||D0 xi_B||` with `xi_B = xi_hat[m..]` and
/// `D0 = diag(sqrt(c_bar / lambda_i))` over the non-spikes.
pub fn rescaled_nonspike_direction(xi_hat: &[f64], spec: &SpikedModelSpec) -> Result<Vec<f64>> {
    check_len(xi_hat, spec)?;
    let m = spec.m();
    let tail = &xi_hat[m..];
    let norm = tail.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 1e-12) {
        return Err(Error::Degenerate(format!(
            "non-spike block of the eigenvector has norm {norm:e}"
        )));
    }
    let c_bar = spec.c_bar();
    let mut out: Vec<f64> = tail
        .iter()
        .zip(spec.nonspike_values())
        .map(|(v, l)| v / norm * (c_bar / l).sqrt())
        .collect();
    let scaled = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    out.iter_mut().for_each(|v| *v /= scaled);
    Ok(out)
}
