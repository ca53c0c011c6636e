//! Portfolio risk under an estimated covariance, and false discovery
//! proportion estimation for dependent test statistics.

use log::debug;
use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::estimators::CovEstimate;
use crate::linalg::{sym_eig, SymMatrix};
use crate::stats::{normal_cdf, normal_quantile};

/// Largest admissible `||b_hat_i||^2` in the plug-in estimator.
pub const LOADING_CAP: f64 = 1.0 - 1e-6;
const LOADING_REJECT: f64 = 1.0 - 1e-10;

/// `|w' Sigma_hat w / w' Sigma w - 1|`.
pub fn relative_risk(w: &[f64], sigma_hat: &SymMatrix, sigma: &SymMatrix) -> Result<f64> {
    if w.len() != sigma.dim() || sigma_hat.dim() != sigma.dim() {
        return Err(Error::InvalidInput("weights and covariances differ in dimension".into()));
    }
    let truth = sigma.quad_form(w);
    if !(truth > 1e-12) {
        return Err(Error::Degenerate(format!("true portfolio risk {truth:e} is not positive")));
    }
    Ok((sigma_hat.quad_form(w) / truth - 1.0).abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio {
    pub weights: Vec<f64>,
    /// Coordinates on the leading `m` eigenvectors of `Sigma`.
    pub eta_a: Vec<f64>,
    /// Coordinates on the remaining eigenvectors.
    pub eta_b: Vec<f64>,
}

/// Writes `w = Gamma eta_A + Omega eta_B` in the eigenbasis of `sigma`.
pub fn decompose_weights(w: &[f64], sigma: &SymMatrix, m: usize) -> Result<Portfolio> {
    let p = sigma.dim();
    if w.len() != p || m > p {
        return Err(Error::InvalidInput(format!(
            "need {p} weights and m <= {p} (got {} and {m})",
            w.len()
        )));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("weights must be finite".into()));
    }
    let e = sym_eig(sigma)?;
    let min = e.values[p - 1];
    if !(min > 1e-12 * e.values[0]) {
        return Err(Error::Conditioning { min_eigenvalue: min });
    }
    let eta = e.vectors.t().dot(&Array1::from(w.to_vec()));
    Ok(Portfolio {
        weights: w.to_vec(),
        eta_a: eta.slice(ndarray::s![..m]).to_vec(),
        eta_b: eta.slice(ndarray::s![m..]).to_vec(),
    })
}

/// Two-sided normal p-values `2 Phi(-|Z_j|)`.
pub fn pvalues(z: &[f64]) -> Vec<f64> {
    z.iter().map(|v| 2.0 * normal_cdf(-v.abs())).collect()
}

/// `(R, V)`: discoveries `#{P_j <= t}` and, among them, true nulls.
pub fn fdp_counts(pvals: &[f64], t: f64, null_mask: &[bool]) -> (usize, usize) {
    let mut r = 0;
    let mut v = 0;
    for (p, null) in pvals.iter().zip(null_mask.iter().chain(std::iter::repeat(&false))) {
        if *p <= t {
            r += 1;
            if *null {
                v += 1;
            }
        }
    }
    (r, v)
}

fn fdp_sum(b: ArrayView2<f64>, w: &[f64], r: usize, t: f64, cap: bool) -> Result<(f64, usize)> {
    if r == 0 {
        return Err(Error::UndefinedFdp);
    }
    if b.ncols() != w.len() {
        return Err(Error::InvalidInput(format!(
            "loadings have {} columns but W has {} entries",
            b.ncols(),
            w.len()
        )));
    }
    let z = normal_quantile(t / 2.0)?;
    let w = Array1::from(w.to_vec());
    let mut total = 0.0;
    let mut capped = 0;
    for (i, row) in b.rows().into_iter().enumerate() {
        let mut norm_sq = row.dot(&row);
        if cap {
            if norm_sq > LOADING_CAP {
                debug!("loading row {i} capped (squared norm {norm_sq})");
                norm_sq = LOADING_CAP;
                capped += 1;
            }
        } else if norm_sq >= LOADING_REJECT {
            return Err(Error::LoadingBound { row: i, norm_sq });
        }
        let a = 1.0 / (1.0 - norm_sq).sqrt();
        let eta = row.dot(&w);
        total += normal_cdf(a * (z + eta)) + normal_cdf(a * (z - eta));
    }
    Ok((total / r as f64, capped))
}

/// `sum_i [Phi(a_i (z + eta_i)) + Phi(a_i (z - eta_i))] / R` with
/// `a_i = (1 - ||b_i||^2)^{-1/2}`, `eta_i = b_i' W` and `z` the `t/2` quantile.
pub fn fdp_approx(b: ArrayView2<f64>, w: &[f64], r: usize, t: f64) -> Result<f64> {
    fdp_sum(b, w, r, t, false).map(|(v, _)| v)
}

/// `(B'B)^{-1} B' Z`.
pub fn least_squares_w(b: ArrayView2<f64>, z: &[f64]) -> Result<Vec<f64>> {
    let m = b.ncols();
    if b.nrows() != z.len() {
        return Err(Error::InvalidInput(format!(
            "loadings have {} rows but Z has {} entries",
            b.nrows(),
            z.len()
        )));
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    let gram = SymMatrix::from_upper(b.t().dot(&b))?;
    let e = sym_eig(&gram)?;
    let available = e
        .values
        .iter()
        .filter(|v| e.values[0] > 0.0 && **v > 1e-12 * e.values[0])
        .count();
    if available < m {
        return Err(Error::Rank {
            requested: m,
            available,
        });
    }
    let rhs = b.t().dot(&Array1::from(z.to_vec()));
    let proj = e.vectors.t().dot(&rhs);
    let scaled: Array1<f64> = proj.iter().zip(e.values.iter()).map(|(x, l)| x / l).collect();
    Ok(e.vectors.dot(&scaled).to_vec())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdpResult {
    pub t: f64,
    pub r: usize,
    /// False discoveries, when the null mask is known.
    pub v: Option<usize>,
    pub fdp_true: Option<f64>,
    /// Known-loadings approximation, when supplied by the caller.
    pub fdp_approx: Option<f64>,
    /// Plug-in estimate, clipped to `[0, 1]`.
    pub fdp_est: f64,
    pub w_hat: Vec<f64>,
    /// Rows whose squared loading norm hit [`LOADING_CAP`].
    pub capped_rows: usize,
}

/// Plug-in FDP estimate from an eigen-structure estimate of `Sigma`.
///
/// Loadings are `b_hat_i = (sqrt(lambda_j) xi_ij)_j`; `W` is fitted to `Z`
/// by least squares.
pub fn fdp_estimate(est: &CovEstimate, z: &[f64], t: f64, null_mask: Option<&[bool]>) -> Result<FdpResult> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidInput(format!("threshold t = {t} must lie in (0, 1)")));
    }
    if z.len() != est.dim() {
        return Err(Error::InvalidInput(format!(
            "Z has {} entries but the estimate has dimension {}",
            z.len(),
            est.dim()
        )));
    }
    let pvals = pvalues(z);
    let mask = null_mask.map(|m| m.to_vec()).unwrap_or_default();
    let (r, v) = fdp_counts(&pvals, t, &mask);
    if r == 0 {
        return Err(Error::UndefinedFdp);
    }
    let b = est.loadings();
    let w_hat = least_squares_w(b.view(), z)?;
    let (raw, capped_rows) = fdp_sum(b.view(), &w_hat, r, t, true)?;
    Ok(FdpResult {
        t,
        r,
        v: null_mask.map(|_| v),
        fdp_true: null_mask.map(|_| v as f64 / r as f64),
        fdp_approx: None,
        fdp_est: raw.clamp(0.0, 1.0),
        w_hat,
        capped_rows,
    })
}

/// `p x m` loadings `sqrt(lambda_j) gamma_j` from leading eigenpairs.
pub fn loadings_from_eigen(values: &[f64], vectors: &Array2<f64>) -> Array2<f64> {
    let mut b = vectors.clone();
    for (mut col, &l) in b.columns_mut().into_iter().zip(values.iter()) {
        col *= l.max(0.0).sqrt();
    }
    b
}
