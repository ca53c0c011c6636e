//! Sample covariance, least-squares factor recovery, adaptive thresholding,
//! POET and its eigenvalue-shrunk variant S-POET.
//!
//! Panels are `p x T` with one variable per row.

use log::debug;
use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::{extreme_eigenvalues, gram_top_eig, spectral_norm_sym, sym_eig, DataMatrix, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Shrinkage {
    #[default]
    Soft,
    Hard,
    Scad,
}

impl std::str::FromStr for Shrinkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "soft" => Ok(Shrinkage::Soft),
            "hard" => Ok(Shrinkage::Hard),
            "scad" => Ok(Shrinkage::Scad),
            other => Err(Error::InvalidInput(format!(
                "unknown shrinkage '{other}' (expected soft, hard or scad)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConfig {
    pub c: f64,
    pub shrinkage: Shrinkage,
    pub scad_a: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            c: 0.5,
            shrinkage: Shrinkage::Soft,
            scad_a: 3.7,
        }
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::InvalidInput(format!(
                "threshold constant C must be positive, got {}",
                self.c
            )));
        }
        if self.shrinkage == Shrinkage::Scad && !(self.scad_a > 2.0) {
            return Err(Error::InvalidInput(format!(
                "SCAD parameter a must exceed 2, got {}",
                self.scad_a
            )));
        }
        Ok(())
    }

    /// `s(x)` at threshold `tau`.
    pub fn shrink(&self, x: f64, tau: f64) -> f64 {
        let ax = x.abs();
        match self.shrinkage {
            Shrinkage::Hard => {
                if ax > tau {
                    x
                } else {
                    0.0
                }
            }
            Shrinkage::Soft => x.signum() * (ax - tau).max(0.0),
            Shrinkage::Scad => {
                let a = self.scad_a;
                if ax <= 2.0 * tau {
                    x.signum() * (ax - tau).max(0.0)
                } else if ax <= a * tau {
                    ((a - 1.0) * x - x.signum() * a * tau) / (a - 2.0)
                } else {
                    x
                }
            }
        }
    }
}

/// `sqrt(log p / T) + sqrt(1 / p)`.
pub fn omega_t(p: usize, t: usize) -> f64 {
    let (p, t) = (p as f64, t as f64);
    (p.ln() / t).sqrt() + (1.0 / p).sqrt()
}

/// `(1/T) Y Y'`, optionally after removing each row mean.
pub fn sample_cov(y: &DataMatrix, center: bool) -> Result<SymMatrix> {
    let t = y.n_cols();
    if center && t < 2 {
        return Err(Error::InvalidInput("centering needs T >= 2".into()));
    }
    let centered;
    let ya = if center {
        centered = y.center_rows();
        centered.as_array()
    } else {
        y.as_array()
    };
    SymMatrix::from_upper(ya.dot(&ya.t()) / t as f64)
}

/// Least-squares factors and loadings for `Y ~ B F'`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorFit {
    /// `p x m`, column `j` equals `sqrt(lambda_j) xi_j`.
    pub b_hat: Array2<f64>,
    /// `T x m`, normalized so `F'F / T = I`.
    pub f_hat: Array2<f64>,
    /// `p x T`.
    pub u_hat: Array2<f64>,
    /// Leading eigenvalues of `(1/T) Y Y'`.
    pub values: Vec<f64>,
    /// Matching unit eigenvectors (`p x m`).
    pub vectors: Array2<f64>,
}

pub fn factor_estimate(y: &DataMatrix, m: usize) -> Result<FactorFit> {
    let (p, t) = (y.n_rows(), y.n_cols());
    let ya = y.as_array();
    if m == 0 {
        return Ok(FactorFit {
            b_hat: Array2::zeros((p, 0)),
            f_hat: Array2::zeros((t, 0)),
            u_hat: ya.clone(),
            values: Vec::new(),
            vectors: Array2::zeros((p, 0)),
        });
    }
    let eig = match gram_top_eig(&y.transpose(), m) {
        Ok(e) => e,
        Err(Error::Degenerate(_)) => {
            return Err(Error::Rank {
                requested: m,
                available: numerical_rank(y)?,
            })
        }
        Err(e) => return Err(e),
    };
    let mut f_hat = ya.t().dot(&eig.vectors);
    for (mut col, &l) in f_hat.columns_mut().into_iter().zip(eig.values.iter()) {
        col /= l.sqrt();
    }
    let b_hat = ya.dot(&f_hat) / t as f64;
    let u_hat = ya - &b_hat.dot(&f_hat.t());
    Ok(FactorFit {
        b_hat,
        f_hat,
        u_hat,
        values: eig.values,
        vectors: eig.vectors,
    })
}

fn numerical_rank(y: &DataMatrix) -> Result<usize> {
    let ya = y.as_array();
    let small = if y.n_rows() <= y.n_cols() {
        ya.dot(&ya.t())
    } else {
        ya.t().dot(ya)
    };
    let e = sym_eig(&SymMatrix::from_upper(small)?)?;
    let top = e.values[0];
    Ok(e.values.iter().filter(|v| top > 0.0 && **v > 1e-12 * top).count())
}

/// Thresholds the off-diagonal entries of `s_u` at `C omega sqrt(s_ii s_jj)`.
pub fn adaptive_threshold(s_u: &SymMatrix, cfg: &ThresholdConfig, omega: f64) -> Result<SymMatrix> {
    cfg.validate()?;
    let d = s_u.diag();
    if let Some(i) = d.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "diagonal entry {i} of the residual covariance is not positive ({})",
            d[i]
        )));
    }
    let sd: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
    let p = s_u.dim();
    let mut out = s_u.as_array().clone();
    for i in 0..p {
        for j in (i + 1)..p {
            let tau = cfg.c * omega * sd[i] * sd[j];
            out[[i, j]] = cfg.shrink(out[[i, j]], tau);
        }
    }
    SymMatrix::from_upper(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Sample,
    Poet,
    Spoet,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Sample => "sample",
            Method::Poet => "poet",
            Method::Spoet => "spoet",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sample" => Ok(Method::Sample),
            "poet" => Ok(Method::Poet),
            "spoet" => Ok(Method::Spoet),
            other => Err(Error::InvalidInput(format!(
                "unknown method '{other}' (expected sample, poet or spoet)"
            ))),
        }
    }
}

/// Low-rank plus sparse covariance estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct CovEstimate {
    pub spike_values: Vec<f64>,
    /// `p x m`, orthonormal columns.
    pub spike_vectors: Array2<f64>,
    pub residual: SymMatrix,
    pub c_hat: Option<f64>,
    pub method: Method,
}

impl CovEstimate {
    pub fn dim(&self) -> usize {
        self.residual.dim()
    }

    pub fn m(&self) -> usize {
        self.spike_values.len()
    }

    /// `sum_j lambda_j xi_j xi_j'`.
    pub fn low_rank(&self) -> SymMatrix {
        let mut scaled = self.spike_vectors.clone();
        for (mut col, &l) in scaled.columns_mut().into_iter().zip(self.spike_values.iter()) {
            col *= l;
        }
        SymMatrix::from_upper(scaled.dot(&self.spike_vectors.t())).expect("square")
    }

    /// Low-rank part plus residual.
    pub fn assemble(&self) -> SymMatrix {
        let mut s = self.low_rank().into_array();
        s += self.residual.as_array();
        SymMatrix::new(s).expect("sum of symmetric matrices")
    }

    /// `p x m` loadings with rows `b_i = (sqrt(lambda_j) xi_ij)_j`.
    pub fn loadings(&self) -> Array2<f64> {
        let mut b = self.spike_vectors.clone();
        for (mut col, &l) in b.columns_mut().into_iter().zip(self.spike_values.iter()) {
            col *= l.max(0.0).sqrt();
        }
        b
    }
}

/// The sample covariance wrapped as an estimate with no spike part.
pub fn sample_estimate(y: &DataMatrix, center: bool) -> Result<CovEstimate> {
    let s = sample_cov(y, center)?;
    Ok(CovEstimate {
        spike_values: Vec::new(),
        spike_vectors: Array2::zeros((s.dim(), 0)),
        residual: s,
        c_hat: None,
        method: Method::Sample,
    })
}

pub fn poet(y: &DataMatrix, m: usize, cfg: &ThresholdConfig) -> Result<CovEstimate> {
    cfg.validate()?;
    let (p, t) = (y.n_rows(), y.n_cols());
    let fit = factor_estimate(y, m)?;
    let s_u = SymMatrix::from_upper(fit.u_hat.dot(&fit.u_hat.t()) / t as f64)?;
    let residual = adaptive_threshold(&s_u, cfg, omega_t(p, t))?;
    if log::log_enabled!(log::Level::Debug) {
        let (_, min) = extreme_eigenvalues(&residual)?;
        debug!("thresholded residual minimum eigenvalue {min:e}");
    }
    Ok(CovEstimate {
        spike_values: fit.values,
        spike_vectors: fit.vectors,
        residual,
        c_hat: None,
        method: Method::Poet,
    })
}

/// Soft-shrinks POET spike values by `c_hat p / T`, with `c_hat` preserving
/// the trace: `c_hat = (trace - sum lambda_j) / (p - m - p m / T)`.
///
/// `trace` is `tr((1/T) Y Y')` of the panel the estimate came from.
pub fn shrink_spikes(est: &CovEstimate, trace: f64, t: usize) -> Result<CovEstimate> {
    let (p, m) = (est.dim() as f64, est.m() as f64);
    let t = t as f64;
    let denominator = p - m - p * m / t;
    if !(denominator > 0.0) {
        return Err(Error::Regime { denominator });
    }
    let c_hat = (trace - est.spike_values.iter().sum::<f64>()) / denominator;
    let shift = c_hat * p / t;
    Ok(CovEstimate {
        spike_values: est.spike_values.iter().map(|l| (l - shift).max(0.0)).collect(),
        spike_vectors: est.spike_vectors.clone(),
        residual: est.residual.clone(),
        c_hat: Some(c_hat),
        method: Method::Spoet,
    })
}

pub fn spoet(y: &DataMatrix, m: usize, cfg: &ThresholdConfig) -> Result<CovEstimate> {
    let (p, t) = (y.n_rows() as f64, y.n_cols());
    let denominator = p - m as f64 - p * m as f64 / t as f64;
    if !(denominator > 0.0) {
        return Err(Error::Regime { denominator });
    }
    let base = poet(y, m, cfg)?;
    shrink_spikes(&base, panel_trace(y), t)
}

/// `tr((1/T) Y Y')`.
pub fn panel_trace(y: &DataMatrix) -> f64 {
    y.as_array().iter().map(|v| v * v).sum::<f64>() / y.n_cols() as f64
}

/// Population quantities of a factor model `Sigma = B B' + Sigma_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorTruth {
    pub loadings: Array2<f64>,
    pub sigma_u: SymMatrix,
}

impl FactorTruth {
    pub fn sigma(&self) -> SymMatrix {
        let mut s = self.loadings.dot(&self.loadings.t());
        s += self.sigma_u.as_array();
        SymMatrix::from_upper(s).expect("square")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorDecomposition {
    pub delta_l1: f64,
    pub delta_l2: f64,
    pub delta_s: f64,
    /// `||Sigma^{-1/2} (Sigma_hat - Sigma) Sigma^{-1/2}||`, without the `p^{-1/2}` factor.
    pub rel_spectral_total: f64,
}

/// Splits the relative error of `est` into spike-block, bulk-block and
/// residual parts using the eigen-blocks `(Gamma, Lambda)` and
/// `(Omega, Theta)` of the true `Sigma`.
pub fn error_decomposition(est: &CovEstimate, truth: &FactorTruth) -> Result<ErrorDecomposition> {
    let p = est.dim();
    let m = truth.loadings.ncols();
    if truth.loadings.nrows() != p || truth.sigma_u.dim() != p {
        return Err(Error::InvalidInput("estimate and truth differ in dimension".into()));
    }
    if m >= p {
        return Err(Error::InvalidInput(format!("factor count {m} must be below p = {p}")));
    }
    let sigma = truth.sigma();
    let eig = sym_eig(&sigma)?;
    let min = eig.values[p - 1];
    if !(min > 1e-12 * eig.values[0]) {
        return Err(Error::Conditioning { min_eigenvalue: min });
    }
    let inv_sqrt: Array1<f64> = eig.values.iter().map(|v| 1.0 / v.sqrt()).collect();

    let mut low = est.low_rank().into_array();
    low -= &truth.loadings.dot(&truth.loadings.t());
    let e_l = SymMatrix::from_upper(low)?;

    // Scaled blocks Gamma Lambda^{-1/2} and Omega Theta^{-1/2}.
    let mut scaled = eig.vectors.clone();
    for (mut col, s) in scaled.columns_mut().into_iter().zip(inv_sqrt.iter()) {
        col *= *s;
    }
    let g = scaled.slice(ndarray::s![.., ..m]).to_owned();
    let o = scaled.slice(ndarray::s![.., m..]).to_owned();
    let delta_l1 = spectral_norm_sym(&e_l.congruence(&g.t())?)?;
    let delta_l2 = spectral_norm_sym(&e_l.congruence(&o.t())?)?;
    let delta_s = spectral_norm_sym(&est.residual.sub(&truth.sigma_u)?)?;

    let sigma_inv_sqrt = scaled.dot(&eig.vectors.t());
    let total = est.assemble().sub(&sigma)?;
    let w = total.congruence(&sigma_inv_sqrt.view())?;
    let rel_spectral_total = spectral_norm_sym(&w)?;
    Ok(ErrorDecomposition {
        delta_l1,
        delta_l2,
        delta_s,
        rel_spectral_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randgen::{gen_factor_panel, make_loadings, seeded_rng, standard_normal, FactorModelSpec, IdioCov};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn gaussian(p: usize, t: usize, seed: u64) -> DataMatrix {
        let mut g = seeded_rng(seed);
        DataMatrix::new(Array2::from_shape_fn((p, t), |_| standard_normal(&mut g))).unwrap()
    }

    #[test]
    fn shrinkage_formulas() {
        let soft = ThresholdConfig::default();
        assert_abs_diff_eq!(soft.shrink(0.5, 0.2), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(soft.shrink(-0.5, 0.2), -0.3, epsilon = 1e-15);
        assert_eq!(soft.shrink(0.1, 0.2), 0.0);
        let hard = ThresholdConfig {
            shrinkage: Shrinkage::Hard,
            ..Default::default()
        };
        assert_eq!(hard.shrink(0.5, 0.2), 0.5);
        assert_eq!(hard.shrink(0.1, 0.2), 0.0);
        let scad = ThresholdConfig {
            shrinkage: Shrinkage::Scad,
            ..Default::default()
        };
        assert_abs_diff_eq!(scad.shrink(0.3, 0.2), 0.1, epsilon = 1e-15);
        assert_eq!(scad.shrink(1.0, 0.2), 1.0);
        // Continuous at 2 tau and a tau.
        assert_abs_diff_eq!(scad.shrink(0.4, 0.2), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(scad.shrink(0.74, 0.2), 0.74, epsilon = 1e-12);
    }

    #[test]
    fn sample_cov_cases() {
        let v = [1.0, -2.0, 0.5];
        let y = DataMatrix::new(Array2::from_shape_fn((3, 7), |(i, _)| v[i])).unwrap();
        let s = sample_cov(&y, false).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(s.get(i, j), v[i] * v[j], epsilon = 1e-14);
            }
        }
        let z = DataMatrix::new(Array2::zeros((2, 3))).unwrap();
        assert!(sample_cov(&z, false).unwrap().as_array().iter().all(|x| *x == 0.0));

        let y = gaussian(4, 100, 1);
        let s = sample_cov(&y, false).unwrap();
        let ya = y.as_array();
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = 0.0;
                for t in 0..100 {
                    acc += ya[[i, t]] * ya[[j, t]];
                }
                assert_abs_diff_eq!(s.get(i, j), acc / 100.0, epsilon = 1e-12);
            }
        }
        assert!(sample_cov(&DataMatrix::new(Array2::ones((2, 1))).unwrap(), true).is_err());
    }

    #[test]
    fn noiseless_one_factor() {
        let b = array![3.0, -1.0, 2.0, 0.5];
        let mut g = seeded_rng(2);
        let mut f: Vec<f64> = (0..20).map(|_| standard_normal(&mut g)).collect();
        let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        f.iter_mut().for_each(|v| *v *= 20f64.sqrt() / norm);
        let y = Array2::from_shape_fn((4, 20), |(i, t)| b[i] * f[t]);
        let fit = factor_estimate(&DataMatrix::new(y).unwrap(), 1).unwrap();
        let sign = fit.b_hat[[0, 0]].signum();
        for i in 0..4 {
            assert_abs_diff_eq!(sign * fit.b_hat[[i, 0]], b[i], epsilon = 1e-9);
        }
        assert!(fit.u_hat.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn factor_normal_equations() {
        let y = gaussian(2, 4, 3);
        let fit = factor_estimate(&y, 1).unwrap();
        let uf = fit.u_hat.dot(&fit.f_hat);
        assert!(uf.iter().all(|v| v.abs() < 1e-10));
        let ff = fit.f_hat.t().dot(&fit.f_hat) / 4.0;
        assert_abs_diff_eq!(ff[[0, 0]], 1.0, epsilon = 1e-10);

        let y = gaussian(30, 12, 4);
        let fit = factor_estimate(&y, 3).unwrap();
        let s = sample_cov(&y, false).unwrap();
        let e = sym_eig(&s).unwrap();
        for j in 0..3 {
            let col = fit.b_hat.column(j);
            assert_abs_diff_eq!(col.dot(&col), e.values[j], epsilon = 1e-9);
        }
    }

    #[test]
    fn factor_rank_error() {
        let mut a = Array2::zeros((5, 6));
        a[[0, 0]] = 1.0;
        let y = DataMatrix::new(a).unwrap();
        assert!(matches!(
            factor_estimate(&y, 2),
            Err(Error::Rank { requested: 2, available: 1 })
        ));
        assert!(matches!(factor_estimate(&y, 6), Err(Error::Rank { .. })));
    }

    #[test]
    fn threshold_keeps_diagonal() {
        let s = SymMatrix::new(array![[2.0, 0.5, 0.01], [0.5, 1.0, -0.3], [0.01, -0.3, 4.0]]).unwrap();
        let out = adaptive_threshold(&s, &ThresholdConfig::default(), 0.2).unwrap();
        assert_eq!(out.diag(), s.diag());
        assert_eq!(out.get(0, 2), 0.0);
        let bad = SymMatrix::from_diag(&[1.0, 0.0]);
        assert!(adaptive_threshold(&bad, &ThresholdConfig::default(), 0.1).is_err());
    }

    #[test]
    fn poet_one_factor_toy() {
        let mut g = seeded_rng(10);
        let b = make_loadings(20, &[30.0], &mut g);
        let spec = FactorModelSpec::new(200, b, IdioCov::Diagonal(vec![1.0; 20])).unwrap();
        let y = gen_factor_panel(&spec, &mut g).y_matrix();
        let est = poet(&y, 1, &ThresholdConfig::default()).unwrap();
        let truth = 31.0;
        assert!((est.spike_values[0] - truth).abs() <= 0.15 * truth, "{}", est.spike_values[0]);
    }

    #[test]
    fn poet_without_factors_thresholds_sample_cov() {
        let y = gaussian(8, 40, 11);
        let cfg = ThresholdConfig::default();
        let est = poet(&y, 0, &cfg).unwrap();
        let direct = adaptive_threshold(&sample_cov(&y, false).unwrap(), &cfg, omega_t(8, 40)).unwrap();
        assert_eq!(est.assemble(), direct);
    }

    #[test]
    fn poet_residual_routes_agree() {
        let y = gaussian(15, 30, 12);
        let fit = factor_estimate(&y, 2).unwrap();
        let s = sample_cov(&y, false).unwrap().into_array();
        let mut lr = Array2::<f64>::zeros((15, 15));
        for j in 0..2 {
            let v = fit.vectors.column(j);
            for a in 0..15 {
                for b in 0..15 {
                    lr[[a, b]] += fit.values[j] * v[a] * v[b];
                }
            }
        }
        let via_u = fit.u_hat.dot(&fit.u_hat.t()) / 30.0;
        for (x, y) in (&s - &lr).iter().zip(via_u.iter()) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn pure_noise_threshold_sparsity() {
        let y = gaussian(50, 100, 13);
        let est = poet(&y, 0, &ThresholdConfig::default()).unwrap();
        let r = est.residual.as_array();
        let mut survivors = 0;
        for i in 0..50 {
            for j in (i + 1)..50 {
                if r[[i, j]] != 0.0 {
                    survivors += 1;
                }
            }
        }
        // Off-diagonal sample covariances are close to N(0, 1/T), so the
        // surviving fraction is near 2 (1 - Phi(tau sqrt(T))).
        let tau = 0.5 * omega_t(50, 100);
        let expected = 2.0 * (1.0 - crate::stats::normal_cdf(tau * 10.0));
        let frac = survivors as f64 / 1225.0;
        assert!((frac - expected).abs() < 0.03, "{frac} vs {expected}");
    }

    #[test]
    fn spoet_shrink_formula_and_regime() {
        let base = CovEstimate {
            spike_values: vec![12.0],
            spike_vectors: Array2::from_shape_fn((20, 1), |(i, _)| if i == 0 { 1.0 } else { 0.0 }),
            residual: SymMatrix::identity(20),
            c_hat: None,
            method: Method::Poet,
        };
        // p = 20, T = 2, m = 1: denominator 20 - 1 - 10 = 9; c_hat = 1 needs trace 21.
        let s = shrink_spikes(&base, 21.0, 2).unwrap();
        assert_abs_diff_eq!(s.c_hat.unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.spike_values[0], 2.0, epsilon = 1e-12);
        let mut small = base.clone();
        small.spike_values = vec![5.0];
        let s = shrink_spikes(&small, 14.0, 2).unwrap();
        assert_eq!(s.spike_values[0], 0.0);
        assert!(matches!(shrink_spikes(&base, 21.0, 1), Err(Error::Regime { .. })));
        assert!(matches!(
            spoet(&gaussian(4, 2, 1), 2, &ThresholdConfig::default()),
            Err(Error::Regime { .. })
        ));
    }

    #[test]
    fn spoet_trace_identity() {
        let mut g = seeded_rng(14);
        let b = make_loadings(40, &[200.0, 80.0], &mut g);
        let spec = FactorModelSpec::new(60, b, IdioCov::Diagonal(vec![1.0; 40])).unwrap();
        let y = gen_factor_panel(&spec, &mut g).y_matrix();
        let s = spoet(&y, 2, &ThresholdConfig::default()).unwrap();
        let c = s.c_hat.unwrap();
        let shifted: f64 = s.spike_values.iter().sum();
        assert!(s.spike_values.iter().all(|v| *v > 0.0));
        let total = shifted + 38.0 * c;
        assert!((total - panel_trace(&y)).abs() <= 1e-9 * panel_trace(&y).max(1.0));
    }

    #[test]
    fn perfect_estimate_has_zero_deltas() {
        let b = array![[2.0], [1.0], [0.0], [1.0]];
        let sigma_u = SymMatrix::from_diag(&[1.0, 0.5, 2.0, 1.0]);
        let norm2 = 6.0f64;
        let est = CovEstimate {
            spike_values: vec![norm2],
            spike_vectors: &b / norm2.sqrt(),
            residual: sigma_u.clone(),
            c_hat: None,
            method: Method::Spoet,
        };
        let truth = FactorTruth {
            loadings: b,
            sigma_u: sigma_u.clone(),
        };
        let d = error_decomposition(&est, &truth).unwrap();
        assert!(d.delta_l1 <= 1e-9 && d.delta_l2 <= 1e-9 && d.delta_s <= 1e-9);
        assert!(d.rel_spectral_total <= 1e-9);

        let mut perturbed = est.clone();
        let mut r = sigma_u.into_array();
        for i in 0..4 {
            r[[i, i]] += 0.25;
        }
        perturbed.residual = SymMatrix::new(r).unwrap();
        let d2 = error_decomposition(&perturbed, &truth).unwrap();
        assert_abs_diff_eq!(d2.delta_s, 0.25, epsilon = 1e-12);
        assert_eq!(d2.delta_l1, d.delta_l1);
        assert_eq!(d2.delta_l2, d.delta_l2);
    }
}
