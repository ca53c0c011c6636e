//! Seeded generators and the simulation recipes for spiked and factor models.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, DataMatrix, FactorCovariance, SymMatrix};

/// Generator handle. ChaCha output is specified bit for bit, so streams are
/// identical across platforms.
pub type Gen = ChaCha12Rng;

pub fn seeded_rng(seed: u64) -> Gen {
    rep_rng(seed, 0)
}

/// Independent stream for replication `rep` of a run seeded with `seed`.
pub fn rep_rng(seed: u64, rep: u64) -> Gen {
    let mut g = Gen::seed_from_u64(seed);
    g.set_stream(rep);
    g
}

/// Zero-mean, unit-variance entry law for the latent `Z` of a spiked sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntryDist {
    #[default]
    Gaussian,
    /// `+-1` with equal probability.
    Rademacher,
    /// Uniform on `[-sqrt(3), sqrt(3)]`.
    Uniform,
}

impl EntryDist {
    pub fn kurtosis(self) -> f64 {
        match self {
            EntryDist::Gaussian => 3.0,
            EntryDist::Rademacher => 1.0,
            EntryDist::Uniform => 1.8,
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            EntryDist::Gaussian => StandardNormal.sample(rng),
            EntryDist::Rademacher => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            EntryDist::Uniform => (rng.gen::<f64>() * 2.0 - 1.0) * 3f64.sqrt(),
        }
    }
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Gamma(shape, rate) draw by the Marsaglia-Tsang squeeze method.
///
/// Shapes below one use the boost `G(a) = G(a + 1) U^{1/a}`.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0 && rate > 0.0);
    if shape < 1.0 {
        let u: f64 = rng.gen();
        return sample_gamma(shape + 1.0, rate, rng) * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let (x, v) = loop {
            let x: f64 = StandardNormal.sample(rng);
            let v = 1.0 + c * x;
            if v > 0.0 {
                break (x, v * v * v);
            }
        };
        let u: f64 = rng.gen();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v / rate;
        }
    }
}

/// Population model `Sigma = Gamma diag(spikes, nonspikes) Gamma'`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikedModelSpec {
    p: usize,
    n: usize,
    spike_values: Vec<f64>,
    nonspike_values: Vec<f64>,
    rotation: Option<Array2<f64>>,
    kurtosis: Vec<f64>,
    entries: EntryDist,
}

impl SpikedModelSpec {
    /// `nonspike` holds either `p - m` values or a single value broadcast to all.
    pub fn new(p: usize, n: usize, spikes: Vec<f64>, nonspike: &[f64]) -> Result<Self> {
        let m = spikes.len();
        if p == 0 || n == 0 {
            return Err(Error::InvalidInput(format!(
                "p and n must be positive (p = {p}, n = {n})"
            )));
        }
        if m >= p {
            return Err(Error::InvalidInput(format!(
                "spike count {m} must be below p = {p}"
            )));
        }
        let nonspike_values = match nonspike.len() {
            1 => vec![nonspike[0]; p - m],
            len if len == p - m => nonspike.to_vec(),
            len => {
                return Err(Error::InvalidInput(format!(
                    "expected 1 or {} non-spike values, got {len}",
                    p - m
                )))
            }
        };
        if let Some(v) = spikes
            .iter()
            .chain(nonspike_values.iter())
            .find(|v| !(**v > 0.0) || !v.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "eigenvalues must be positive and finite, got {v}"
            )));
        }
        for (i, w) in spikes.windows(2).enumerate() {
            if w[1] >= w[0] {
                return Err(Error::Separation {
                    first: i,
                    second: i + 1,
                });
            }
        }
        let bulk_max = nonspike_values.iter().fold(0.0f64, |a, &v| a.max(v));
        if let Some(&last) = spikes.last() {
            if last <= bulk_max {
                return Err(Error::Separation {
                    first: m - 1,
                    second: m,
                });
            }
        }
        Ok(Self {
            p,
            n,
            kurtosis: vec![3.0; m],
            spike_values: spikes,
            nonspike_values,
            rotation: None,
            entries: EntryDist::Gaussian,
        })
    }

    pub fn with_rotation(mut self, rotation: Array2<f64>) -> Result<Self> {
        if rotation.dim() != (self.p, self.p) {
            return Err(Error::InvalidInput(format!(
                "rotation must be {p} x {p}",
                p = self.p
            )));
        }
        let gram = rotation.t().dot(&rotation);
        let defect = gram
            .indexed_iter()
            .map(|((i, j), v)| (v - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0f64, f64::max);
        if !(defect <= 1e-10) {
            return Err(Error::InvalidInput(format!(
                "rotation is not orthogonal (max |R'R - I| = {defect:e})"
            )));
        }
        self.rotation = Some(rotation);
        Ok(self)
    }

    pub fn with_kurtosis(mut self, kurtosis: Vec<f64>) -> Result<Self> {
        if kurtosis.len() != self.m() {
            return Err(Error::InvalidInput(format!(
                "expected {} kurtosis values, got {}",
                self.m(),
                kurtosis.len()
            )));
        }
        self.kurtosis = kurtosis;
        Ok(self)
    }

    /// Switches the latent entry law; kurtosis follows the new law.
    pub fn with_entries(mut self, entries: EntryDist) -> Self {
        self.entries = entries;
        self.kurtosis = vec![entries.kurtosis(); self.m()];
        self
    }

    pub fn p(&self) -> usize {
        self.p
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.spike_values.len()
    }
    pub fn spike_values(&self) -> &[f64] {
        &self.spike_values
    }
    pub fn nonspike_values(&self) -> &[f64] {
        &self.nonspike_values
    }
    pub fn rotation(&self) -> Option<&Array2<f64>> {
        self.rotation.as_ref()
    }
    pub fn kurtosis(&self) -> &[f64] {
        &self.kurtosis
    }
    pub fn entries(&self) -> EntryDist {
        self.entries
    }

    /// All `p` population eigenvalues, spikes first.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spike_values
            .iter()
            .chain(self.nonspike_values.iter())
            .copied()
            .collect()
    }

    /// Mean of the non-spike eigenvalues.
    pub fn c_bar(&self) -> f64 {
        self.nonspike_values.iter().sum::<f64>() / self.nonspike_values.len() as f64
    }

    pub fn with_n(mut self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        self.n = n;
        Ok(self)
    }
}

/// `n x p` sample whose rows are `Gamma Lambda^{1/2} Z_i`.
///
/// Latent entries are drawn row by row, so a rotated spec consumes the same
/// stream as its unrotated counterpart.
pub fn gen_spiked_sample<R: Rng + ?Sized>(spec: &SpikedModelSpec, rng: &mut R) -> DataMatrix {
    let (n, p) = (spec.n, spec.p);
    let scale: Vec<f64> = spec.eigenvalues().iter().map(|v| v.sqrt()).collect();
    let mut x = Array2::zeros((n, p));
    for mut row in x.rows_mut() {
        for (v, s) in row.iter_mut().zip(scale.iter()) {
            *v = spec.entries.sample(rng) * s;
        }
    }
    if let Some(r) = &spec.rotation {
        x = x.dot(&r.t());
    }
    DataMatrix::new(x).expect("finite by construction")
}

#[derive(Debug, Clone, PartialEq)]
pub enum IdioCov {
    /// Standard deviations of a diagonal `Sigma_u`.
    Diagonal(Vec<f64>),
    Full(SymMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorModelSpec {
    t: usize,
    loadings: Array2<f64>,
    idio: IdioCov,
    idio_factor: Option<Array2<f64>>,
}

impl FactorModelSpec {
    pub fn new(t: usize, loadings: Array2<f64>, idio: IdioCov) -> Result<Self> {
        let p = loadings.nrows();
        if t == 0 || p == 0 {
            return Err(Error::InvalidInput(format!(
                "p and T must be positive (p = {p}, T = {t})"
            )));
        }
        if loadings.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("loadings have non-finite entries".into()));
        }
        let idio_factor = match &idio {
            IdioCov::Diagonal(sd) => {
                if sd.len() != p {
                    return Err(Error::InvalidInput(format!(
                        "expected {p} idiosyncratic standard deviations, got {}",
                        sd.len()
                    )));
                }
                if let Some(i) = sd.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "idiosyncratic standard deviation {i} is invalid ({})",
                        sd[i]
                    )));
                }
                None
            }
            IdioCov::Full(s) => {
                if s.dim() != p {
                    return Err(Error::InvalidInput(format!(
                        "idiosyncratic covariance must be {p} x {p}"
                    )));
                }
                Some(psd_factor(s)?)
            }
        };
        Ok(Self {
            t,
            loadings,
            idio,
            idio_factor,
        })
    }

    pub fn p(&self) -> usize {
        self.loadings.nrows()
    }
    pub fn t(&self) -> usize {
        self.t
    }
    pub fn m(&self) -> usize {
        self.loadings.ncols()
    }
    pub fn loadings(&self) -> &Array2<f64> {
        &self.loadings
    }
    pub fn idio(&self) -> &IdioCov {
        &self.idio
    }

    pub fn idio_cov(&self) -> SymMatrix {
        match &self.idio {
            IdioCov::Diagonal(sd) => {
                SymMatrix::from_diag(&sd.iter().map(|s| s * s).collect::<Vec<_>>())
            }
            IdioCov::Full(s) => s.clone(),
        }
    }

    /// `B B' + Sigma_u`.
    pub fn covariance(&self) -> SymMatrix {
        let mut s = self.loadings.dot(&self.loadings.t());
        s += self.idio_cov().as_array();
        SymMatrix::from_upper(s).expect("square")
    }

    /// Structured form, available when `Sigma_u` is diagonal and positive.
    pub fn factor_covariance(&self) -> Result<FactorCovariance> {
        match &self.idio {
            IdioCov::Diagonal(sd) => {
                FactorCovariance::new(self.loadings.clone(), sd.iter().map(|s| s * s).collect())
            }
            IdioCov::Full(_) => Err(Error::InvalidInput(
                "idiosyncratic covariance is not diagonal".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorPanel {
    /// `p x T`.
    pub y: Array2<f64>,
    /// `T x m`.
    pub f: Array2<f64>,
    /// `p x T`.
    pub u: Array2<f64>,
}

impl FactorPanel {
    pub fn y_matrix(&self) -> DataMatrix {
        DataMatrix::new(self.y.clone()).expect("finite by construction")
    }
}

/// `Y = B F' + U` with standard normal factors and `N(0, Sigma_u)` columns of `U`.
pub fn gen_factor_panel<R: Rng + ?Sized>(spec: &FactorModelSpec, rng: &mut R) -> FactorPanel {
    let (p, t, m) = (spec.p(), spec.t, spec.m());
    let f = Array2::from_shape_fn((t, m), |_| standard_normal(rng));
    let mut u = Array2::zeros((p, t));
    for mut col in u.columns_mut() {
        for v in col.iter_mut() {
            *v = standard_normal(rng);
        }
    }
    match (&spec.idio, &spec.idio_factor) {
        (IdioCov::Diagonal(sd), _) => {
            for (mut row, s) in u.rows_mut().into_iter().zip(sd.iter()) {
                row *= *s;
            }
        }
        (IdioCov::Full(_), Some(l)) => u = l.dot(&u),
        (IdioCov::Full(_), None) => unreachable!("factor prepared at construction"),
    }
    let y = spec.loadings.dot(&f.t()) + &u;
    FactorPanel { y, f, u }
}

/// `p x m` loadings with i.i.d. standard normal rows, column `j` rescaled to
/// squared norm `spikes[j]`.
pub fn make_loadings<R: Rng + ?Sized>(p: usize, spikes: &[f64], rng: &mut R) -> Array2<f64> {
    let mut b = Array2::from_shape_fn((p, spikes.len()), |_| standard_normal(rng));
    for (mut col, &lambda) in b.columns_mut().into_iter().zip(spikes.iter()) {
        let norm = col.dot(&col).sqrt();
        col *= lambda.sqrt() / norm;
    }
    b
}

/// `p` i.i.d. Gamma(shape, rate) draws.
pub fn gen_idio_sd<R: Rng + ?Sized>(p: usize, shape: f64, rate: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(shape > 0.0 && rate > 0.0) || !shape.is_finite() || !rate.is_finite() {
        return Err(Error::InvalidInput(format!(
            "gamma shape and rate must be positive (shape = {shape}, rate = {rate})"
        )));
    }
    Ok((0..p).map(|_| sample_gamma(shape, rate, rng)).collect())
}

/// `L` with `L L' = s`, from an eigendecomposition. Tiny negative
/// eigenvalues from rounding are treated as zero.
fn psd_factor(s: &SymMatrix) -> Result<Array2<f64>> {
    let e = sym_eig(s)?;
    let top = e.values[0].abs().max(f64::MIN_POSITIVE);
    let min = *e.values.last().expect("non-empty");
    if min < -1e-10 * top {
        return Err(Error::Conditioning { min_eigenvalue: min });
    }
    let mut l = e.vectors;
    for (mut col, &v) in l.columns_mut().into_iter().zip(e.values.iter()) {
        col *= v.max(0.0).sqrt();
    }
    Ok(l)
}

/// Covariance of the test statistics, either dense or `B B' + D`.
#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceModel {
    Dense(SymMatrix),
    Factor(FactorCovariance),
}

impl CovarianceModel {
    pub fn dim(&self) -> usize {
        match self {
            CovarianceModel::Dense(s) => s.dim(),
            CovarianceModel::Factor(f) => f.dim(),
        }
    }

    pub fn dense(&self) -> SymMatrix {
        match self {
            CovarianceModel::Dense(s) => s.clone(),
            CovarianceModel::Factor(f) => f.dense(),
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        match self {
            CovarianceModel::Dense(s) => s.diag(),
            CovarianceModel::Factor(f) => f
                .loadings()
                .rows()
                .into_iter()
                .zip(f.idio_var().iter())
                .map(|(r, d)| r.dot(&r) + d)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdpModelSpec {
    n: usize,
    m: usize,
    sigma: CovarianceModel,
    mu_star: Vec<f64>,
    t: f64,
    dense_factor: Option<Array2<f64>>,
}

impl FdpModelSpec {
    pub fn new(n: usize, m: usize, sigma: CovarianceModel, mu_star: Vec<f64>, t: f64) -> Result<Self> {
        let p = sigma.dim();
        if n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        if m >= p {
            return Err(Error::InvalidInput(format!("spike count {m} must be below p = {p}")));
        }
        if mu_star.len() != p {
            return Err(Error::InvalidInput(format!(
                "expected {p} signal values, got {}",
                mu_star.len()
            )));
        }
        if mu_star.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("signal values must be finite".into()));
        }
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidInput(format!("threshold t = {t} must lie in (0, 1)")));
        }
        if let Some((i, d)) = sigma
            .diag()
            .into_iter()
            .enumerate()
            .find(|(_, d)| (d - 1.0).abs() > 1e-10)
        {
            return Err(Error::InvalidInput(format!(
                "Sigma must be a correlation matrix; diagonal entry {i} is {d}"
            )));
        }
        let dense_factor = match &sigma {
            CovarianceModel::Dense(s) => Some(psd_factor(s)?),
            CovarianceModel::Factor(_) => None,
        };
        Ok(Self {
            n,
            m,
            sigma,
            mu_star,
            t,
            dense_factor,
        })
    }

    pub fn p(&self) -> usize {
        self.sigma.dim()
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn sigma(&self) -> &CovarianceModel {
        &self.sigma
    }
    pub fn mu_star(&self) -> &[f64] {
        &self.mu_star
    }
    pub fn t(&self) -> f64 {
        self.t
    }

    /// `true` where the coordinate has no signal.
    pub fn null_mask(&self) -> Vec<bool> {
        self.mu_star.iter().map(|v| *v == 0.0).collect()
    }
}

/// `count` leading coordinates carry mean `mu`, i.e. `mu* = sqrt(n) mu` there.
pub fn sparse_mu_star(p: usize, n: usize, count: usize, mu: f64) -> Vec<f64> {
    let s = (n as f64).sqrt() * mu;
    (0..p).map(|i| if i < count { s } else { 0.0 }).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdpSample {
    pub z: Vec<f64>,
    pub x_bar: Vec<f64>,
    /// `n x p`, one observation per row.
    pub raw: DataMatrix,
}

/// Draws `X_i ~ N(mu, Sigma)` for `i = 1..n` and forms `Z = sqrt(n) X_bar`.
pub fn gen_fdp_stats<R: Rng + ?Sized>(spec: &FdpModelSpec, rng: &mut R) -> FdpSample {
    let (n, p) = (spec.n, spec.p());
    let mean: Vec<f64> = spec.mu_star.iter().map(|v| v / (n as f64).sqrt()).collect();
    let mut x = Array2::zeros((n, p));
    match (&spec.sigma, &spec.dense_factor) {
        (CovarianceModel::Dense(_), Some(l)) => {
            let eps = Array2::from_shape_fn((n, p), |_| standard_normal(rng));
            x.assign(&eps.dot(&l.t()));
        }
        (CovarianceModel::Factor(fc), _) => {
            let k = fc.loadings().ncols();
            let sd = fc.idio_var().mapv(f64::sqrt);
            for mut row in x.rows_mut() {
                let f = Array1::from_shape_fn(k, |_| standard_normal(rng));
                let common = fc.loadings().dot(&f);
                for (j, v) in row.iter_mut().enumerate() {
                    *v = common[j] + sd[j] * standard_normal(rng);
                }
            }
        }
        (CovarianceModel::Dense(_), None) => unreachable!("factor prepared at construction"),
    }
    for mut row in x.rows_mut() {
        for (v, mu) in row.iter_mut().zip(mean.iter()) {
            *v += mu;
        }
    }
    let x_bar: Vec<f64> = x.mean_axis(ndarray::Axis(0)).expect("n >= 1").to_vec();
    let z = x_bar.iter().map(|v| v * (n as f64).sqrt()).collect();
    FdpSample {
        z,
        x_bar,
        raw: DataMatrix::new(x).expect("finite by construction"),
    }
}
