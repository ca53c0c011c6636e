use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::lanczos::{lanczos, LanczosTarget};
use super::{sym_eig, SymMatrix};
use crate::error::{Error, Result};

/// Above this dimension extreme eigenvalues come from Lanczos instead of a
/// full Jacobi decomposition.
pub const DENSE_EIG_LIMIT: usize = 200;
const LANCZOS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixNorms {
    pub spectral: f64,
    pub frobenius: f64,
    pub max_abs: f64,
    pub induced_inf: f64,
}

/// Spectral, Frobenius, entry-wise max and induced l-infinity norms.
///
/// Symmetric input gets its spectral norm as `max |eigenvalue|`; any other
/// shape uses the largest singular value.
pub fn matrix_norms(m: ArrayView2<f64>) -> Result<MatrixNorms> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    if m.is_empty() {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    let frobenius = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let max_abs = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let induced_inf = m
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);

    let square_sym = m.nrows() == m.ncols() && is_symmetric(&m);
    let spectral = if square_sym {
        spectral_norm_sym(&SymMatrix::new(m.to_owned())?)?
    } else {
        let gram = if m.nrows() <= m.ncols() {
            m.dot(&m.t())
        } else {
            m.t().dot(&m)
        };
        let (top, _) = extreme_eigenvalues(&SymMatrix::from_upper(gram)?)?;
        top.max(0.0).sqrt()
    };
    Ok(MatrixNorms {
        spectral,
        frobenius,
        max_abs,
        induced_inf,
    })
}

fn is_symmetric(m: &ArrayView2<f64>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| ((i + 1)..n).all(|j| m[[i, j]] == m[[j, i]]))
}

/// `(largest, smallest)` eigenvalue of a symmetric matrix.
pub fn extreme_eigenvalues(m: &SymMatrix) -> Result<(f64, f64)> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let n = m.dim();
    if n <= DENSE_EIG_LIMIT {
        let e = sym_eig(m)?;
        return Ok((e.values[0], e.values[n - 1]));
    }
    let a = m.as_array();
    let out = lanczos(
        n,
        |x, y| dense_matvec(a, x, y),
        LanczosTarget {
            top: 1,
            bottom: true,
            vectors: false,
        },
        LANCZOS_TOL,
    )?;
    Ok((out.top_values[0], out.bottom_value.expect("bottom requested")))
}

/// `max |eigenvalue|` of a symmetric matrix.
pub fn spectral_norm_sym(m: &SymMatrix) -> Result<f64> {
    let (hi, lo) = extreme_eigenvalues(m)?;
    Ok(hi.abs().max(lo.abs()))
}

pub(crate) fn dense_matvec(a: &Array2<f64>, x: &[f64], y: &mut [f64]) {
    let r = a.dot(&ArrayView1::from(x));
    y.iter_mut().zip(r.iter()).for_each(|(yi, ri)| *yi = *ri);
}

/// Error of an estimate measured in the metric of the truth `Sigma`.
///
/// With `W = Sigma^{-1/2} (A_hat - Sigma) Sigma^{-1/2}`:
/// `rel_operator = ||W||`, `rel_spectral = p^{-1/2} ||W||` and
/// `rel_frobenius = p^{-1/2} ||W||_F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeNorms {
    pub rel_spectral: f64,
    pub rel_frobenius: f64,
    pub rel_operator: f64,
}

/// Relative spectral and Frobenius errors of `a_hat` against `sigma`.
pub fn relative_norms(a_hat: &SymMatrix, sigma: &SymMatrix) -> Result<RelativeNorms> {
    let whitener = Whitener::dense(sigma)?;
    whitener.relative_norms_of_difference(&a_hat.sub(sigma)?)
}

/// Applies `L^{-1} A L^{-T}` for some `L` with `L L' = Sigma`.
///
/// Any such `L` yields a matrix orthogonally similar to
/// `Sigma^{-1/2} A Sigma^{-1/2}`, so spectral and Frobenius norms agree
/// with the symmetric square-root definition.
#[derive(Debug, Clone)]
pub enum Whitener {
    /// Explicit `Sigma^{-1/2}` from an eigendecomposition.
    Dense { inv_sqrt: Array2<f64> },
    /// `Sigma = D + B B'` with diagonal `D`:
    /// `L^{-1} = (I + Q K Q') D^{-1/2}` where `Q` spans `D^{-1/2} B`.
    Factor {
        d_inv_sqrt: Array1<f64>,
        basis: Array2<f64>,
        shrink: Array1<f64>,
    },
}

impl Whitener {
    pub fn dense(sigma: &SymMatrix) -> Result<Self> {
        let eig = sym_eig(sigma)?;
        let max = eig.values[0];
        let min = *eig.values.last().expect("non-empty");
        if !(min > 1e-12 * max) {
            return Err(Error::Conditioning { min_eigenvalue: min });
        }
        let mut scaled = eig.vectors.clone();
        for (mut col, &v) in scaled.columns_mut().into_iter().zip(eig.values.iter()) {
            col /= v.sqrt();
        }
        let inv_sqrt = SymMatrix::from_upper(scaled.dot(&eig.vectors.t()))?.into_array();
        Ok(Whitener::Dense { inv_sqrt })
    }

    pub fn dim(&self) -> usize {
        match self {
            Whitener::Dense { inv_sqrt } => inv_sqrt.nrows(),
            Whitener::Factor { d_inv_sqrt, .. } => d_inv_sqrt.len(),
        }
    }

    /// `L^{-1} A L^{-T}`.
    pub fn whiten(&self, a: &SymMatrix) -> Result<SymMatrix> {
        if a.dim() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "dimension mismatch: {} vs {}",
                a.dim(),
                self.dim()
            )));
        }
        match self {
            Whitener::Dense { inv_sqrt } => a.congruence(&inv_sqrt.view()),
            Whitener::Factor {
                d_inv_sqrt,
                basis,
                shrink,
            } => {
                let p = a.dim();
                let mut a1 = a.as_array().clone();
                for i in 0..p {
                    for j in 0..p {
                        a1[[i, j]] *= d_inv_sqrt[i] * d_inv_sqrt[j];
                    }
                }
                if basis.ncols() == 0 {
                    return SymMatrix::from_upper(a1);
                }
                // (I + QKQ') A1 (I + QKQ') expanded into rank-r corrections.
                let c = a1.dot(basis);
                let e = basis.t().dot(&c);
                let mut qk = basis.clone();
                for (mut col, &k) in qk.columns_mut().into_iter().zip(shrink.iter()) {
                    col *= k;
                }
                let mut kek = e;
                for i in 0..kek.nrows() {
                    for j in 0..kek.ncols() {
                        kek[[i, j]] *= shrink[i] * shrink[j];
                    }
                }
                let cross = qk.dot(&c.t());
                let mut out = a1;
                out += &cross;
                out += &cross.t();
                out += &basis.dot(&kek).dot(&basis.t());
                SymMatrix::from_upper(out)
            }
        }
    }

    /// Relative norms of `diff = A_hat - Sigma`.
    pub fn relative_norms_of_difference(&self, diff: &SymMatrix) -> Result<RelativeNorms> {
        let w = self.whiten(diff)?;
        let p = w.dim() as f64;
        let rel_operator = spectral_norm_sym(&w)?;
        let frob = w.as_array().iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(RelativeNorms {
            rel_spectral: rel_operator / p.sqrt(),
            rel_frobenius: frob / p.sqrt(),
            rel_operator,
        })
    }
}

/// Covariance with factor structure `B B' + diag(idio_var)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorCovariance {
    loadings: Array2<f64>,
    idio_var: Array1<f64>,
}

impl FactorCovariance {
    pub fn new(loadings: Array2<f64>, idio_var: Vec<f64>) -> Result<Self> {
        if loadings.nrows() != idio_var.len() {
            return Err(Error::InvalidInput(format!(
                "loadings have {} rows but {} idiosyncratic variances were given",
                loadings.nrows(),
                idio_var.len()
            )));
        }
        if let Some(i) = idio_var.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "idiosyncratic variance {i} must be positive, got {}",
                idio_var[i]
            )));
        }
        if loadings.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("loadings have non-finite entries".into()));
        }
        Ok(Self {
            loadings,
            idio_var: Array1::from(idio_var),
        })
    }

    pub fn dim(&self) -> usize {
        self.idio_var.len()
    }

    pub fn loadings(&self) -> &Array2<f64> {
        &self.loadings
    }

    pub fn idio_var(&self) -> &Array1<f64> {
        &self.idio_var
    }

    pub fn dense(&self) -> SymMatrix {
        let mut s = self.loadings.dot(&self.loadings.t());
        for (i, v) in self.idio_var.iter().enumerate() {
            s[[i, i]] += v;
        }
        SymMatrix::from_upper(s).expect("square by construction")
    }

    pub fn idio_dense(&self) -> SymMatrix {
        SymMatrix::from_diag(self.idio_var.as_slice().expect("contiguous"))
    }

    /// Rescales to unit diagonal: `S^{-1/2} (B B' + D) S^{-1/2}` with `S` the diagonal.
    pub fn correlation(&self) -> FactorCovariance {
        let mut b = self.loadings.clone();
        let mut d = self.idio_var.clone();
        for ((mut row, di), i) in b.rows_mut().into_iter().zip(d.iter_mut()).zip(0..) {
            let s = (self.loadings.row(i).dot(&self.loadings.row(i)) + *di).sqrt();
            row /= s;
            *di /= s * s;
        }
        FactorCovariance {
            loadings: b,
            idio_var: d,
        }
    }

    pub fn whitener(&self) -> Result<Whitener> {
        let d_inv_sqrt = self.idio_var.mapv(|v| 1.0 / v.sqrt());
        let mut g = self.loadings.clone();
        for (mut row, &s) in g.rows_mut().into_iter().zip(d_inv_sqrt.iter()) {
            row *= s;
        }
        let m = g.ncols();
        if m == 0 {
            return Ok(Whitener::Factor {
                d_inv_sqrt,
                basis: Array2::zeros((self.dim(), 0)),
                shrink: Array1::zeros(0),
            });
        }
        let small = sym_eig(&SymMatrix::from_upper(g.t().dot(&g))?)?;
        let keep: Vec<usize> = (0..m)
            .filter(|&i| small.values[i] > 1e-14 * small.values[0].max(f64::MIN_POSITIVE))
            .collect();
        let mut basis = Array2::zeros((self.dim(), keep.len()));
        let mut shrink = Array1::zeros(keep.len());
        for (c, &i) in keep.iter().enumerate() {
            let s2 = small.values[i];
            let col = g.dot(&small.vectors.column(i)) / s2.sqrt();
            basis.column_mut(c).assign(&col);
            shrink[c] = 1.0 / (1.0 + s2).sqrt() - 1.0;
        }
        Ok(Whitener::Factor {
            d_inv_sqrt,
            basis,
            shrink,
        })
    }
}
