//! Dense symmetric linear algebra.
//!
//! Everything downstream works with three shapes of data: symmetric
//! covariance-like matrices ([`SymMatrix`]), rectangular observation panels
//! ([`DataMatrix`]) and descending eigen-systems ([`EigenSystem`]). The
//! eigensolver is a cyclic Jacobi method; large matrices whose only needed
//! spectral information is an extreme eigenvalue go through a Lanczos
//! iteration instead (see [`lanczos`]).

mod gram;
mod jacobi;
pub mod lanczos;
mod norms;
mod tridiag;

pub use gram::gram_top_eig;
pub use jacobi::{sym_eig, JACOBI_MAX_SWEEPS, JACOBI_TOLERANCE};
pub use norms::{
    DENSE_EIG_LIMIT,
    extreme_eigenvalues, matrix_norms, relative_norms, spectral_norm_sym, FactorCovariance,
    MatrixNorms, RelativeNorms, Whitener,
};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Dense symmetric matrix. Construction guarantees `a[i][j] == a[j][i]` bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Array2<f64>);

impl SymMatrix {
    /// Wraps a square array that is already exactly symmetric.
    pub fn new(a: Array2<f64>) -> Result<Self> {
        check_square(&a)?;
        let n = a.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let (x, y) = (a[[i, j]], a[[j, i]]);
                if x.to_bits() != y.to_bits() && x != y {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({i}, {j}): {x} vs {y}"
                    )));
                }
            }
        }
        Ok(Self(a))
    }

    /// Builds a symmetric matrix from the upper triangle of `a`; the lower
    /// triangle is overwritten.
    pub fn from_upper(mut a: Array2<f64>) -> Result<Self> {
        check_square(&a)?;
        let n = a.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                a[[j, i]] = a[[i, j]];
            }
        }
        Ok(Self(a))
    }

    pub fn identity(n: usize) -> Self {
        Self(Array2::eye(n.max(1)))
    }

    pub fn zeros(n: usize) -> Self {
        Self(Array2::zeros((n.max(1), n.max(1))))
    }

    pub fn from_diag(d: &[f64]) -> Self {
        Self(Array2::from_diag(&Array1::from(d.to_vec())))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn into_array(self) -> Array2<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[[i, j]]
    }

    pub fn diag(&self) -> Vec<f64> {
        self.0.diag().to_vec()
    }

    pub fn trace(&self) -> f64 {
        self.0.diag().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// `self - other`, symmetric by construction.
    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidInput(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(SymMatrix(&self.0 - &other.0))
    }

    /// Congruence `R M R'`, symmetrised from the upper triangle.
    pub fn congruence(&self, r: &ArrayView2<f64>) -> Result<SymMatrix> {
        let out = r.dot(&self.0).dot(&r.t());
        SymMatrix::from_upper(out)
    }

    /// `M x` for a vector `x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.0.dot(&ArrayView1::from(x)).to_vec()
    }

    /// Quadratic form `x' M x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let x = ArrayView1::from(x);
        x.dot(&self.0.dot(&x))
    }
}

fn check_square(a: &Array2<f64>) -> Result<()> {
    if a.nrows() == 0 || a.nrows() != a.ncols() {
        return Err(Error::InvalidInput(format!(
            "expected a non-empty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

/// Rectangular data panel with finite entries and at least one row and column.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix(Array2<f64>);

impl DataMatrix {
    pub fn new(a: Array2<f64>) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::InvalidInput(format!(
                "data matrix must be non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if let Some((idx, _)) = a.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite entry at ({}, {})",
                idx.0, idx.1
            )));
        }
        Ok(Self(a))
    }

    pub fn n_rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn into_array(self) -> Array2<f64> {
        self.0
    }

    pub fn transpose(&self) -> DataMatrix {
        DataMatrix(self.0.t().to_owned())
    }

    /// Subtracts the mean of each row.
    pub fn center_rows(&self) -> DataMatrix {
        let means = self.0.mean_axis(Axis(1)).expect("non-empty");
        let mut out = self.0.clone();
        for (mut row, mu) in out.rows_mut().into_iter().zip(means.iter()) {
            row -= *mu;
        }
        DataMatrix(out)
    }
}

/// Eigenvalues in descending order with matching unit eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn vector(&self, i: usize) -> ArrayView1<'_, f64> {
        self.vectors.column(i)
    }

    /// Keeps the leading `k` pairs.
    pub fn truncate(mut self, k: usize) -> EigenSystem {
        let k = k.min(self.values.len());
        self.values.truncate(k);
        self.vectors = self.vectors.slice(ndarray::s![.., ..k]).to_owned();
        self
    }

    /// `Q diag(values) Q'` over the stored pairs.
    pub fn reconstruct(&self) -> SymMatrix {
        let mut scaled = self.vectors.clone();
        for (mut col, &v) in scaled.columns_mut().into_iter().zip(self.values.iter()) {
            col *= v;
        }
        SymMatrix::from_upper(scaled.dot(&self.vectors.t())).expect("square by construction")
    }

    /// Largest absolute deviation of `Q'Q` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.vectors.t().dot(&self.vectors);
        g.indexed_iter()
            .map(|((i, j), v)| (v - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }
}

/// Flips each column so its largest-magnitude entry is positive (first index wins ties).
pub(crate) fn fix_signs(vectors: &mut Array2<f64>) {
    for mut col in vectors.columns_mut() {
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }
}

/// Sorts eigenpairs descending by value. Stable, so equal values keep solver order.
pub(crate) fn sort_descending(values: Vec<f64>, vectors: Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let sorted_vals = order.iter().map(|&i| values[i]).collect();
    let sorted_vecs = vectors.select(Axis(1), &order);
    (sorted_vals, sorted_vecs)
}
