use ndarray::Array2;

use super::{fix_signs, sym_eig, DataMatrix, EigenSystem, SymMatrix};
use crate::error::{Error, Result};

/// Top-`k` eigenpairs of the sample covariance `(1/n) X'X` of an `n x p` panel.
///
/// When `n < p` the `n x n` Gram matrix `(1/n) X X'` is decomposed instead and
/// each eigenvector is lifted back with `xi = (n lambda)^{-1/2} X' u`. Both
/// matrices share their non-zero spectrum, so only the smaller one is ever
/// formed.
pub fn gram_top_eig(x: &DataMatrix, k: usize) -> Result<EigenSystem> {
    let (n, p) = (x.n_rows(), x.n_cols());
    let available = n.min(p);
    if k == 0 || k > available {
        return Err(Error::Rank {
            requested: k,
            available,
        });
    }
    let xa = x.as_array();
    let scale = 1.0 / n as f64;

    if p <= n {
        let cov = SymMatrix::from_upper(xa.t().dot(xa) * scale)?;
        let eig = sym_eig(&cov)?.truncate(k);
        check_spectrum(&eig.values)?;
        return Ok(eig);
    }

    let gram = SymMatrix::from_upper(xa.dot(&xa.t()) * scale)?;
    let eig = sym_eig(&gram)?.truncate(k);
    check_spectrum(&eig.values)?;

    let mut lifted: Array2<f64> = xa.t().dot(&eig.vectors);
    for (mut col, &lambda) in lifted.columns_mut().into_iter().zip(eig.values.iter()) {
        col /= (n as f64 * lambda).sqrt();
        // Absorb rounding so the lifted columns are unit vectors.
        let norm = col.dot(&col).sqrt();
        col /= norm;
    }
    fix_signs(&mut lifted);
    Ok(EigenSystem {
        values: eig.values,
        vectors: lifted,
    })
}

fn check_spectrum(values: &[f64]) -> Result<()> {
    let top = values[0];
    for (i, &v) in values.iter().enumerate() {
        if !(v > 1e-12 * top) || top <= 0.0 {
            return Err(Error::Degenerate(format!(
                "eigenvalue {} ({v:e}) is not positive relative to the leading eigenvalue {top:e}",
                i + 1
            )));
        }
    }
    Ok(())
}
