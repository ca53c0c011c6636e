use ndarray::Array2;

use super::{fix_signs, sort_descending, EigenSystem, SymMatrix};
use crate::error::{Error, Result};

/// Sweep cap for the cyclic Jacobi iteration.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Convergence when the off-diagonal Frobenius mass falls below this fraction of `||M||_F`.
pub const JACOBI_TOLERANCE: f64 = 1e-14;

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues are returned in descending order; each eigenvector column is
/// signed so that its largest-magnitude entry is positive.
pub fn sym_eig(m: &SymMatrix) -> Result<EigenSystem> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let n = m.dim();
    // Row-major working copy of A and of V' (row k of `vt` is eigenvector k).
    let mut a: Vec<f64> = m.as_array().iter().copied().collect();
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        vt[i * n + i] = 1.0;
    }

    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = JACOBI_TOLERANCE * total;
    let mut converged = total == 0.0 || n == 1;
    let mut residual = off_diagonal_norm(&a, n);
    let mut sweeps = 0;

    while !converged && sweeps < JACOBI_MAX_SWEEPS {
        if residual <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                rotate(&mut a, &mut vt, n, p, q);
            }
        }
        sweeps += 1;
        residual = off_diagonal_norm(&a, n);
        converged = residual <= target;
    }
    if !converged {
        return Err(Error::Convergence { sweeps, residual });
    }

    let values: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    // vt holds eigenvectors as rows; columns of its transpose are the eigenvectors.
    let vectors = Array2::from_shape_vec((n, n), vt)
        .expect("n*n buffer")
        .reversed_axes()
        .as_standard_layout()
        .to_owned();
    let (values, mut vectors) = sort_descending(values, vectors);
    fix_signs(&mut vectors);
    Ok(EigenSystem { values, vectors })
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = a[i * n + j];
            s += v * v;
        }
    }
    (2.0 * s).sqrt()
}

/// Applies the rotation annihilating `a[p][q]`, keeping `a` exactly symmetric.
fn rotate(a: &mut [f64], vt: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.is_finite() {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    } else {
        // |theta| overflowed: the rotation angle is ~ 1/(2 theta).
        apq / (aqq - app)
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    a[p * n + p] = app - t * apq;
    a[q * n + q] = aqq + t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let g = a[k * n + p];
        let h = a[k * n + q];
        let new_p = g - s * (h + g * tau);
        let new_q = h + s * (g - h * tau);
        a[k * n + p] = new_p;
        a[p * n + k] = new_p;
        a[k * n + q] = new_q;
        a[q * n + k] = new_q;
    }

    let (row_p, row_q) = if p < q {
        let (lo, hi) = vt.split_at_mut(q * n);
        (&mut lo[p * n..p * n + n], &mut hi[..n])
    } else {
        unreachable!("p < q by loop construction")
    };
    for (vp, vq) in row_p.iter_mut().zip(row_q.iter_mut()) {
        let g = *vp;
        let h = *vq;
        *vp = g - s * (h + g * tau);
        *vq = h + s * (g - h * tau);
    }
}
