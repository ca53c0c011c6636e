//! Lanczos iteration with full reorthogonalisation.
//!
//! Used where only extreme eigenvalues (spectral norms) or a few leading
//! eigenpairs of a large symmetric operator are needed. A dense Jacobi
//! decomposition of a 2000 x 2000 matrix costs minutes; a Lanczos run costs
//! a few hundred matrix-vector products.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::tridiag::tridiag_eig;
use crate::error::{Error, Result};

const START_SEED: u64 = 0x5eed_1a9c_205e_ed00;

/// What the caller needs converged.
#[derive(Debug, Clone, Copy)]
pub struct LanczosTarget {
    /// Number of leading (largest) Ritz pairs that must converge.
    pub top: usize,
    /// Whether the smallest Ritz value must converge as well.
    pub bottom: bool,
    /// Whether Ritz vectors for the leading pairs are returned.
    pub vectors: bool,
}

#[derive(Debug, Clone)]
pub struct LanczosOutcome {
    /// Converged leading Ritz values, descending.
    pub top_values: Vec<f64>,
    /// Leading Ritz vectors as columns (`dim x top`), when requested.
    pub top_vectors: Option<Array2<f64>>,
    /// Smallest Ritz value, when requested.
    pub bottom_value: Option<f64>,
    pub steps: usize,
}

/// Runs Lanczos on the symmetric operator `matvec` (`y = A x`) of size `dim`.
///
/// Converged means every requested Ritz pair has residual
/// `|beta_k s_k| <= tol * max|theta|`.
pub fn lanczos<F>(dim: usize, matvec: F, target: LanczosTarget, tol: f64) -> Result<LanczosOutcome>
where
    F: Fn(&[f64], &mut [f64]),
{
    if dim == 0 || target.top > dim {
        return Err(Error::Rank {
            requested: target.top,
            available: dim,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    let mut q = random_unit(dim, &mut rng, &basis).expect("first vector");
    let mut w = vec![0.0; dim];
    let mut scale = 0.0f64;

    loop {
        matvec(&q, &mut w);
        let alpha = dot(&q, &w);
        axpy(-alpha, &q, &mut w);
        if let (Some(prev), Some(&beta)) = (basis.last(), betas.last()) {
            axpy(-beta, prev, &mut w);
        }
        basis.push(q.clone());
        alphas.push(alpha);
        // Two passes of classical Gram-Schmidt keep the basis orthogonal to
        // working precision.
        for _ in 0..2 {
            for v in &basis {
                let h = dot(v, &w);
                axpy(-h, v, &mut w);
            }
        }
        let beta = norm(&w);
        scale = scale.max(alpha.abs()).max(beta);
        let k = basis.len();
        let breakdown = beta <= 1e-13 * scale.max(f64::MIN_POSITIVE);
        let exhausted = k == dim;

        if breakdown || exhausted || k.is_multiple_of(5) || k == target.top {
            let (values, z) = tridiag_eig(&alphas, &betas)?;
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
            let theta_max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let threshold = tol * theta_max.max(f64::MIN_POSITIVE);
            let residual = |i: usize| {
                if breakdown || exhausted {
                    0.0
                } else {
                    (beta * z[(k - 1) * k + i]).abs()
                }
            };
            let enough = k >= target.top;
            let worst = order
                .iter()
                .take(target.top)
                .map(|&i| residual(i))
                .chain(target.bottom.then(|| residual(order[k - 1])))
                .fold(0.0f64, f64::max);
            let converged = enough && worst <= threshold;

            if converged {
                let top_values = order.iter().take(target.top).map(|&i| values[i]).collect();
                let bottom_value = target.bottom.then(|| values[order[k - 1]]);
                let top_vectors = target.vectors.then(|| {
                    let mut out = Array2::zeros((dim, target.top));
                    for (col, &i) in order.iter().take(target.top).enumerate() {
                        for (j, v) in basis.iter().enumerate() {
                            let coef = z[j * k + i];
                            for (r, x) in v.iter().enumerate() {
                                out[[r, col]] += coef * x;
                            }
                        }
                    }
                    out
                });
                return Ok(LanczosOutcome {
                    top_values,
                    top_vectors,
                    bottom_value,
                    steps: k,
                });
            }
            if exhausted {
                return Err(Error::Convergence {
                    sweeps: k,
                    residual: worst,
                });
            }
        }

        if breakdown {
            // Invariant subspace found before enough pairs converged: restart
            // in the orthogonal complement with a decoupled block.
            match random_unit(dim, &mut rng, &basis) {
                Some(fresh) => {
                    betas.push(0.0);
                    q = fresh;
                }
                None => {
                    return Err(Error::Convergence {
                        sweeps: basis.len(),
                        residual: beta,
                    })
                }
            }
        } else {
            betas.push(beta);
            for (qi, wi) in q.iter_mut().zip(w.iter()) {
                *qi = wi / beta;
            }
        }
    }
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _ in 0..4 {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        for _ in 0..2 {
            for b in basis {
                let h = dot(b, &v);
                axpy(-h, b, &mut v);
            }
        }
        let n = norm(&v);
        if n > 1e-8 {
            v.iter_mut().for_each(|x| *x /= n);
            return Some(v);
        }
    }
    None
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sym_eig, SymMatrix};
    use ndarray::ArrayView1;

    fn random_sym(n: usize, seed: u64) -> SymMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Array2::from_shape_fn((n, n), |_| StandardNormal.sample(&mut rng));
        SymMatrix::from_upper(a).unwrap()
    }

    fn op(m: &SymMatrix) -> impl Fn(&[f64], &mut [f64]) + '_ {
        move |x, y| {
            let r = m.as_array().dot(&ArrayView1::from(x));
            y.copy_from_slice(r.as_slice().unwrap());
        }
    }

    #[test]
    fn extremes_match_jacobi() {
        let m = random_sym(120, 5);
        let reference = sym_eig(&m).unwrap();
        let out = lanczos(
            120,
            op(&m),
            LanczosTarget { top: 1, bottom: true, vectors: false },
            1e-12,
        )
        .unwrap();
        assert!((out.top_values[0] - reference.values[0]).abs() < 1e-9);
        assert!((out.bottom_value.unwrap() - reference.values[119]).abs() < 1e-9);
    }

    #[test]
    fn leading_pairs_of_spiked_matrix() {
        let n = 150;
        let mut d: Vec<f64> = (0..n).map(|i| 1.0 + 0.001 * i as f64).collect();
        d[3] = 40.0;
        d[10] = 25.0;
        d[77] = 12.0;
        let m = SymMatrix::from_diag(&d);
        let out = lanczos(n, op(&m), LanczosTarget { top: 3, bottom: false, vectors: true }, 1e-12)
            .unwrap();
        assert!((out.top_values[0] - 40.0).abs() < 1e-10);
        assert!((out.top_values[1] - 25.0).abs() < 1e-10);
        assert!((out.top_values[2] - 12.0).abs() < 1e-10);
        let v = out.top_vectors.unwrap();
        assert!((v[[3, 0]].abs() - 1.0).abs() < 1e-9);
        assert!((v[[10, 1]].abs() - 1.0).abs() < 1e-9);
        assert!((v[[77, 2]].abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn identity_breaks_down_immediately() {
        let m = SymMatrix::identity(50);
        let out =
            lanczos(50, op(&m), LanczosTarget { top: 1, bottom: true, vectors: false }, 1e-12)
                .unwrap();
        assert_eq!(out.steps, 1);
        assert!((out.top_values[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn low_rank_operator() {
        // Rank-one plus zero: a second leading pair lives in the null space.
        let n = 30;
        let mut a = Array2::zeros((n, n));
        a[[0, 0]] = 5.0;
        let m = SymMatrix::new(a).unwrap();
        let out = lanczos(n, op(&m), LanczosTarget { top: 2, bottom: false, vectors: true }, 1e-12)
            .unwrap();
        assert!((out.top_values[0] - 5.0).abs() < 1e-12);
        assert!(out.top_values[1].abs() < 1e-12);
    }
}
