use ndarray::Array2;
use proptest::prelude::*;
use spikecov_core::apps::{fdp_approx, pvalues, relative_risk};
use spikecov_core::estimators::{
    adaptive_threshold, factor_estimate, panel_trace, poet, shrink_spikes, Shrinkage, ThresholdConfig,
};
use spikecov_core::linalg::{gram_top_eig, relative_norms, sym_eig, DataMatrix, SymMatrix};
use spikecov_core::randgen::{rep_rng, standard_normal};
use spikecov_core::stats::{ks_distance, normal_cdf};

fn gaussian(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut g = rep_rng(seed, 7);
    Array2::from_shape_fn((rows, cols), |_| standard_normal(&mut g))
}

fn random_sym(n: usize, seed: u64) -> SymMatrix {
    SymMatrix::from_upper(gaussian(n, n, seed)).unwrap()
}

fn random_spd(n: usize, seed: u64) -> SymMatrix {
    let a = gaussian(n, n + 3, seed);
    let mut s = a.dot(&a.t()) / (n + 3) as f64;
    for i in 0..n {
        s[[i, i]] += 0.5;
    }
    SymMatrix::from_upper(s).unwrap()
}

fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigendecomposition_reconstructs(n in 1usize..16, seed in any::<u64>()) {
        let a = random_sym(n, seed);
        let e = sym_eig(&a).unwrap();
        prop_assert!(max_abs(&(e.reconstruct().as_array() - a.as_array())) <= 1e-10);
        prop_assert!(e.orthonormality_defect() <= 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn gram_trick_matches_direct(n in 2usize..=20, p in 2usize..=20, seed in any::<u64>()) {
        let x = DataMatrix::new(gaussian(n, p, seed)).unwrap();
        let k = n.min(p).min(4);
        let fast = gram_top_eig(&x, k).unwrap();
        let s = SymMatrix::from_upper(x.as_array().t().dot(x.as_array()) / n as f64).unwrap();
        let direct = sym_eig(&s).unwrap();
        for j in 0..k {
            prop_assert!((fast.values[j] - direct.values[j]).abs() <= 1e-8 * direct.values[0].max(1.0));
            // Vectors only when the eigenvalue is simple.
            let gap = (0..direct.len())
                .filter(|&i| i != j)
                .map(|i| (direct.values[i] - direct.values[j]).abs())
                .fold(f64::INFINITY, f64::min);
            if gap > 1e-6 {
                let dot = fast.vector(j).dot(&direct.vector(j));
                prop_assert!((dot.abs() - 1.0).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn relative_norms_congruence_invariant(n in 2usize..8, seed in any::<u64>()) {
        let sigma = random_spd(n, seed);
        let a_hat = random_spd(n, seed ^ 1);
        let r = gaussian(n, n, seed ^ 2) + Array2::<f64>::eye(n) * 3.0;
        let base = relative_norms(&a_hat, &sigma).unwrap();
        let moved = relative_norms(&a_hat.congruence(&r.view()).unwrap(), &sigma.congruence(&r.view()).unwrap()).unwrap();
        prop_assert!((base.rel_operator - moved.rel_operator).abs() <= 1e-7 * base.rel_operator.max(1.0));
        prop_assert!((base.rel_frobenius - moved.rel_frobenius).abs() <= 1e-7 * base.rel_frobenius.max(1.0));
    }

    #[test]
    fn hard_threshold_idempotent_and_diagonal_exact(p in 2usize..12, seed in any::<u64>(), omega in 0.01f64..1.0) {
        let y = gaussian(p, 30, seed);
        let s = SymMatrix::from_upper(y.dot(&y.t()) / 30.0).unwrap();
        let cfg = ThresholdConfig { shrinkage: Shrinkage::Hard, ..ThresholdConfig::default() };
        let once = adaptive_threshold(&s, &cfg, omega).unwrap();
        let twice = adaptive_threshold(&once, &cfg, omega).unwrap();
        prop_assert_eq!(&once, &twice);
        for rule in [Shrinkage::Soft, Shrinkage::Hard, Shrinkage::Scad] {
            let t = adaptive_threshold(&s, &ThresholdConfig { shrinkage: rule, ..cfg }, omega).unwrap();
            prop_assert!(s.diag().iter().zip(t.diag()).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }

    #[test]
    fn factor_residuals_orthogonal(p in 4usize..30, t in 4usize..30, m in 1usize..3, seed in any::<u64>()) {
        prop_assume!(m < p.min(t));
        let y = DataMatrix::new(gaussian(p, t, seed)).unwrap();
        let fit = factor_estimate(&y, m).unwrap();
        prop_assert!(max_abs(&fit.u_hat.dot(&fit.f_hat)) <= 1e-9 * max_abs(y.as_array()).max(1.0) * t as f64);
    }

    #[test]
    fn spoet_only_lowers_spike_values(seed in any::<u64>()) {
        let y = DataMatrix::new(gaussian(40, 20, seed)).unwrap();
        let cfg = ThresholdConfig::default();
        let base = poet(&y, 2, &cfg).unwrap();
        let shrunk = shrink_spikes(&base, panel_trace(&y), 20).unwrap();
        prop_assert_eq!(&shrunk.spike_vectors, &base.spike_vectors);
        prop_assert_eq!(&shrunk.residual, &base.residual);
        prop_assert!(shrunk.spike_values.iter().zip(&base.spike_values).all(|(s, b)| *s >= 0.0 && s <= b));
        prop_assert!(shrunk.spike_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn fdp_approx_sign_flip_invariant(seed in any::<u64>(), r in 1usize..50) {
        let mut b = gaussian(30, 2, seed).mapv(|v| 0.5 * v.tanh());
        let w = vec![1.3, -0.4];
        let plain = fdp_approx(b.view(), &w, r, 0.05).unwrap();
        let neg: Vec<f64> = w.iter().map(|v| -v).collect();
        let flipped = fdp_approx(b.view(), &neg, r, 0.05).unwrap();
        prop_assert!((plain - flipped).abs() <= 1e-12 * plain);
        b.column_mut(0).mapv_inplace(|v| -v);
        let joint = fdp_approx(b.view(), &[-1.3, -0.4], r, 0.05).unwrap();
        prop_assert!((plain - joint).abs() <= 1e-12 * plain);
    }

    #[test]
    fn relative_risk_scale_invariant(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let sigma = random_spd(6, seed);
        let sigma_hat = random_spd(6, seed ^ 3);
        let w: Vec<f64> = gaussian(1, 6, seed ^ 4).iter().copied().collect();
        let scaled: Vec<f64> = w.iter().map(|v| v * scale).collect();
        let a = relative_risk(&w, &sigma_hat, &sigma).unwrap();
        let b = relative_risk(&scaled, &sigma_hat, &sigma).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
    }

    #[test]
    fn pvalues_decrease_in_abs_z(a in 0.0f64..8.0, b in 0.0f64..8.0, flip in any::<bool>()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let hi = if flip { -hi } else { hi };
        let p = pvalues(&[lo, hi]);
        prop_assert!(p[0] >= p[1]);
        prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn ks_invariant_under_monotone_transform(seed in any::<u64>(), n in 2usize..200) {
        let x: Vec<f64> = gaussian(1, n, seed).iter().copied().collect();
        let y: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let a = ks_distance(&x, normal_cdf).unwrap();
        let b = ks_distance(&y, |v: f64| normal_cdf(v.ln())).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn gram_trick_on_fifty_seeded_instances() {
    for inst in 0..50u64 {
        let mut g = rep_rng(2024, inst);
        let n = 2 + (standard_normal(&mut g).abs() * 6.0) as usize % 19;
        let p = 2 + (standard_normal(&mut g).abs() * 6.0) as usize % 19;
        let x = DataMatrix::new(gaussian(n, p, inst)).unwrap();
        let k = n.min(p);
        let fast = gram_top_eig(&x, k).unwrap();
        let s = SymMatrix::from_upper(x.as_array().t().dot(x.as_array()) / n as f64).unwrap();
        let direct = sym_eig(&s).unwrap();
        for j in 0..k {
            assert!((fast.values[j] - direct.values[j]).abs() <= 1e-8, "instance {inst}, pair {j}");
        }
    }
}

#[test]
fn gram_trick_small_example() {
    let x = DataMatrix::new(ndarray::array![
        [1.0, 0.0, 2.0],
        [0.0, 1.0, -1.0],
        [3.0, 1.0, 0.0],
        [-1.0, 2.0, 1.0]
    ])
    .unwrap();
    let fast = gram_top_eig(&x, 3).unwrap();
    let s = SymMatrix::from_upper(x.as_array().t().dot(x.as_array()) / 4.0).unwrap();
    let direct = sym_eig(&s).unwrap();
    for j in 0..3 {
        assert!((fast.values[j] - direct.values[j]).abs() <= 1e-8);
        assert!((fast.vector(j).dot(&direct.vector(j)).abs() - 1.0).abs() <= 1e-8);
    }
}
