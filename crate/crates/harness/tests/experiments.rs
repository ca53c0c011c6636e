use ndarray::{Array1, Array2};
use spikecov_core::apps::{fdp_approx, fdp_counts, fdp_estimate, least_squares_w, pvalues};
use spikecov_core::estimators::{CovEstimate, Method};
use spikecov_core::linalg::{gram_top_eig, SymMatrix};
use spikecov_core::randgen::{gen_spiked_sample, rep_rng, standard_normal, SpikedModelSpec};
use spikecov_core::spiked::rescaled_nonspike_direction;
use spikecov_core::stats::ols_slope;
use spikecov_harness::{run, ExperimentConfig, ExperimentKind, HarnessError};

fn small(kind: ExperimentKind, reps: usize, pairs: &[(&str, &str)]) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(kind).with_seed(3).with_reps(reps);
    for (k, v) in pairs {
        cfg.set(k, v).unwrap();
    }
    cfg
}

#[test]
fn eigen_single_rep_has_one_row() {
    let r = run(&small(ExperimentKind::Eigen, 1, &[("n", "20"), ("p", "80")])).unwrap();
    assert_eq!(r.rows.len(), 1);
    // rep + 3 spikes x (4 stats + 2 off-diagonals + 3 elements)
    assert_eq!(r.columns.len(), 1 + 3 * 9);
    assert!(r.get("ks_eigenvalue_1").is_some());
    assert!(r.get("var_eig_stat_1").is_none());
    assert!(r.summary().iter().all(|(_, v)| v.is_finite()));
}

#[test]
fn eigen_row_count_and_keys() {
    let r = run(&small(ExperimentKind::Eigen, 30, &[("n", "20"), ("p", "80")])).unwrap();
    assert_eq!(r.rows.len(), 30);
    for key in ["mean_angle_3", "ks_offdiag_2_3", "corr_3_2_3", "median_abs_diag_1", "var_eig_stat_2"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    let angles = r.column("angle_1").unwrap();
    assert!(angles.iter().all(|a| (0.0..=1.0).contains(a)));
}

#[test]
fn angles_two_reps_one_pair() {
    let r = run(&small(ExperimentKind::Angles, 2, &[("n", "20"), ("p", "80")])).unwrap();
    for j in 1..=3 {
        assert_eq!(r.get(&format!("pairs_{j}")), Some(1.0));
    }
    assert_eq!(r.rows.len(), 2);
    assert!(run(&small(ExperimentKind::Angles, 1, &[("n", "20"), ("p", "80")])).is_err());
}

#[test]
fn equal_nonspikes_leave_direction_unscaled() {
    let spec = SpikedModelSpec::new(60, 15, vec![30.0, 12.0], &[1.0]).unwrap();
    let x = gen_spiked_sample(&spec, &mut rep_rng(1, 0));
    let eig = gram_top_eig(&x, 2).unwrap();
    let xi = eig.vector(0).to_vec();
    let tail = &xi[2..];
    let norm = tail.iter().map(|v| v * v).sum::<f64>().sqrt();
    let got = rescaled_nonspike_direction(&xi, &spec).unwrap();
    for (a, b) in got.iter().zip(tail) {
        assert!((a - b / norm).abs() <= 1e-15);
    }
}

#[test]
fn rates_shape_and_slope_keys() {
    let r = run(&small(ExperimentKind::Rates, 5, &[("n_grid", "10,14,20")])).unwrap();
    assert_eq!(r.rows.len(), 2 * 3 * 5);
    assert!(r.get("slope_single").is_some() && r.get("slope_double").is_some());
    assert!(run(&small(ExperimentKind::Rates, 5, &[("n_grid", "10")])).is_err());
}

#[test]
fn slope_recovered_from_exact_line() {
    let ns = [10.0f64, 51.0];
    let x: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let y: Vec<f64> = x.iter().map(|v| 0.7 - 1.5 * v).collect();
    let fit = ols_slope(&x, &y).unwrap();
    assert!((fit.slope + 1.5).abs() <= 1e-12);
}

#[test]
fn spoet_errors_single_grid_point_shape() {
    let r = run(&small(ExperimentKind::SpoetErrors, 2, &[("t_grid", "30")])).unwrap();
    assert_eq!(r.rows.len(), 2 * 3);
    assert_eq!(r.columns.len(), 4 + 5);
    assert!(r.get("mean_spoet_max_T30").is_some());
    assert!(r.get("spoet_dominates_poet_rel_spectral").is_some());
    assert!(r.get("slope_rel_spectral_spoet").is_none());
}

#[test]
fn spoet_errors_rejects_infeasible_grid() {
    let err = run(&small(ExperimentKind::SpoetErrors, 2, &[("t_grid", "3")])).unwrap_err();
    assert!(err.is_validation(), "{err}");
}

#[test]
fn fdp_without_signal_has_only_false_discoveries() {
    let cfg = small(
        ExperimentKind::Fdp,
        6,
        &[("n", "40"), ("p", "200"), ("t", "0.1"), ("signal_fraction", "0")],
    );
    let r = run(&cfg).unwrap();
    let truth = r.column("fdp_true").unwrap();
    assert!(!truth.is_empty());
    assert!(truth.iter().all(|v| *v == 1.0));
    assert_eq!(r.rows.len() as f64 + r.get("skipped_reps").unwrap(), 6.0);
}

#[test]
fn fdp_plug_in_with_exact_loadings_equals_approximation() {
    let (p, m, t) = (50usize, 2usize, 0.1);
    let mut g = rep_rng(4, 0);
    let gamma = {
        let a = Array2::from_shape_fn((p, m), |_| standard_normal(&mut g));
        let q = gram_top_eig(
            &spikecov_core::linalg::DataMatrix::new(a.t().to_owned()).unwrap(),
            m,
        )
        .unwrap();
        q.vectors
    };
    let values = vec![6.0, 3.0];
    let est = CovEstimate {
        spike_values: values.clone(),
        spike_vectors: gamma,
        residual: SymMatrix::identity(p),
        c_hat: None,
        method: Method::Poet,
    };
    let b = est.loadings();
    let w = Array1::from(vec![6.0, -4.0]);
    let exact = b.dot(&w).to_vec();
    let w_hat = least_squares_w(b.view(), &exact).unwrap();
    assert!(w_hat.iter().zip(w.iter()).all(|(a, b)| (a - b).abs() <= 1e-12));

    let mut z = exact;
    for v in z.iter_mut().take(10) {
        *v += 6.0;
    }
    let (r, _) = fdp_counts(&pvalues(&z), t, &[]);
    assert!(r > 0);
    let got = fdp_estimate(&est, &z, t, None).unwrap();
    let want = fdp_approx(b.view(), &got.w_hat, r, t).unwrap();
    assert!(want < 1.0);
    assert!((got.fdp_est - want).abs() <= 1e-12, "{} vs {want}", got.fdp_est);
}

#[test]
fn invalid_overrides_name_the_field() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Eigen).with_reps(2);
    cfg.set("spikes", "5,5").unwrap();
    match run(&cfg).unwrap_err() {
        HarnessError::Config { field, .. } => assert_eq!(field, "spikes"),
        other => panic!("unexpected {other}"),
    }
    let cfg = ExperimentConfig::new(ExperimentKind::Eigen).with_reps(0);
    assert!(run(&cfg).unwrap_err().is_validation());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cfg = small(ExperimentKind::SpoetErrors, 3, &[("t_grid", "25,30")]);
    let mut a = Vec::new();
    let mut b = Vec::new();
    run(&cfg).unwrap().write_csv(&mut a).unwrap();
    run(&cfg).unwrap().write_csv(&mut b).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        run(&cfg).unwrap().summary_text(),
        run(&cfg).unwrap().summary_text()
    );
}
