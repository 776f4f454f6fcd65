use lassotune_core::datagen::{equicorrelation_quad_form, gen_beta, gen_dataset, stream_rng, ScenarioConfig};
use lassotune_core::metrics::{consistency, fscore};
use lassotune_core::selectors::{fold_assignment, gcv_value, gic, risk_estimate, CriterionTrace, GicSpec};
use lassotune_core::solvers::{kkt_residual, lambda_max, lasso_cd, lasso_path, ridge_df, soft_threshold, CdOptions};
use lassotune_core::variance::{half_split, sigma2_cv_rmle, VarianceOptions};
use lassotune_core::SimulatedDataset;
use proptest::prelude::*;

/// Draws a scenario dataset; the sparsity exponent drops to a single true
/// coefficient when `⌊n^0.4⌋` would not fit in `p` columns.
fn dataset(n: usize, p: usize, rho: f64, snr: f64, seed: u64) -> SimulatedDataset {
    let alpha = if (n as f64).powf(0.4) as usize <= p { 0.4 } else { 0.01 };
    gen_dataset(&ScenarioConfig::new(n, p, rho, alpha, snr).with_seed(seed, 0)).expect("valid scenario")
}

fn tight() -> CdOptions {
    CdOptions {
        tol: 1e-12,
        ..CdOptions::default()
    }
}

proptest! {
    #[test]
    fn soft_threshold_shrinks_towards_zero(z in -50.0..50.0f64, t in 0.0..20.0f64) {
        let s = soft_threshold(z, t);
        prop_assert!(s.abs() <= z.abs());
        prop_assert_eq!(s == 0.0, z.abs() <= t);
        if s != 0.0 {
            prop_assert_eq!(s.signum(), z.signum());
            prop_assert!(((z - s).abs() - t).abs() < 1e-12);
        }
    }

    #[test]
    fn cd_output_satisfies_kkt(
        n in 8usize..30,
        p in 2usize..40,
        rho in 0.0..0.9f64,
        frac in 0.02..1.0f64,
        seed in any::<u64>(),
    ) {
        let d = dataset(n, p, rho, 2.0, seed);
        let lambda = frac * lambda_max(&d.x, &d.y);
        let fit = lasso_cd(&d.x, &d.y, lambda, None, &tight()).unwrap();
        prop_assert!(fit.kkt_residual <= 1e-6, "kkt {}", fit.kkt_residual);
        prop_assert!(fit.df <= n.min(p));
    }

    #[test]
    fn zero_is_optimal_above_lambda_max(n in 5usize..20, p in 1usize..20, seed in any::<u64>()) {
        let d = dataset(n, p, 0.3, 1.0, seed);
        let lambda = 1.000001 * lambda_max(&d.x, &d.y);
        let fit = lasso_cd(&d.x, &d.y, lambda, None, &CdOptions::default()).unwrap();
        prop_assert!(fit.support.is_empty());
    }

    #[test]
    fn path_knots_agree_with_cd(
        n in 10usize..30,
        p in 2usize..40,
        rho in 0.0..0.8f64,
        seed in any::<u64>(),
    ) {
        let d = dataset(n, p, rho, 5.0, seed);
        let path = lasso_path(&d.x, &d.y).unwrap();
        prop_assert!(path.knots.windows(2).all(|w| w[1] <= w[0]));
        for (k, &lambda) in path.knots.iter().enumerate() {
            if lambda <= 1e-3 * path.knots[0] {
                continue;
            }
            let fit = lasso_cd(&d.x, &d.y, lambda, None, &tight()).unwrap();
            let gap = fit.beta.iter().zip(&path.betas[k]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(gap <= 1e-4, "knot {k}: gap {gap}");
            prop_assert!(kkt_residual(&d.x, &d.y, &path.betas[k], lambda) <= 1e-6);
        }
    }

    #[test]
    fn ridge_df_decreases_from_rank(n in 3usize..15, p in 1usize..15, seed in any::<u64>()) {
        let d = dataset(n, p, 0.2, 1.0, seed);
        let mut last = f64::INFINITY;
        for lambda in [1e-8, 1e-3, 0.1, 1.0, 10.0, 1e3] {
            let df = ridge_df(&d.x, lambda);
            prop_assert!(df <= last + 1e-12 && df >= 0.0);
            last = df;
        }
        prop_assert!(ridge_df(&d.x, 1e-10) <= n.min(p) as f64 + 1e-9);
    }

    #[test]
    fn fscore_is_bounded_by_precision_and_recall(
        est in proptest::collection::btree_set(0usize..30, 0..15),
        truth in proptest::collection::btree_set(0usize..30, 1..15),
    ) {
        let est: Vec<usize> = est.into_iter().collect();
        let truth: Vec<usize> = truth.into_iter().collect();
        let (pr, re, f) = fscore(&est, &truth);
        for v in [pr, re, f] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(f <= pr.max(re) + 1e-15 && f >= pr.min(re) - 1e-15 || f == 0.0);
        prop_assert_eq!(fscore(&truth, &truth), (1.0, 1.0, 1.0));
    }

    #[test]
    fn consistency_scales_quadratically(c in -3.0..3.0f64, seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 0);
        let (beta, _) = gen_beta(100, 50, 0.5, Some(2.0), 0.3, 1.0, &mut rng).unwrap();
        let scaled: Vec<f64> = beta.iter().map(|b| c * b).collect();
        let got = consistency(&scaled, &beta).unwrap();
        prop_assert!((got - (c - 1.0).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn snr_calibration_is_exact(
        p in 20usize..300,
        rho in 0.0..0.95f64,
        snr in 0.05..20.0f64,
        seed in any::<u64>(),
    ) {
        let mut rng = stream_rng(seed, 0);
        let (beta, support) = gen_beta(100, p, 0.4, Some(snr), rho, 1.0, &mut rng).unwrap();
        prop_assert_eq!(support.len(), 6);
        let energy = equicorrelation_quad_form(&beta, rho);
        prop_assert!((energy / snr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gcv_is_gic_with_log_penalty(train in 1e-6..10.0f64, n in 5usize..200, df_frac in 0.0..0.99f64) {
        let df = (df_frac * n as f64).floor();
        let lhs = gic(train, df, &GicSpec::gcv(), n);
        let rhs = gcv_value(train, df, n).ln();
        prop_assert!((lhs - rhs).abs() < 1e-10 * rhs.abs().max(1.0));
    }

    #[test]
    fn risk_estimate_reduces_to_training_error(train in 0.0..10.0f64, df in 0.0..50.0f64) {
        prop_assert_eq!(risk_estimate(train, 0.0, df, 0.0), train);
    }

    #[test]
    fn criterion_ties_go_to_the_largest_lambda(values in proptest::collection::vec(0u8..4, 1..30)) {
        let m = values.len();
        let lambdas: Vec<f64> = (0..m).map(|k| 1.0 / (k + 1) as f64).collect();
        let vals: Vec<f64> = values.iter().map(|&v| v as f64).collect();
        let t = CriterionTrace::new(lambdas, vals.clone()).unwrap();
        let best = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let first = vals.iter().position(|&v| v == best).unwrap();
        prop_assert_eq!(t.minimizer_index, first);
    }

    #[test]
    fn folds_are_balanced(n in 2usize..200, k in 2usize..12, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let labels = fold_assignment(n, k, seed).unwrap();
        let mut sizes = vec![0usize; k];
        for &l in &labels {
            sizes[l] += 1;
        }
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
        prop_assert_eq!(fold_assignment(n, k, seed).unwrap(), labels);
    }

    #[test]
    fn half_split_partitions_rows(n in 2usize..300, seed in any::<u64>()) {
        let (a, b) = half_split(n, seed);
        prop_assert_eq!(a.len(), n / 2);
        prop_assert_eq!(b.len(), n - n / 2);
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rmle_never_exceeds_cv(
        n in 20usize..50,
        p in 10usize..80,
        rho in 0.0..0.8f64,
        snr in 0.1..10.0f64,
        seed in any::<u64>(),
    ) {
        let d = dataset(n, p, rho, snr, seed);
        let opts = VarianceOptions::default().with_seed(seed);
        let (cv, rmle) = sigma2_cv_rmle(&d.x, &d.y, &opts).unwrap();
        prop_assert!(rmle.value <= cv.value, "rmle {} > cv {}", rmle.value, cv.value);
        prop_assert_eq!(cv.lambda_cv, rmle.lambda_cv);
    }
}
