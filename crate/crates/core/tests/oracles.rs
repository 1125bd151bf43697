//! Special functions against statrs, plus property checks on the public API.

use bagbayes::bagging::{bag_monte_carlo, bagged_moments};
use bagbayes::experiments::paired_t_interval;
use bagbayes::models::{Dataset, GaussianLocationModel, ScalarPosterior};
use bagbayes::overlap::{overlap_bound, IntervalMode, ScalarMixture};
use bagbayes::randstream::{draw_counts, SeedPath};
use bagbayes::special;
use nalgebra::DMatrix;
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use statrs::function::{beta, gamma};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn normal_functions_match_statrs() {
    let n = Normal::new(0.0, 1.0).unwrap();
    for i in -80..=80 {
        let x = i as f64 / 10.0;
        // statrs' erf is good to about 1e-10 relative
        assert!(close(special::normal_cdf(x), n.cdf(x), 1e-9), "cdf at {x}");
    }
    // reference values from 30-digit arithmetic
    for (x, want) in [
        (-5.0, 2.866_515_718_791_939e-7),
        (-3.5, 2.326_290_790_355_250_4e-4),
        (-2.8, 2.555_130_330_427_934_2e-3),
        (-2.0, 2.275_013_194_817_921e-2),
        (-1.0, 1.586_552_539_314_570_5e-1),
    ] {
        let got = special::normal_cdf(x);
        assert!((got - want).abs() <= 1e-14 * want, "cdf at {x}: {got:e} vs {want:e}");
    }
    for p in [1e-12, 1e-6, 0.001, 0.025, 0.3, 0.5, 0.77, 0.975, 0.999999] {
        let q = special::normal_quantile(p);
        assert!(close(q, n.inverse_cdf(p), 1e-9), "quantile at {p}");
    }
}

#[test]
fn student_t_matches_statrs() {
    for dof in [1.0, 2.0, 3.5, 5.0, 30.0, 198.0] {
        let t = StudentsT::new(0.0, 1.0, dof).unwrap();
        for i in -40..=40 {
            let x = i as f64 / 4.0;
            assert!(
                close(special::student_t_cdf(x, dof), t.cdf(x), 1e-11),
                "cdf({x}, {dof})"
            );
        }
        for p in [0.005, 0.05, 0.5, 0.9, 0.995] {
            let q = special::student_t_quantile(p, dof);
            assert!((t.cdf(q) - p).abs() < 1e-10, "quantile({p}, {dof})");
        }
    }
    assert!((special::student_t_quantile(0.995, 1.0) - 63.6567).abs() < 1e-3);
}

#[test]
fn gamma_and_beta_match_statrs() {
    for x in [0.1, 0.5, 1.0, 2.5, 7.0, 40.0, 170.0] {
        assert!(close(special::ln_gamma(x), gamma::ln_gamma(x), 1e-12), "ln_gamma({x})");
    }
    for (a, x) in [(0.5, 0.2), (2.0, 1.0), (5.0, 9.0), (30.0, 25.0)] {
        assert!(
            close(special::gamma_p(a, x), gamma::gamma_lr(a, x), 1e-11),
            "gamma_p({a}, {x})"
        );
    }
    for (a, b, x) in [(0.5, 0.5, 0.3), (2.0, 3.0, 0.7), (10.0, 1.5, 0.95), (50.0, 40.0, 0.55)] {
        let got = special::beta_inc(a, b, x, 1.0 - x);
        assert!(close(got, beta::beta_reg(a, b, x), 1e-11), "beta_inc({a}, {b}, {x})");
    }
}

#[test]
fn paired_t_examples() {
    let (lo, hi) = paired_t_interval(&[-1.0, 1.0], 0.99).unwrap();
    assert!((lo + 63.657).abs() < 1e-3 && (hi - 63.657).abs() < 1e-3);
    let (lo, hi) = paired_t_interval(&[0.4; 5], 0.99).unwrap();
    assert_eq!((lo, hi), (0.4, 0.4));
    assert!(paired_t_interval(&[1.0], 0.99).is_err());
}

fn scalar_posterior() -> impl Strategy<Value = ScalarPosterior> {
    prop_oneof![
        (-5.0..5.0f64, 0.01..4.0f64).prop_map(|(m, v)| ScalarPosterior::normal(m, v)),
        (-5.0..5.0f64, 0.1..2.0f64, 1.0..40.0f64).prop_map(|(c, s, d)| {
            ScalarPosterior::Student(bagbayes::models::StudentScalarPosterior::new(c, s, d).unwrap())
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bootstrap_counts_sum_to_m(n in 1usize..40, m in 0usize..60, seed in any::<u64>()) {
        let c = draw_counts(n, m, &SeedPath::root(seed)).unwrap();
        prop_assert_eq!(c.counts().len(), n);
        prop_assert_eq!(c.counts().iter().map(|&x| x as usize).sum::<usize>(), m);
        prop_assert_eq!(c, draw_counts(n, m, &SeedPath::root(seed)).unwrap());
    }

    #[test]
    fn overlap_bound_is_product(a in 0.0..0.99f64, b in 0.0..0.99f64) {
        let v = overlap_bound(a, b).unwrap();
        prop_assert!((v - (1.0 - a) * (1.0 - b)).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn mixture_quantile_inverts_cdf(
        comps in proptest::collection::vec((0.1..1.0f64, scalar_posterior()), 1..5),
        p in 0.001..0.999f64,
    ) {
        let total: f64 = comps.iter().map(|c| c.0).sum();
        let mix = ScalarMixture::new(comps.into_iter().map(|(w, c)| (w / total, c)).collect()).unwrap();
        let q = mix.quantile(p);
        prop_assert!((mix.cdf(q) - p).abs() < 1e-8);
        let iv = mix.interval(0.1, IntervalMode::MixtureQuantile).unwrap();
        prop_assert!(iv.lower <= iv.upper);
        prop_assert!((mix.cdf(iv.upper) - mix.cdf(iv.lower) - 0.9).abs() < 1e-8);
    }

    #[test]
    fn bagged_covariance_dominates_within(seed in any::<u64>(), n in 2usize..12, b in 2usize..12) {
        let x = DMatrix::from_fn(n, 2, |i, j| ((seed.wrapping_add((i * 7 + j) as u64) % 1000) as f64) / 100.0);
        let model = GaussianLocationModel::new(DMatrix::identity(2, 2), DMatrix::identity(2, 2) * 0.1).unwrap();
        let bp = bag_monte_carlo(&model, &Dataset::location(x).unwrap(), n, b, &SeedPath::root(seed)).unwrap();
        let mom = bagged_moments(&bp).unwrap();
        let gap = mom.cov_matrix() - mom.within_matrix();
        let eig = gap.symmetric_eigen().eigenvalues;
        prop_assert!(eig.iter().all(|&e| e > -1e-10));
    }

    #[test]
    fn paired_t_is_antisymmetric(d in proptest::collection::vec(-10.0..10.0f64, 2..30)) {
        let (lo, hi) = paired_t_interval(&d, 0.99).unwrap();
        let neg: Vec<f64> = d.iter().map(|x| -x).collect();
        let (nlo, nhi) = paired_t_interval(&neg, 0.99).unwrap();
        prop_assert!(lo <= hi);
        prop_assert!((nlo + hi).abs() < 1e-9 && (nhi + lo).abs() < 1e-9);
    }
}
