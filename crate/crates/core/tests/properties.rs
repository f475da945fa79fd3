mod common;

use fairscope::kendall::kendall_tau_b;
use fairscope::synth::recidivism;
use fairscope::table::{make_holdout, HoldoutSize};
use proptest::prelude::*;

#[test]
fn ols_matches_normal_equations() {
    common::ols_normal_equations(100, 1).unwrap();
}

#[test]
fn kendall_matches_quadratic_count() {
    common::kendall_oracle(200, 2).unwrap();
}

#[test]
fn knn_matches_brute_force() {
    common::knn_brute_force(30, 3).unwrap();
}

#[test]
fn logit_score_and_gradient() {
    common::logit_gradient(20, 4).unwrap();
}

#[test]
fn kde_direct_sum_and_normalization() {
    common::kde_direct_sum(5).unwrap();
}

#[test]
fn iamb_recovers_chain() {
    common::iamb_chain(6).unwrap();
}

#[test]
fn interaction_intervals_cover() {
    common::interaction_ci_coverage(1000, 7).unwrap();
}

#[test]
fn fair_ridge_respects_budget() {
    common::fair_ridge_budget(8).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tau_is_bounded_and_antisymmetric(
        pairs in prop::collection::vec((0i32..8, 0i32..8), 2..80)
    ) {
        let u: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let v: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        if let Ok(t) = kendall_tau_b(&u, &v) {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&t));
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            let tn = kendall_tau_b(&u, &neg).unwrap();
            prop_assert!((t + tn).abs() < 1e-12);
            let ts = kendall_tau_b(&v, &u).unwrap();
            prop_assert!((t - ts).abs() < 1e-12);
        }
    }

    #[test]
    fn tau_invariant_under_monotone_maps(
        xs in prop::collection::vec(-50.0f64..50.0, 3..60),
        ys in prop::collection::vec(-50.0f64..50.0, 3..60),
    ) {
        let n = xs.len().min(ys.len());
        let (u, v) = (&xs[..n], &ys[..n]);
        if let Ok(t) = kendall_tau_b(u, v) {
            let mapped: Vec<f64> = u.iter().map(|x| x.powi(3) + 2.0 * x).collect();
            prop_assert!((kendall_tau_b(&mapped, v).unwrap() - t).abs() < 1e-12);
        }
    }

    #[test]
    fn holdout_partitions_rows(n in 10usize..3000, seed in any::<u64>()) {
        let split = make_holdout(n, HoldoutSize::Default, seed).unwrap();
        prop_assert_eq!(split.holdout.len(), (n as f64 * 0.1).min(1000.0).floor().max(1.0) as usize);
        let mut all: Vec<usize> = split.train.iter().chain(&split.holdout).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn kde_is_nonnegative_and_bounded(
        data in prop::collection::vec(-10.0f64..10.0, 1..40),
        h in 0.05f64..5.0,
        x in -20.0f64..20.0,
    ) {
        let f = fairscope::viz::kde_at(&data, h, x);
        prop_assert!(f >= 0.0);
        prop_assert!(f <= 1.0 / (h * (2.0 * std::f64::consts::PI).sqrt()) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fair_ridge_share_within_budget(u in 0.001f64..1.0, seed in 0u64..1000) {
        let t = recidivism(300, seed);
        let spec = fairscope::design::ModelSpec::new(&t, "priors_count", Some("race")).unwrap();
        let m = fairscope::fair::fit_fair_ridge(&t, &spec, u, fairscope::fair::Family::Linear).unwrap();
        prop_assert!(m.share <= u + 1e-4, "share {} budget {}", m.share, u);
    }
}
