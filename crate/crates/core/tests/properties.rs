mod common;

use minkloss::decoder::{exhaustive_decode, score_path, viterbi_decode};
use minkloss::mink::{
    analyze_odd_order, brute_force_transform, closed_form_transform, gradient_coefficients, newton_transform,
    LossOrder, OddLossOrder, Posterior, SolverConfig,
};
use minkloss::posterior::{to_log_scores, transform_matrix};
use minkloss::scoring::{align_and_score, corpus_wer};
use num_complex::Complex64;
use proptest::prelude::*;

fn even_order() -> impl Strategy<Value = LossOrder> {
    prop::sample::select(vec![2u32, 4, 6, 8, 10]).prop_map(|o| LossOrder::new(o).unwrap())
}

fn post(v: f64) -> Posterior {
    Posterior::new(v).unwrap()
}

fn t(mu: f64, order: LossOrder) -> f64 {
    closed_form_transform(post(mu), order).value()
}

#[test]
fn frozen_grid_oracle_values() {
    // values computed with the longhand grid argmin, 10^6 steps
    let cases = [
        (0.1, 4, 0.324666),
        (0.1, 6, 0.391873),
        (0.8, 4, 0.613512),
        (0.9, 6, 0.608127),
    ];
    for (mu, order, expected) in cases {
        let grid = common::grid_argmin(mu, order, 1_000_000);
        assert!((grid - expected).abs() < 2e-6, "grid {grid} vs frozen {expected}");
        let closed = t(mu, LossOrder::new(order as u32).unwrap());
        assert!((closed - expected).abs() < 5e-7, "closed {closed} vs frozen {expected}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn order_two_is_identity(mu in 0.0f64..=1.0) {
        prop_assert_eq!(t(mu, LossOrder::SQUARED), mu);
        let n = newton_transform(post(mu), LossOrder::SQUARED, &SolverConfig::default()).unwrap();
        prop_assert!((n.value() - mu).abs() < 1e-12);
    }

    #[test]
    fn symmetry(mu in 0.0f64..=1.0, order in even_order()) {
        let lhs = t(1.0 - mu, order);
        let rhs = 1.0 - t(mu, order);
        prop_assert!((lhs - rhs).abs() <= 1e-12, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn strictly_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0, order in even_order()) {
        prop_assume!((a - b).abs() > 1e-9);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(t(lo, order) < t(hi, order));
    }

    #[test]
    fn contraction_toward_half(mu in 1e-6f64..0.5 - 1e-6) {
        let t4 = t(mu, LossOrder::FOURTH);
        let t6 = t(mu, LossOrder::SIXTH);
        prop_assert!(mu < t4 && t4 < 0.5);
        prop_assert!(t4 < t6 && t6 < 0.5);
        let m = 1.0 - mu;
        let u4 = t(m, LossOrder::FOURTH);
        let u6 = t(m, LossOrder::SIXTH);
        prop_assert!(0.5 < u4 && u4 < m);
        prop_assert!(0.5 < u6 && u6 < u4);
    }

    #[test]
    fn stationarity_and_newton_agreement(mu in 0.0f64..=1.0, order in even_order()) {
        let closed = closed_form_transform(post(mu), order).value();
        let newton = newton_transform(post(mu), order, &SolverConfig::default()).unwrap().value();
        prop_assert!((closed - newton).abs() < 1e-9);
        let poly = gradient_coefficients(post(mu), order);
        prop_assert!(poly.eval(newton).abs() < 1e-10);
        prop_assert!((0.0..=1.0).contains(&newton));
    }

    #[test]
    fn odd_roots_match_closed_form(mu in 0.001f64..0.999, order in prop::sample::select(vec![3u32, 5, 7])) {
        // (1 - mu) y^n + mu (y - 1)^n = 0  <=>  y / (y - 1) = rho * w, w^n = -1
        let n = (order - 1) as usize;
        let rho = (mu / (1.0 - mu)).powf(1.0 / n as f64);
        let analysis = analyze_odd_order(post(mu), OddLossOrder::new(order).unwrap());
        prop_assert!(!analysis.has_valid_probability_root);
        prop_assert_eq!(analysis.roots.len(), n);
        for k in 0..n {
            let angle = std::f64::consts::PI * (2 * k + 1) as f64 / n as f64;
            let w = Complex64::from_polar(rho, angle);
            let expected = w / (w - 1.0);
            let nearest = analysis.roots.iter().map(|z| (z - expected).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(nearest < 1e-9, "root {} missing (nearest {})", expected, nearest);
        }
    }

    #[test]
    fn matrix_transform_preserves_rankings(seed in any::<u64>(), frames in 1usize..12, classes in 2usize..9) {
        let mut rng = common::rng(seed);
        let m = common::random_posteriors(&mut rng, frames, classes);
        for order in [LossOrder::FOURTH, LossOrder::SIXTH] {
            for renorm in [false, true] {
                let tm = transform_matrix(&m, order, renorm).unwrap();
                for f in 0..frames {
                    prop_assert_eq!(common::ranking(m.row(f)), common::ranking(tm.row(f)));
                }
            }
        }
    }

    #[test]
    fn renormalization_is_a_per_frame_shift(seed in any::<u64>(), frames in 1usize..10, classes in 2usize..6) {
        let mut rng = common::rng(seed);
        let m = common::random_posteriors(&mut rng, frames, classes);
        let on = to_log_scores(&transform_matrix(&m, LossOrder::SIXTH, true).unwrap(), None).unwrap();
        let off = to_log_scores(&transform_matrix(&m, LossOrder::SIXTH, false).unwrap(), None).unwrap();
        for f in 0..frames {
            let shift = off.get(f, 0) - on.get(f, 0);
            for c in 0..classes {
                prop_assert!((off.get(f, c) - on.get(f, c) - shift).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn viterbi_matches_exhaustive(seed in any::<u64>(), states in 1usize..5, frames in 1usize..7) {
        let mut rng = common::rng(seed);
        let classes = states.max(2);
        let hmm = common::random_hmm(&mut rng, states, classes);
        let scores = common::random_log_scores(&mut rng, frames, classes);
        let v = viterbi_decode(&scores, &hmm).unwrap();
        let e = exhaustive_decode(&scores, &hmm).unwrap();
        prop_assert_eq!(&v.state_path, &e.state_path);
        prop_assert!((v.log_score - e.log_score).abs() < 1e-9);
        prop_assert!((score_path(&v.state_path, &scores, &hmm).unwrap() - v.log_score).abs() < 1e-9);
    }

    #[test]
    fn frame_shift_invariance(seed in any::<u64>(), frame in 0usize..6, offset in -50.0f64..50.0) {
        let mut rng = common::rng(seed);
        let hmm = common::random_hmm(&mut rng, 3, 3);
        let mut scores = common::random_log_scores(&mut rng, 6, 3);
        let before = viterbi_decode(&scores, &hmm).unwrap().state_path;
        scores.shift_frame(frame, offset);
        prop_assert_eq!(before, viterbi_decode(&scores, &hmm).unwrap().state_path);
    }

    #[test]
    fn wer_distance_is_levenshtein(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let r = common::random_tokens(&mut rng, 20, 1);
        let h = common::random_tokens(&mut rng, 20, 0);
        let report = align_and_score(&r, &h).unwrap();
        prop_assert_eq!(report.errors(), common::levenshtein(&r, &h));
        prop_assert!(report.substitutions + report.deletions <= report.ref_length);
        prop_assert_eq!(report.ref_length + report.insertions - report.deletions, h.len());
    }

    #[test]
    fn pooled_wer_ignores_pair_order(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let pairs: Vec<(Vec<String>, Vec<String>)> = (0..6)
            .map(|_| (common::random_tokens(&mut rng, 8, 1), common::random_tokens(&mut rng, 8, 0)))
            .collect();
        let forward = corpus_wer(pairs.iter().map(|(r, h)| (&r[..], &h[..]))).unwrap();
        let backward = corpus_wer(pairs.iter().rev().map(|(r, h)| (&r[..], &h[..]))).unwrap();
        prop_assert_eq!(forward, backward);
    }
}

#[test]
fn brute_force_tracks_closed_form_on_coarse_grid() {
    for i in 0..=50 {
        let mu = i as f64 / 50.0;
        for order in [LossOrder::FOURTH, LossOrder::SIXTH] {
            let b = brute_force_transform(post(mu), order, 10_000).unwrap().value();
            assert!((b - t(mu, order)).abs() < 1e-3, "mu={mu} order={order}");
        }
    }
}
