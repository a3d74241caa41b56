mod common;

use common::densities;
use ebslab_core::posterior::{self, Tilted};
use ebslab_core::sparsity::{self, EbConstants, EllFloor, SignalKind};
use ebslab_core::{credible, mmle, thresholds};
use proptest::prelude::*;

fn slab_index() -> impl Strategy<Value = usize> {
    0..densities().len()
}

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn slab_weight_sandwich(k in slab_index(), x in -30.0..30.0f64, alpha in log_uniform(1e-6, 0.99)) {
        let g = &densities()[k];
        let a = posterior::slab_weight(g, x, alpha);
        let ratio = g.log_ratio(x).exp();
        let lower = alpha * ratio / ratio.max(1.0);
        let upper = (alpha / (1.0 - alpha) * ratio).min(1.0);
        prop_assert!(lower <= a * (1.0 + 1e-12), "a={a} lower={lower}");
        prop_assert!(a <= upper * (1.0 + 1e-12), "a={a} upper={upper}");
        // 1 − a ≤ φ / (α g); forming 1 − a in floating point costs one ulp of 1.
        prop_assert!(1.0 - a <= (1.0 / (alpha * ratio)) * (1.0 + 1e-12) + f64::EPSILON);
    }

    #[test]
    fn median_and_mean_are_odd_shrinkers(k in slab_index(), x in -25.0..25.0f64, alpha in log_uniform(1e-5, 0.9)) {
        let g = &densities()[k];
        let m = posterior::posterior_median(g, x, alpha);
        prop_assert_eq!(posterior::posterior_median(g, -x, alpha), -m);
        prop_assert!(m.abs() <= x.abs());
        let mean = posterior::posterior_mean(g, x, alpha);
        prop_assert!((mean + posterior::posterior_mean(g, -x, alpha)).abs() <= 1e-12 * x.abs().max(1.0));
    }

    #[test]
    fn log_ratio_is_even_and_increasing(k in slab_index(), x in 0.0..40.0f64, h in 1e-3..5.0f64) {
        let g = &densities()[k];
        prop_assert_eq!(g.log_ratio(x), g.log_ratio(-x));
        prop_assert!(g.log_ratio(x) < g.log_ratio(x + h));
    }

    #[test]
    fn quasi_triangle_inequality(
        a in prop::collection::vec(-10.0..10.0f64, 6),
        b in prop::collection::vec(-10.0..10.0f64, 6),
        c in prop::collection::vec(-10.0..10.0f64, 6),
        q in 0.05..=2.0f64,
    ) {
        let lhs = credible::dq_distance(&a, &c, q).unwrap();
        let rhs = credible::dq_distance(&a, &b, q).unwrap() + credible::dq_distance(&b, &c, q).unwrap();
        prop_assert!(lhs <= credible::quasi_triangle_constant(q) * rhs * (1.0 + 1e-12));
        prop_assert_eq!(credible::dq_distance(&a, &b, q).unwrap(), credible::dq_distance(&b, &a, q).unwrap());
    }

    #[test]
    fn tilted_moment_bounds(k in slab_index(), x in -30.0..30.0f64, c in -30.0..30.0f64, q in 0.1..=2.0f64) {
        // Empirical constants calibrated on a grid of x, c in [-30, 30].
        let (lower, upper) = (0.25, 3.0);
        let v = Tilted::new(&densities()[k], x).abs_moment(q, c);
        let scale = 1.0 + (x - c).abs().powf(q);
        prop_assert!(v >= lower * scale && v <= upper * scale, "v={v} scale={scale}");
    }

    #[test]
    fn generated_signals_have_declared_sparsity(n in 50usize..400, frac in 0.01..0.5f64, seed in any::<u64>()) {
        let s = ((n as f64 * frac) as usize).max(1);
        for kind in [
            SignalKind::Flat { amplitude: 1.5 },
            SignalKind::Adversarial { t_alpha: 3.0 },
            SignalKind::B0Construction { a: 1.5, c: 0.5, s1: s.div_ceil(2) },
        ] {
            let theta = sparsity::generate_signal(kind, n, s, seed).unwrap();
            prop_assert_eq!(theta.len(), n);
            prop_assert_eq!(theta.iter().filter(|&&v| v != 0.0).count(), s);
        }
        let zero = sparsity::generate_signal(SignalKind::Zero, n, s, seed).unwrap();
        prop_assert!(zero.iter().all(|&v| v == 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 50, ..ProptestConfig::default() })]

    #[test]
    fn median_thresholds_exactly_at_t(k in slab_index(), alpha in log_uniform(1e-6, 0.3)) {
        let g = &densities()[k];
        let t = thresholds::t_of(g, alpha).unwrap();
        for i in 0..=20 {
            let x = 0.99 * t * (i as f64 / 10.0 - 1.0);
            prop_assert_eq!(posterior::posterior_median(g, x, alpha), 0.0, "x={}, t={}", x, t);
        }
        for i in 0..=10 {
            let x = t * (1.01 + 0.2 * i as f64);
            prop_assert!(posterior::posterior_median(g, x, alpha) > 0.0, "x={}, t={}", x, t);
            prop_assert!(posterior::posterior_median(g, -x, alpha) < 0.0);
        }
    }

    #[test]
    fn score_decreases_in_alpha(
        k in slab_index(),
        xs in prop::collection::vec(-6.0..6.0f64, 5..40),
        a1 in log_uniform(1e-4, 0.5),
        ratio in 1.001..1.9f64,
    ) {
        let m = mmle::Marginal::new(&densities()[k], &xs);
        prop_assert!(m.score(a1) > m.score(a1 * ratio));
    }

    #[test]
    fn mmle_is_permutation_invariant(
        k in slab_index(),
        xs in prop::collection::vec(-8.0..8.0f64, 2..60),
        seed in any::<u64>(),
    ) {
        let g = &densities()[k];
        let mut shuffled = xs.clone();
        let mut cursor = ebslab_core::rng::CounterRng::new(seed).stream(0, ebslab_core::rng::Purpose::Other).cursor(0);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, cursor.below(i + 1));
        }
        prop_assert_eq!(mmle::fit_alpha(g, &xs).unwrap(), mmle::fit_alpha(g, &shuffled).unwrap());
    }

    #[test]
    fn mmle_result_invariants(k in slab_index(), xs in prop::collection::vec(-8.0..8.0f64, 2..80)) {
        let fit = mmle::fit_alpha(&densities()[k], &xs).unwrap();
        prop_assert!(fit.alpha_hat >= fit.alpha_n && fit.alpha_hat <= 1.0);
        let n = xs.len() as f64;
        if fit.at_lower_boundary {
            prop_assert!(fit.score_at_solution <= 0.0);
        } else if fit.at_upper_boundary {
            prop_assert!(fit.score_at_solution >= 0.0);
        } else {
            let converged = (fit.score_at_solution / n).abs() < mmle::SCORE_TOLERANCE;
            prop_assert!(converged || fit.iterations > 0);
        }
    }
}

/// Random EB(q) fixture within a feasible range of parameters.
fn eb_tail_fixture() -> impl Strategy<Value = (Vec<f64>, usize, EbConstants)> {
    (2000usize..6000, 0.2..2.0f64, 1.1..2.0f64, 0.5..2.0f64, 0.0..0.95f64, 0.0..1.0f64, any::<u64>()).prop_filter_map(
        "infeasible fixture",
        |(n, q, a, d_q, fill, extra, seed)| {
            let floor = EllFloor::Log2Squared.value(n);
            let large = floor + (extra * floor as f64) as usize;
            let s = large + (extra * 3.0 * large as f64) as usize;
            let kind = SignalKind::EbTail { a, d_q, q, large, fill };
            let theta = sparsity::generate_signal(kind, n, s, seed).ok()?;
            Some((theta, s, EbConstants::new(a, 1.0, d_q, q).unwrap()))
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 60, ..ProptestConfig::default() })]

    #[test]
    fn eb_q_implies_eb_2_with_sandwiched_sparsity((theta, s, c) in eb_tail_fixture()) {
        let rep_q = sparsity::check_eb(&theta, s, &c, EllFloor::default()).unwrap();
        prop_assert!(rep_q.satisfied);
        let d2 = c.d_q * (std::f64::consts::SQRT_2 * c.a).powf(2.0 - c.q);
        let c2 = EbConstants::new(c.a, c.c_q, d2, 2.0).unwrap();
        let rep_2 = sparsity::check_eb(&theta, s, &c2, EllFloor::default()).unwrap();
        prop_assert!(rep_2.satisfied);
        let (s_tilde, s_tilde_q) = (rep_2.effective_sparsity.unwrap(), rep_q.effective_sparsity.unwrap());
        // Empirical sandwich constant c₀ = 10.
        prop_assert!(s_tilde <= s_tilde_q && s_tilde_q <= 10 * s_tilde, "{} {}", s_tilde, s_tilde_q);
    }

    #[test]
    fn eb_is_monotone_in_constants((theta, s, c) in eb_tail_fixture(), kc in 1.0..4.0f64, kd in 1.0..4.0f64) {
        let base = sparsity::check_eb(&theta, s, &c, EllFloor::default()).unwrap();
        let looser = EbConstants::new(c.a, c.c_q * kc, c.d_q * kd, c.q).unwrap();
        let rep = sparsity::check_eb(&theta, s, &looser, EllFloor::default()).unwrap();
        prop_assert!(!base.satisfied || rep.satisfied);
        prop_assert!(rep.smallest_ell <= base.smallest_ell);
    }

    #[test]
    fn eb_report_invariants((theta, s, c) in eb_tail_fixture()) {
        let rep = sparsity::check_eb(&theta, s, &c, EllFloor::default()).unwrap();
        let ell = rep.smallest_ell.unwrap();
        prop_assert!(ell >= rep.ell_floor && ell <= s);
        let n = theta.len() as f64;
        let level = c.a * (2.0 * (n / ell as f64).ln()).sqrt();
        let count = theta.iter().filter(|v| v.abs() >= level).count();
        let energy: f64 = theta.iter().filter(|v| v.abs() < level).map(|v| v.abs().powf(c.q)).sum();
        prop_assert_eq!(rep.effective_sparsity, Some(count));
        prop_assert!(count as f64 >= ell as f64 / c.c_q);
        prop_assert!(energy <= c.d_q * ell as f64 * (n / ell as f64).ln().powf(c.q / 2.0) * (1.0 + 1e-12));
    }
}

