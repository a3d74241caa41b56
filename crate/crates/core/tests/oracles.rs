mod common;

use common::{brute_g, densities, slab_pdf};
use ebslab_core::credible::{self, CredibleBall};
use ebslab_core::posterior::{self, Tilted};
use ebslab_core::rng::{CounterRng, Purpose, Stream};
use ebslab_core::{mmle, simulation, stats, thresholds, ConvolvedDensity, SlabModel};

#[test]
fn heavy_tail_marginal_matches_brute_force() {
    let slab = SlabModel::heavy_tail(0.5).unwrap();
    let g = ConvolvedDensity::new(slab).unwrap();
    for &x in &[0.0, 0.7, 3.0, 8.0, 20.0, 33.0] {
        let want = brute_g(&slab, x);
        assert!((g.g(x) / want - 1.0).abs() < 1e-8, "x={x}: {} vs {want}", g.g(x));
    }
    let tail = g.g(20.0) / slab_pdf(&slab, 20.0);
    assert!(tail > 0.5 && tail < 2.0, "{tail}");
}

#[test]
fn marginal_is_even_and_log_ratio_anchored() {
    for g in densities() {
        for &x in &[0.3, 1.0, 5.0, 17.5] {
            assert_eq!(g.g(x), g.g(-x));
        }
        let want = g.g(0.0).ln() + 0.5 * (2.0 * std::f64::consts::PI).ln();
        assert!((g.log_ratio(0.0) - want).abs() < 1e-12);
        let grid: Vec<f64> = (0..=10).map(|k| g.log_ratio(k as f64)).collect();
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn ratio_at_zero_is_below_one_for_every_family() {
    for g in densities() {
        assert!(g.log_ratio(0.0) < 0.0, "{:?}", g.slab().family);
    }
}

#[test]
fn zeta_bracket_and_ordering() {
    // (δ, −log₁₀ α, ζ) from 30-digit adaptive quadrature and secant root finding.
    let reference = [
        (0.2, 1, 3.300_448_938_887_49),
        (0.2, 2, 3.964_956_040_818_414),
        (0.2, 8, 6.667_092_213_264_578),
        (0.5, 4, 4.959_230_911_533_777),
        (1.0, 1, 3.081_745_589_150_303),
        (1.0, 8, 6.665_406_192_930_775),
    ];
    for (delta, k, zeta) in reference {
        let g = ConvolvedDensity::new(SlabModel::heavy_tail(delta).unwrap()).unwrap();
        let z = thresholds::zeta_of(&g, 10f64.powi(-k)).unwrap();
        assert!((z - zeta).abs() <= 1e-8 * zeta, "delta={delta} k={k} zeta={z}");
    }
    for &delta in &[0.2, 0.5, 1.0] {
        let g = ConvolvedDensity::new(SlabModel::heavy_tail(delta).unwrap()).unwrap();
        for k in 1..=8 {
            let alpha = 10f64.powi(-k);
            let tr = thresholds::ThresholdTriple::compute(&g, alpha).unwrap();
            assert!(tr.tau <= tr.t && tr.t <= tr.zeta, "{tr:?}");
            let gap = tr.zeta * tr.zeta - 2.0 * (1.0 / alpha).ln();
            let upper = (1.0 + delta) * (1.0 / alpha).ln().ln() + 5.0;
            // The bracket is asymptotic; at δ = 0.2, α = 0.1 the gap sits just above it.
            let expect_inside = !(delta == 0.2 && k == 1);
            assert_eq!((-5.0..=upper).contains(&gap), expect_inside, "delta={delta} alpha={alpha} gap={gap}");
        }
    }
}

#[test]
fn thresholds_are_nonincreasing_in_alpha() {
    for g in densities() {
        let triples: Vec<_> =
            (0..30).map(|k| thresholds::ThresholdTriple::compute(g, 10f64.powf(-8.0 + 0.25 * k as f64)).unwrap()).collect();
        for w in triples.windows(2) {
            assert!(w[1].zeta <= w[0].zeta && w[1].tau <= w[0].tau && w[1].t <= w[0].t);
        }
    }
}

#[test]
fn moment_diagnostics_follow_their_asymptotics() {
    let delta = 0.5;
    let g = ConvolvedDensity::new(SlabModel::heavy_tail(delta).unwrap()).unwrap();
    for &alpha in &[1e-2, 1e-4] {
        let d = thresholds::moments(&g, alpha, &[0.5, -0.5, 2.0, -2.0]).unwrap();
        assert!(d.m_tilde >= 0.0);
        assert_eq!(d.m1_at[0].1, d.m1_at[1].1);
        assert_eq!(d.m1_at[2].1, d.m1_at[3].1);
    }
    // m̃(α) δ ζ(α)^δ stays in a constant window.
    let scaled: Vec<f64> = [1e-3, 1e-4, 1e-5]
        .iter()
        .map(|&a| {
            let m = thresholds::moments(&g, a, &[]).unwrap().m_tilde;
            m * delta * thresholds::zeta_of(&g, a).unwrap().powf(delta)
        })
        .collect();
    let (lo, hi) = scaled.iter().fold((f64::MAX, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    assert!(lo > 0.0 && hi / lo < 2.0, "{scaled:?}");

    // α m₁(ζ(α), α) approaches 1/2 monotonically.
    let trend: Vec<f64> = [1e-3, 1e-4, 1e-5, 1e-6]
        .iter()
        .map(|&a| a * thresholds::gaussian_expectations(&g, thresholds::zeta_of(&g, a).unwrap(), a)[0])
        .collect();
    let dist: Vec<f64> = trend.iter().map(|v| (v - 0.5).abs()).collect();
    assert!(dist.windows(2).all(|w| w[1] < w[0]), "{trend:?}");
    assert!(dist[3] < 0.1, "{trend:?}");
}

#[test]
fn moment_diagnostics_global_bounds() {
    // B(x, α) ∈ [−1/(1−α), 1/α): m₁ < 1/α, and m₂ is below the larger end squared.
    for g in densities() {
        for &alpha in &[1e-6f64, 1e-3, 0.1, 0.4, 0.8] {
            let cap = (1.0 / alpha).max(1.0 / (1.0 - alpha));
            for k in 0..=30 {
                let [m1, m2] = thresholds::gaussian_expectations(g, k as f64, alpha);
                assert!(m1 <= 1.0 / alpha && m2 <= cap * cap, "alpha={alpha} mu={k}");
            }
        }
    }
}

#[test]
fn radius_examples() {
    let g = &densities()[1];
    assert_eq!(posterior::coordinate_radius_q(g, 1.3, 0.0, 1.0, 0.0), 0.0);
    let xs = [0.4, -3.0, 7.5];
    let total = posterior::total_radius_q(g, &xs, 0.1, 1.5).unwrap();
    let parts: f64 = xs
        .iter()
        .map(|&x| posterior::coordinate_radius_q(g, x, 0.1, 1.5, posterior::posterior_median(g, x, 0.1)))
        .sum();
    assert_eq!(total, parts);
    let zeros = [0.0; 50];
    assert!(posterior::total_radius_q(g, &zeros, 1e-12, 2.0).unwrap() < 1e-10);
}

#[test]
fn radius_upper_bound_with_calibrated_constant() {
    // (1 − a)|c|^q + C a (|x − c|^q + 1) with C = 3, calibrated on the tilted-moment grid.
    for g in densities() {
        for &(x, alpha, q, c) in &[(0.0, 0.5, 1.0, 0.0), (4.0, 0.05, 2.0, 3.0), (-9.0, 0.01, 0.5, -8.0), (2.0, 0.3, 1.5, 0.0)] {
            let a = posterior::slab_weight(g, x, alpha);
            let r = posterior::coordinate_radius_q(g, x, alpha, q, c);
            let bound = (1.0 - a) * f64::abs(c).powf(q) + 3.0 * a * ((x - c).abs().powf(q) + 1.0);
            assert!(r <= bound, "r={r} bound={bound}");
        }
    }
}

#[test]
fn radius_decomposes_over_four_index_classes() {
    let g = &densities()[0];
    let n = 400;
    let theta0: Vec<f64> = (0..n).map(|i| if i < 20 { 1.0 + 0.4 * i as f64 } else { 0.0 }).collect();
    let noise = CounterRng::new(5).stream(0, Purpose::Noise);
    let xs: Vec<f64> = theta0.iter().enumerate().map(|(i, t)| t + noise.normal_at(i as u64)).collect();
    let (alpha, q) = (0.05, 2.0);
    let t = thresholds::t_of(g, alpha).unwrap();
    let parts = posterior::radius_decomposition(g, &xs, &theta0, alpha, q, t).unwrap();
    let total = posterior::total_radius_q(g, &xs, alpha, q).unwrap();
    assert!((parts.total() - total).abs() <= 1e-12 * total);
    assert!(parts.signal_below > 0.0 && parts.signal_above > 0.0 && parts.null_below > 0.0);
}

#[test]
fn shrinkage_is_bounded_by_the_threshold() {
    for g in densities() {
        let alpha = 0.01;
        let t = thresholds::t_of(g, alpha).unwrap();
        for k in 0..=400 {
            let x = 0.1 * k as f64;
            let m = posterior::posterior_median(g, x, alpha);
            assert!(x - m <= t + 1e-9, "x={x} m={m} t={t}");
        }
    }
}

fn noise_vector(n: usize, seed: u64, rep: u32) -> Vec<f64> {
    let s = CounterRng::new(seed).stream(rep, Purpose::Noise);
    (0..n).map(|i| s.normal_at(i as u64)).collect()
}

#[test]
fn score_vanishes_at_the_zero_of_b() {
    let g = &densities()[2];
    // B(x0) = 0 at the unique x0 > 0 with log(g/φ)(x0) = 0.
    let (mut lo, mut hi) = (0.0, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g.log_ratio(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let xs = [lo, -lo, lo, lo];
    for &alpha in &[1e-3, 0.2, 0.9] {
        assert!(mmle::score(g, &xs, alpha).abs() < 1e-12);
    }
}

#[test]
fn null_data_fits_the_lower_boundary() {
    let g = &densities()[1];
    let hits = (0..100).filter(|&r| mmle::fit_alpha(g, &noise_vector(2000, 11, r)).unwrap().at_lower_boundary).count();
    assert!(hits >= 90, "{hits}");
}

#[test]
fn fitted_alpha_grows_with_sparsity() {
    let g = &densities()[1];
    let n = 2000;
    let level = 10.0 * (2.0 * (n as f64).ln()).sqrt();
    let mean_alpha = |s: usize| {
        (0..10)
            .map(|r| {
                let mut xs = noise_vector(n, 12, r);
                xs.iter_mut().take(s).for_each(|x| *x += level);
                let fit = mmle::fit_alpha(g, &xs).unwrap();
                assert!(!fit.at_lower_boundary && !fit.at_upper_boundary);
                fit.alpha_hat
            })
            .sum::<f64>()
            / 10.0
    };
    let (a, b, c) = (mean_alpha(50), mean_alpha(100), mean_alpha(200));
    assert!(a < b && b < c, "{a} {b} {c}");
}

#[test]
fn mmle_matches_grid_argmax() {
    let g = &densities()[0];
    for r in 0..10 {
        let mut xs = noise_vector(300, 13, r);
        xs.iter_mut().take(5 + 3 * r as usize).for_each(|x| *x += 4.0);
        let fit = mmle::fit_alpha(g, &xs).unwrap();
        let m = mmle::Marginal::new(g, &xs);
        let k = 4000;
        let step = -fit.alpha_n.ln() / k as f64;
        let best = (0..=k)
            .map(|j| (fit.alpha_n.ln() + j as f64 * step).exp())
            .max_by(|a, b| m.log_marginal(*a).total_cmp(&m.log_marginal(*b)))
            .unwrap();
        assert!((best.ln() - fit.alpha_hat.ln()).abs() <= step * (1.0 + 1e-9), "rep {r}: {best} vs {}", fit.alpha_hat);
    }
}

#[test]
fn moment_ball_mass_respects_markov() {
    let g = &densities()[0];
    let mut xs = noise_vector(200, 14, 0);
    xs.iter_mut().take(10).for_each(|x| *x += 5.0);
    let alpha = 0.06;
    let stream = CounterRng::new(14).stream(0, Purpose::PosteriorDraw);
    let draws = 10_000;
    for &m in &[2.0, 5.0, 20.0] {
        let ball = credible::build_moment_ball(g, &xs, 2.0, m, alpha).unwrap();
        let (p, se) = credible::posterior_mass(g, &xs, &ball, draws, &stream).unwrap();
        assert!(p >= 1.0 - 1.0 / m - 3.0 * se.max(1.0 / draws as f64), "M={m}: {p} ± {se}");
    }
}

#[test]
fn sampled_members_respect_the_diameter_bound() {
    let g = &densities()[3];
    let xs = noise_vector(60, 15, 0);
    let alpha = 0.1;
    let ball = credible::build_moment_ball(g, &xs, 0.5, 5.0, alpha).unwrap();
    let bound = ball.diameter_bound();
    let stream = CounterRng::new(15).stream(0, Purpose::PosteriorDraw);
    let mut members: Vec<Vec<f64>> = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        let mut sampler = posterior::PosteriorSampler::new(g, x, alpha);
        for j in 0..400 {
            let (u1, u2) = stream.uniform_pair_at(Stream::index2(i, j));
            if i == 0 {
                members.push(Vec::with_capacity(xs.len()));
            }
            members[j].push(sampler.sample(u1, u2));
        }
    }
    let inside: Vec<&Vec<f64>> = members.iter().filter(|m| ball.contains(m).unwrap()).collect();
    assert!(inside.len() > 200);
    for pair in inside.windows(2) {
        assert!(credible::dq_distance(pair[0], pair[1], 0.5).unwrap() <= bound);
    }
}

#[test]
fn quantile_ball_is_deterministic_under_a_seed() {
    let g = &densities()[1];
    let xs = noise_vector(80, 16, 0);
    let stream = CounterRng::new(16).stream(0, Purpose::PosteriorDraw);
    let a = credible::build_quantile_ball(g, &xs, 1.0, 0.1, 0.2, 1000, &stream).unwrap();
    let b = credible::build_quantile_ball(g, &xs, 1.0, 0.1, 0.2, 1000, &stream).unwrap();
    assert_eq!(a, b);
    let inflated: CredibleBall = a.inflated(2.0).unwrap();
    assert_eq!(inflated.radius, 2.0 * a.radius);
}

#[test]
fn tilted_cdf_is_a_distribution_function() {
    for g in densities() {
        for &x in &[-6.0, 0.0, 2.5] {
            let t = Tilted::new(g, x);
            assert!(t.cdf(x - 12.0) < 1e-12 && (t.cdf(x + 12.0) - 1.0).abs() < 1e-12);
            assert!((t.cdf(0.3) + t.upper(0.3) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn wilson_interval_reference() {
    // 90 of 100 at z = 1.96: published interval (0.8256, 0.9448).
    let (lo, hi) = stats::wilson_interval(90, 100, 1.96);
    assert!((lo - 0.8256).abs() < 1e-4 && (hi - 0.9448).abs() < 1e-4, "{lo} {hi}");
    assert_eq!(stats::wilson_interval(0, 10, 1.96).0, 0.0);
}

#[test]
fn oracle_alpha_formula() {
    let a = simulation::oracle_alpha(2000, 60, 0.2);
    let want = 60.0 * (2000f64 / 60.0).ln().powf(0.1) / 2000.0;
    assert!((a - want).abs() < 1e-15);
}
