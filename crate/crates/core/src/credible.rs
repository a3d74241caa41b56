//! Credible balls `{θ : d_q(θ, θ̂) ≤ r}` around the posterior median.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::posterior::{self, PosteriorSampler};
use crate::rng::Stream;
use crate::slab::ConvolvedDensity;

/// Minimum number of posterior draws for a quantile radius.
pub const MIN_QUANTILE_DRAWS: usize = 1000;

/// `d_q(a, b) = Σ |a_i − b_i|^q`.
pub fn dq_distance(a: &[f64], b: &[f64], q: f64) -> Result<f64> {
    posterior::validate_q(q)?;
    if a.len() != b.len() {
        return Err(Error::Input("vectors differ in length"));
    }
    Ok(a.iter().zip(b).map(|(x, y)| math::abs_pow(x - y, q)).sum())
}

/// `2^{q−1} ∨ 1`, the constant in `|x + y|^q ≤ c (|x|^q + |y|^q)`.
pub fn quasi_triangle_constant(q: f64) -> f64 {
    if q > 1.0 {
        math::powf(2.0, q - 1.0)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiusKind {
    /// `r = M v_{q,α}(X)`.
    Moment,
    /// `r` is the `(1 − β)` posterior quantile of `d_q(θ, θ̂)`, times `L`.
    Quantile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CredibleBall {
    pub q: f64,
    pub center: Vec<f64>,
    pub radius: f64,
    /// `M` for moment balls, the blow-up `L` for quantile balls.
    pub multiplier: f64,
    pub alpha_used: f64,
    pub kind: RadiusKind,
    /// Set for quantile balls only.
    pub beta: Option<f64>,
}

impl CredibleBall {
    /// Closed-ball membership.
    pub fn contains(&self, theta: &[f64]) -> Result<bool> {
        Ok(dq_distance(theta, &self.center, self.q)? <= self.radius)
    }

    /// `2 (2^{q−1} ∨ 1) r`, an upper bound on `d_q` between any two members.
    pub fn diameter_bound(&self) -> f64 {
        2.0 * quasi_triangle_constant(self.q) * self.radius
    }

    /// The same ball with its radius multiplied by `l`.
    pub fn inflated(&self, l: f64) -> Result<Self> {
        if !(l >= 1.0 && l.is_finite()) {
            return Err(Error::Config("inflation factor must be at least 1"));
        }
        Ok(Self { radius: self.radius * l, multiplier: self.multiplier * l, ..self.clone() })
    }
}

pub fn posterior_medians(g: &ConvolvedDensity, xs: &[f64], alpha: f64) -> Vec<f64> {
    xs.iter().map(|&x| posterior::posterior_median(g, x, alpha)).collect()
}

/// Ball with radius `M v_{q,α}(X)`; by Markov its posterior mass is at least
/// `1 − 1/M`.
pub fn build_moment_ball(g: &ConvolvedDensity, xs: &[f64], q: f64, m: f64, alpha: f64) -> Result<CredibleBall> {
    if !(m >= 1.0 && m.is_finite()) {
        return Err(Error::Config("multiplier M must be at least 1"));
    }
    let v = posterior::total_radius_q(g, xs, alpha, q)?;
    Ok(CredibleBall {
        q,
        center: posterior_medians(g, xs, alpha),
        radius: m * v,
        multiplier: m,
        alpha_used: alpha,
        kind: RadiusKind::Moment,
        beta: None,
    })
}

/// `d_q(θ^{(j)}, center)` for `draws` independent posterior draws.
///
/// Draw `j` of coordinate `i` uses the uniform pair at counter
/// `(i, j)` of `stream`, so the result does not depend on evaluation order.
pub fn posterior_draw_distances(
    g: &ConvolvedDensity,
    xs: &[f64],
    center: &[f64],
    alpha: f64,
    q: f64,
    draws: usize,
    stream: &Stream,
) -> Result<Vec<f64>> {
    posterior::validate_q(q)?;
    if xs.len() != center.len() {
        return Err(Error::Input("center and observations differ in length"));
    }
    let mut dist = alloc::vec![0.0; draws];
    for (i, (&x, &c)) in xs.iter().zip(center).enumerate() {
        let mut sampler = PosteriorSampler::new(g, x, alpha);
        let spike = math::abs_pow(c, q);
        if sampler.slab_weight() == 0.0 {
            for d in dist.iter_mut() {
                *d += spike;
            }
            continue;
        }
        for (j, d) in dist.iter_mut().enumerate() {
            let (u1, u2) = stream.uniform_pair_at(Stream::index2(i, j));
            let theta = sampler.sample(u1, u2);
            *d += if theta == 0.0 { spike } else { math::abs_pow(theta - c, q) };
        }
    }
    Ok(dist)
}

/// Smallest `r` with at least `⌈(1 − β) N⌉` of the `N` values at or below it.
pub fn empirical_quantile(values: &[f64], beta: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = math::ceil((1.0 - beta) * v.len() as f64) as usize;
    v[k.clamp(1, v.len()) - 1]
}

/// Ball whose radius is the `(1 − β)` posterior quantile of `d_q(θ, θ̂)`.
pub fn build_quantile_ball(
    g: &ConvolvedDensity,
    xs: &[f64],
    q: f64,
    beta: f64,
    alpha: f64,
    draws: usize,
    stream: &Stream,
) -> Result<CredibleBall> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Config("beta must lie in (0, 1)"));
    }
    if draws < MIN_QUANTILE_DRAWS {
        return Err(Error::Config("quantile radius needs at least 1000 posterior draws"));
    }
    let center = posterior_medians(g, xs, alpha);
    let dist = posterior_draw_distances(g, xs, &center, alpha, q, draws, stream)?;
    Ok(CredibleBall {
        q,
        center,
        radius: empirical_quantile(&dist, beta),
        multiplier: 1.0,
        alpha_used: alpha,
        kind: RadiusKind::Quantile,
        beta: Some(beta),
    })
}

/// Fraction of posterior draws inside `ball` and its standard error.
pub fn posterior_mass(
    g: &ConvolvedDensity,
    xs: &[f64],
    ball: &CredibleBall,
    draws: usize,
    stream: &Stream,
) -> Result<(f64, f64)> {
    if draws == 0 {
        return Err(Error::Config("posterior mass needs at least one draw"));
    }
    let dist = posterior_draw_distances(g, xs, &ball.center, ball.alpha_used, ball.q, draws, stream)?;
    let inside = dist.iter().filter(|&&d| d <= ball.radius).count() as f64;
    let p = inside / draws as f64;
    Ok((p, math::sqrt(p * (1.0 - p) / draws as f64)))
}
