//! Marginal maximum likelihood for the mixing weight.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::slab::ConvolvedDensity;
use crate::stats::KahanSum;
use crate::thresholds;

/// Outcome of [`fit_alpha`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmleResult {
    pub alpha_hat: f64,
    pub at_lower_boundary: bool,
    pub at_upper_boundary: bool,
    pub score_at_solution: f64,
    pub alpha_n: f64,
    pub iterations: usize,
}

/// `|S(α)| / n` below which the bisection stops.
pub const SCORE_TOLERANCE: f64 = 1e-10;
/// Width of the `α` bracket below which the bisection stops.
pub const ALPHA_TOLERANCE: f64 = 1e-14;

/// A dataset with `log(g/φ)(x_i)` precomputed, so every evaluation of the
/// likelihood or score costs one exponential per coordinate.
///
/// Values are held sorted, so every result depends on the data only through
/// its multiset of values, bit for bit.
#[derive(Debug, Clone)]
pub struct Marginal {
    log_ratio: Vec<f64>,
    log_phi_sum: f64,
}

impl Marginal {
    pub fn new(g: &ConvolvedDensity, xs: &[f64]) -> Self {
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut s = KahanSum::new();
        for &x in &sorted {
            s.add(math::norm_ln_pdf(x));
        }
        Self { log_ratio: sorted.iter().map(|&x| g.log_ratio(x)).collect(), log_phi_sum: s.value() }
    }

    pub fn len(&self) -> usize {
        self.log_ratio.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_ratio.is_empty()
    }

    /// `ℓ(α) = Σ log φ(x_i) + Σ log(1 + α B(x_i))`, with
    /// `log(1 + α B) = log((1 − α) φ/g + α) + log(g/φ)`.
    pub fn log_marginal(&self, alpha: f64) -> f64 {
        let mut s = KahanSum::new();
        s.add(self.log_phi_sum);
        if alpha <= 0.0 {
            return s.value();
        }
        for &lr in &self.log_ratio {
            let r = math::exp(-lr);
            s.add(math::ln((1.0 - alpha) * r + alpha) + lr);
        }
        s.value()
    }

    /// `S(α) = Σ B(x_i, α)`.
    pub fn score(&self, alpha: f64) -> f64 {
        let mut s = KahanSum::new();
        for &lr in &self.log_ratio {
            s.add(thresholds::score_b_alpha_from_log_ratio(lr, alpha));
        }
        s.value()
    }

    /// Root of the decreasing score on `[alpha_n, 1]`, or the boundary the
    /// score points to.
    pub fn fit(&self, alpha_n: f64) -> MmleResult {
        let n = self.len() as f64;
        let lower = self.score(alpha_n);
        let base = MmleResult {
            alpha_hat: alpha_n,
            at_lower_boundary: true,
            at_upper_boundary: false,
            score_at_solution: lower,
            alpha_n,
            iterations: 0,
        };
        if lower <= 0.0 {
            return base;
        }
        let upper = self.score(1.0);
        if upper >= 0.0 {
            return MmleResult {
                alpha_hat: 1.0,
                at_lower_boundary: false,
                at_upper_boundary: true,
                score_at_solution: upper,
                ..base
            };
        }
        // Bisection in log α keeps relative precision near small roots.
        let (mut lo, mut hi) = (math::ln(alpha_n), 0.0_f64);
        let mut mid_alpha = alpha_n;
        let mut s_mid = lower;
        let mut iterations = 0;
        while iterations < 400 {
            iterations += 1;
            let mid = 0.5 * (lo + hi);
            mid_alpha = math::exp(mid);
            s_mid = self.score(mid_alpha);
            if (s_mid / n).abs() < SCORE_TOLERANCE || math::exp(hi) - math::exp(lo) < ALPHA_TOLERANCE {
                break;
            }
            if s_mid > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        MmleResult {
            alpha_hat: mid_alpha,
            at_lower_boundary: false,
            at_upper_boundary: false,
            score_at_solution: s_mid,
            alpha_n,
            iterations,
        }
    }
}

pub fn log_marginal(g: &ConvolvedDensity, xs: &[f64], alpha: f64) -> f64 {
    Marginal::new(g, xs).log_marginal(alpha)
}

pub fn score(g: &ConvolvedDensity, xs: &[f64], alpha: f64) -> f64 {
    Marginal::new(g, xs).score(alpha)
}

/// `α̂ = argmax_{α ∈ [α_n, 1]} ℓ(α)` with `t(α_n) = √(2 log n)`.
pub fn fit_alpha(g: &ConvolvedDensity, xs: &[f64]) -> Result<MmleResult> {
    if xs.len() < 2 {
        return Err(Error::Input("fit requires at least two observations"));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Input("observations must be finite"));
    }
    let alpha_n = thresholds::alpha_n(g, xs.len())?;
    Ok(Marginal::new(g, xs).fit(alpha_n))
}
