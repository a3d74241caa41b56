//! Score transforms `B(x)`, `B(x, α)`, the thresholds `ζ`, `τ`, `t`, and the
//! moment diagnostics `m̃`, `m₁`, `m₂`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::posterior::{self, Tilted};
use crate::quadrature::GaussLegendre;
use crate::slab::ConvolvedDensity;

/// `B(x) = (g/φ)(x) − 1`.
pub fn score_b(g: &ConvolvedDensity, x: f64) -> f64 {
    math::exp_m1(g.log_ratio(x))
}

/// `B(x, α) = B(x) / (1 + α B(x))`, formed from `r = φ/g` so that it stays
/// finite as `g/φ` overflows.
pub fn score_b_alpha(g: &ConvolvedDensity, x: f64, alpha: f64) -> f64 {
    score_b_alpha_from_log_ratio(g.log_ratio(x), alpha)
}

/// [`score_b_alpha`] from a precomputed `log(g/φ)(x)`.
#[inline]
pub fn score_b_alpha_from_log_ratio(log_ratio: f64, alpha: f64) -> f64 {
    let r = math::exp(-log_ratio);
    let one_minus_r = -math::exp_m1(-log_ratio);
    let denom = alpha * one_minus_r + r;
    debug_assert!(denom > 0.0, "1 + α B(x) must be positive");
    one_minus_r / denom
}

/// Smallest `x ≥ 0` with `f(x) ≥ target` for increasing `f`, by bisection.
fn solve_increasing<F: Fn(f64) -> f64>(f: F, target: f64, hi0: f64) -> Result<f64> {
    if f(0.0) >= target {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = hi0.max(1.0);
    let mut expansions = 0;
    while f(hi) < target {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 20 || !hi.is_finite() {
            return Err(Error::Root("threshold bracket expansion failed"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn initial_bracket(alpha: f64) -> f64 {
    math::sqrt(2.0 * math::ln(1.0 / alpha).max(0.0)) + 10.0
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config("alpha must lie in (0, 1]"))
    }
}

/// `ζ(α)`: the root of `B(x) = 1/α` on `x ≥ 0`.
pub fn zeta_of(g: &ConvolvedDensity, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let target = math::ln_1p(1.0 / alpha);
    if g.log_ratio(0.0) >= target {
        return Err(Error::Config("1/alpha must exceed B(0)"));
    }
    solve_increasing(|x| g.log_ratio(x), target, initial_bracket(alpha))
}

/// `τ(α)`: the root of `a(x) = 1/2`, i.e. `(α/(1−α)) (g/φ)(x) = 1`; zero when
/// `a(0) ≥ 1/2`.
pub fn tau_raw(g: &ConvolvedDensity, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let target = math::ln((1.0 - alpha) / alpha);
    solve_increasing(|x| g.log_ratio(x), target, initial_bracket(alpha))
}

/// `α₀` with `τ(α₀) = 1`, in closed form `r(1)/(1 + r(1))` for `r = φ/g`.
pub fn alpha0(g: &ConvolvedDensity) -> f64 {
    let r = g.phi_over_g(1.0);
    r / (1.0 + r)
}

/// `τ̃(α) = τ(α ∧ α₀)`.
pub fn tau_of(g: &ConvolvedDensity, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    tau_raw(g, alpha.min(alpha0(g)))
}

/// `a(x) (1 − Γ_x(0))`: the posterior mass of `(0, ∞)`, increasing in `x ≥ 0`.
pub fn positive_mass(g: &ConvolvedDensity, x: f64, alpha: f64) -> f64 {
    posterior::slab_weight(g, x, alpha) * Tilted::new(g, x).upper(0.0)
}

/// `t(α)`: the largest `|x|` at which the posterior median is still zero,
/// characterized by `a(x) (1 − Γ_x(0)) = 1/2`.
pub fn t_of(g: &ConvolvedDensity, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    solve_increasing(|x| positive_mass(g, x, alpha), 0.5, initial_bracket(alpha))
}

/// `α_n` with `t(α_n) = √(2 log n)`.
///
/// Solving `a(x*) (1 − Γ_{x*}(0)) = 1/2` for `α` at the fixed point
/// `x* = √(2 log n)` is explicit: with `p = 1/(2 (1 − Γ_{x*}(0)))` and
/// `r = (φ/g)(x*)`, `α_n = p r / ((1 − p) + p r)`.
pub fn alpha_n(g: &ConvolvedDensity, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Input("alpha_n requires n >= 2"));
    }
    let x = math::sqrt(2.0 * math::ln(n as f64));
    let upper = Tilted::new(g, x).upper(0.0);
    if !(upper > 0.5) {
        return Err(Error::Root("alpha_n inversion failed"));
    }
    let p = 0.5 / upper;
    let r = g.phi_over_g(x);
    Ok(p * r / ((1.0 - p) + p * r))
}

/// `ζ(α)`, `τ̃(α)` and `t(α)` together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdTriple {
    pub alpha: f64,
    pub zeta: f64,
    pub tau: f64,
    pub t: f64,
}

impl ThresholdTriple {
    pub fn compute(g: &ConvolvedDensity, alpha: f64) -> Result<Self> {
        Ok(Self { alpha, zeta: zeta_of(g, alpha)?, tau: tau_of(g, alpha)?, t: t_of(g, alpha)? })
    }
}

/// `m̃(α) = −E₀ B(X, α)` and `m₁(μ, α) = E_μ B(X, α)`,
/// `m₂(μ, α) = E_μ B(X, α)²` on a list of signal values.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentDiagnostics {
    pub alpha: f64,
    pub m_tilde: f64,
    pub m1_at: Vec<(f64, f64)>,
    pub m2_at: Vec<(f64, f64)>,
}

/// `[E_μ B(X, α), E_μ B(X, α)²]` for `X ~ N(μ, 1)`.
///
/// Composite Gauss–Legendre on `[μ − 12, μ + 12]` with unit panels. `B` is
/// even, so the rule is applied at `|μ|` and `m₁` is exactly even in `μ`.
pub fn gaussian_expectations(g: &ConvolvedDensity, mu: f64, alpha: f64) -> [f64; 2] {
    let rule = GaussLegendre::new(16);
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for k in -12..12 {
        let (a, b) = (k as f64, (k + 1) as f64);
        for (z, w) in rule.mapped(a, b) {
            let b_val = score_b_alpha(g, mu.abs() + z, alpha);
            let d = w * math::norm_pdf(z);
            s1 += d * b_val;
            s2 += d * b_val * b_val;
        }
    }
    [s1, s2]
}

pub fn moments(g: &ConvolvedDensity, alpha: f64, mus: &[f64]) -> Result<MomentDiagnostics> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config("alpha must lie in (0, 1)"));
    }
    let m_tilde = -gaussian_expectations(g, 0.0, alpha)[0];
    let mut m1_at = Vec::with_capacity(mus.len());
    let mut m2_at = Vec::with_capacity(mus.len());
    for &mu in mus {
        let [m1, m2] = gaussian_expectations(g, mu, alpha);
        m1_at.push((mu, m1));
        m2_at.push((mu, m2));
    }
    Ok(MomentDiagnostics { alpha, m_tilde, m1_at, m2_at })
}

/// The `α̃` solving `d α m̃(α) = s/n`, for a user-supplied `d > 0`.
///
/// `α ↦ α m̃(α)` is increasing, so the root is found by bisection in
/// `log α` on `[1e-300, 1)`. Returns `None` when `s/n` is out of range.
pub fn alpha_tilde(g: &ConvolvedDensity, d: f64, s_over_n: f64) -> Option<f64> {
    if !(d > 0.0 && s_over_n > 0.0) {
        return None;
    }
    let h = |la: f64| {
        let a = math::exp(la);
        d * a * -gaussian_expectations(g, 0.0, a)[0] - s_over_n
    };
    let (mut lo, mut hi) = (-690.0_f64, math::ln(1.0 - 1e-9));
    if h(lo) > 0.0 || h(hi) < 0.0 {
        return None;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(math::exp(0.5 * (lo + hi)))
}
