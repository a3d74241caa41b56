//! Per-coordinate posterior functionals.
//!
//! Given `X = x` and mixing weight `α`, a coordinate's posterior is
//! `(1 − a(x)) δ₀ + a(x) γ_x` with `γ_x(u) = φ(x − u) γ(u) / g(x)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::quadrature;
use crate::slab::ConvolvedDensity;
use crate::stats;

pub(crate) fn validate_q(q: f64) -> Result<()> {
    if q > 0.0 && q <= 2.0 {
        Ok(())
    } else {
        Err(Error::Config("q must lie in (0, 2]"))
    }
}

/// `a(x)` from `r = (φ/g)(x)`.
#[inline]
pub fn weight_from_ratio(r: f64, alpha: f64) -> f64 {
    if alpha <= 0.0 {
        0.0
    } else if alpha >= 1.0 {
        1.0
    } else {
        1.0 / (1.0 + (1.0 - alpha) / alpha * r)
    }
}

/// Posterior probability that the coordinate is drawn from the slab.
pub fn slab_weight(g: &ConvolvedDensity, x: f64, alpha: f64) -> f64 {
    if alpha <= 0.0 {
        return 0.0;
    }
    weight_from_ratio(g.phi_over_g(x), alpha)
}

/// Quadrature against the tilted density `γ_x` for one fixed `x`.
///
/// Every integral is restricted to `[x − R, x + R]` and normalized by the
/// same rule over the full window, so `cdf(+∞) = 1` up to rounding.
#[derive(Debug, Clone, Copy)]
pub struct Tilted<'g> {
    g: &'g ConvolvedDensity,
    x: f64,
    norm: f64,
}

impl<'g> Tilted<'g> {
    pub fn new(g: &'g ConvolvedDensity, x: f64) -> Self {
        let mut t = Self { g, x, norm: 1.0 };
        let r = t.radius();
        t.norm = t.raw(x - r, x + r, None, |_| [1.0])[0];
        t
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    fn radius(&self) -> f64 {
        self.g.quadrature().spec.truncation_radius
    }

    /// Unnormalized `∫_lo^hi f(u) φ(x − u) γ(u) du`, graded at `singular`.
    fn raw<const K: usize, F: FnMut(f64) -> [f64; K]>(
        &self,
        lo: f64,
        hi: f64,
        singular: Option<f64>,
        mut f: F,
    ) -> [f64; K] {
        let r = self.radius();
        let lo = lo.max(self.x - r);
        let hi = hi.min(self.x + r);
        let mut acc = [0.0; K];
        if !(hi > lo) {
            return acc;
        }
        let slab = self.g.slab();
        let rule = &self.g.quadrature().full;
        let sing: &[f64] = match singular {
            Some(ref c) => core::slice::from_ref(c),
            None => &[],
        };
        for (a, b, grading) in quadrature::panels(lo, hi, slab.breaks(), sing) {
            rule.visit_panel(a, b, grading, |u, w| {
                let d = w * math::norm_pdf(self.x - u) * slab.density(u);
                let v = f(u);
                for k in 0..K {
                    acc[k] += d * v[k];
                }
            });
        }
        acc
    }

    #[inline]
    pub fn density(&self, u: f64) -> f64 {
        math::norm_pdf(self.x - u) * self.g.slab().density(u) / self.norm
    }

    /// `∫_lo^hi γ_x`.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        (self.raw(lo, hi, None, |_| [1.0])[0] / self.norm).clamp(0.0, 1.0)
    }

    /// `Γ_x(u)`.
    pub fn cdf(&self, u: f64) -> f64 {
        self.mass(f64::NEG_INFINITY, u)
    }

    /// `1 − Γ_x(u)`, integrated directly.
    pub fn upper(&self, u: f64) -> f64 {
        self.mass(u, f64::INFINITY)
    }

    /// `∫ u γ_x(u) du`.
    pub fn mean(&self) -> f64 {
        self.raw(f64::NEG_INFINITY, f64::INFINITY, None, |u| [u])[0] / self.norm
    }

    /// `∫ |u − c|^q γ_x(u) du`.
    pub fn abs_moment(&self, q: f64, center: f64) -> f64 {
        self.abs_moments(q, center)[0]
    }

    /// `[∫ |u − c|^q γ_x, ∫ |u − c|^q u γ_x, ∫ u γ_x]`.
    pub fn abs_moments(&self, q: f64, center: f64) -> [f64; 3] {
        let singular = if q == 2.0 { None } else { Some(center) };
        let v = self.raw(f64::NEG_INFINITY, f64::INFINITY, singular, |u| {
            let p = math::abs_pow(u - center, q);
            [p, p * u, u]
        });
        [v[0] / self.norm, v[1] / self.norm, v[2] / self.norm]
    }
}

/// `Γ_x(u)`, the CDF of the tilted slab density.
pub fn tilted_cdf(g: &ConvolvedDensity, x: f64, u: f64) -> f64 {
    Tilted::new(g, x).cdf(u)
}

/// Posterior median of `(1 − a) δ₀ + a γ_x`.
///
/// Zero exactly when the atom straddles the half-mass point,
/// `a(x) (1 − Γ_{|x|}(0)) ≤ 1/2`; antisymmetric in `x`.
pub fn posterior_median(g: &ConvolvedDensity, x: f64, alpha: f64) -> f64 {
    let ax = x.abs();
    let a = slab_weight(g, ax, alpha);
    if ax == 0.0 || a == 0.0 {
        return 0.0;
    }
    let tilted = Tilted::new(g, ax);
    let target = 0.5 / a;
    let mut upper = tilted.upper(0.0);
    if upper <= target {
        return 0.0;
    }
    // The median of γ_x lies in [0, x] for x ≥ 0, so U(x) ≤ 1/2 ≤ target.
    let (mut lo, mut hi) = (0.0, ax);
    let mut m = 0.5 * ax;
    upper = tilted.upper(m);
    for _ in 0..200 {
        if upper > target {
            lo = m;
        } else {
            hi = m;
        }
        let dens = tilted.density(m);
        let newton = m + (upper - target) / dens;
        let next = if dens > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let done = (next - m).abs() <= 1e-13 * m.max(1.0) || hi - lo <= 1e-14 * hi.max(1.0);
        m = next;
        if done {
            break;
        }
        upper = tilted.upper(m);
    }
    if x < 0.0 {
        -m
    } else {
        m
    }
}

/// Posterior mean `a(x) (x + g'(x)/g(x))`; antisymmetric in `x`.
pub fn posterior_mean(g: &ConvolvedDensity, x: f64, alpha: f64) -> f64 {
    let a = slab_weight(g, x, alpha);
    if a == 0.0 {
        return 0.0;
    }
    a * (x + g.score_ln_g(x))
}

/// `r_q(α, c, x) = (1 − a) |c|^q + a ∫ |u − c|^q γ_x(u) du`.
pub fn coordinate_radius_q(g: &ConvolvedDensity, x: f64, alpha: f64, q: f64, center: f64) -> f64 {
    let a = slab_weight(g, x, alpha);
    let spike = (1.0 - a) * math::abs_pow(center, q);
    if a == 0.0 {
        return spike;
    }
    spike + a * Tilted::new(g, x).abs_moment(q, center)
}

/// `v_{q,α}(X)`: posterior expected `d_q` distance to the posterior median.
pub fn total_radius_q(g: &ConvolvedDensity, xs: &[f64], alpha: f64, q: f64) -> Result<f64> {
    validate_q(q)?;
    let parts: Vec<f64> =
        xs.iter().map(|&x| coordinate_radius_q(g, x, alpha, q, posterior_median(g, x, alpha))).collect();
    Ok(stats::pairwise_sum(&parts))
}

/// `v_{q,α}` split by signal support and by `|X_i|` against the threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RadiusParts {
    /// Signal coordinates with `|X_i| ≤ t(α)`.
    pub signal_below: f64,
    /// Signal coordinates with `|X_i| > t(α)`.
    pub signal_above: f64,
    /// Null coordinates with `|X_i| ≤ t(α)`.
    pub null_below: f64,
    /// Null coordinates with `|X_i| > t(α)`.
    pub null_above: f64,
}

impl RadiusParts {
    pub fn total(&self) -> f64 {
        (self.signal_below + self.signal_above) + (self.null_below + self.null_above)
    }
}

/// Decomposes `v_{q,α}` over the four index classes for a known truth
/// `theta0` and threshold `t`.
pub fn radius_decomposition(
    g: &ConvolvedDensity,
    xs: &[f64],
    theta0: &[f64],
    alpha: f64,
    q: f64,
    t: f64,
) -> Result<RadiusParts> {
    validate_q(q)?;
    if xs.len() != theta0.len() {
        return Err(Error::Input("observation and signal lengths differ"));
    }
    let mut buckets: [Vec<f64>; 4] = Default::default();
    for (&x, &th) in xs.iter().zip(theta0) {
        let m = posterior_median(g, x, alpha);
        // Below the threshold the median is zero and the loss reduces to a ω_q(x).
        let r = if x.abs() <= t {
            slab_weight(g, x, alpha) * Tilted::new(g, x).abs_moment(q, 0.0)
        } else {
            coordinate_radius_q(g, x, alpha, q, m)
        };
        let k = match (th != 0.0, x.abs() > t) {
            (true, false) => 0,
            (true, true) => 1,
            (false, false) => 2,
            (false, true) => 3,
        };
        buckets[k].push(r);
    }
    Ok(RadiusParts {
        signal_below: stats::pairwise_sum(&buckets[0]),
        signal_above: stats::pairwise_sum(&buckets[1]),
        null_below: stats::pairwise_sum(&buckets[2]),
        null_above: stats::pairwise_sum(&buckets[3]),
    })
}

/// Summary of one coordinate's posterior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinatePosterior {
    pub x: f64,
    pub alpha: f64,
    pub slab_weight: f64,
    pub median: f64,
    pub mean: f64,
}

impl CoordinatePosterior {
    pub fn new(g: &ConvolvedDensity, x: f64, alpha: f64) -> Self {
        Self {
            x,
            alpha,
            slab_weight: slab_weight(g, x, alpha),
            median: posterior_median(g, x, alpha),
            mean: posterior_mean(g, x, alpha),
        }
    }

    /// Posterior mass of the atom at zero.
    pub fn spike_mass(&self) -> f64 {
        1.0 - self.slab_weight
    }
}

/// Tabulated `ω_q(x) = ∫ |u|^q γ_x(u) du` for a fixed `q`.
///
/// `ω_q` is even in `x`; values and derivatives
/// `ω' = ∫|u|^q u γ_x − ω ∫u γ_x` are stored on `[0, x_max]` and
/// interpolated by cubic Hermite polynomials.
#[derive(Debug, Clone)]
pub struct MomentTable<'g> {
    g: &'g ConvolvedDensity,
    q: f64,
    step: f64,
    x_max: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl<'g> MomentTable<'g> {
    pub fn new(g: &'g ConvolvedDensity, q: f64) -> Result<Self> {
        Self::with_grid(g, q, 0.01, 15.0)
    }

    pub fn with_grid(g: &'g ConvolvedDensity, q: f64, step: f64, x_max: f64) -> Result<Self> {
        validate_q(q)?;
        if !(step > 0.0 && x_max > step) {
            return Err(Error::Config("moment table step must be positive and below x_max"));
        }
        let nodes = math::ceil(x_max / step) as usize + 1;
        let mut values = Vec::with_capacity(nodes);
        let mut slopes = Vec::with_capacity(nodes);
        for k in 0..nodes {
            let x = k as f64 * step;
            let [w, wu, mean] = Tilted::new(g, x).abs_moments(q, 0.0);
            values.push(w);
            slopes.push(if k == 0 { 0.0 } else { wu - w * mean });
        }
        Ok(Self { g, q, step, x_max: (nodes - 1) as f64 * step, values, slopes })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn omega(&self, x: f64) -> f64 {
        let a = x.abs();
        if a >= self.x_max {
            return Tilted::new(self.g, a).abs_moment(self.q, 0.0);
        }
        let s = a / self.step;
        let k = (s as usize).min(self.values.len() - 2);
        let t = s - k as f64;
        let (t2, t3) = (t * t, t * t * t);
        let h = self.step;
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.values[k]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[k]
            + (-2.0 * t3 + 3.0 * t2) * self.values[k + 1]
            + (t3 - t2) * h * self.slopes[k + 1]
    }

    /// [`coordinate_radius_q`] using the table when `center = 0`.
    pub fn coordinate_radius(&self, x: f64, alpha: f64, center: f64) -> f64 {
        if center == 0.0 {
            slab_weight(self.g, x, alpha) * self.omega(x)
        } else {
            coordinate_radius_q(self.g, x, alpha, self.q, center)
        }
    }
}

/// Inverse-CDF sampler for one coordinate's posterior.
///
/// The slab part uses a table of `Γ_x` on cells of width `h` aligned so that
/// `0` is a cell boundary, with cell masses from a 4-point Gauss–Legendre rule
/// and a piecewise-constant density inside each cell. The table is built on
/// the first slab draw.
#[derive(Debug, Clone)]
pub struct PosteriorSampler<'g> {
    g: &'g ConvolvedDensity,
    x: f64,
    weight: f64,
    step: f64,
    table: Option<CdfTable>,
}

#[derive(Debug, Clone)]
struct CdfTable {
    first_cell: i64,
    cum: Vec<f64>,
}

/// Cell width of the sampling table.
pub const SAMPLER_STEP: f64 = 0.01;

impl<'g> PosteriorSampler<'g> {
    pub fn new(g: &'g ConvolvedDensity, x: f64, alpha: f64) -> Self {
        Self { g, x, weight: slab_weight(g, x, alpha), step: SAMPLER_STEP, table: None }
    }

    pub fn slab_weight(&self) -> f64 {
        self.weight
    }

    fn build(&self) -> CdfTable {
        let h = self.step;
        let r = self.g.quadrature().spec.truncation_radius;
        let first = math::floor((self.x - r) / h) as i64;
        let last = math::ceil((self.x + r) / h) as i64;
        let rule = quadrature::GaussLegendre::new(4);
        let slab = self.g.slab();
        let mut cum = Vec::with_capacity((last - first + 1) as usize);
        cum.push(0.0);
        let mut acc = stats::KahanSum::new();
        for k in first..last {
            let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
            acc.add(rule.integrate(a, b, |u| math::norm_pdf(self.x - u) * slab.density(u)));
            cum.push(acc.value());
        }
        CdfTable { first_cell: first, cum }
    }

    /// Draw from the slab part `γ_x` given a uniform `u ∈ (0, 1)`.
    pub fn sample_slab(&mut self, u: f64) -> f64 {
        if self.table.is_none() {
            self.table = Some(self.build());
        }
        let table = self.table.as_ref().expect("table built above");
        let total = *table.cum.last().expect("non-empty table");
        let target = u * total;
        let idx = table.cum.partition_point(|&c| c <= target).clamp(1, table.cum.len() - 1);
        let k = idx - 1;
        let (c0, c1) = (table.cum[k], table.cum[k + 1]);
        let frac = if c1 > c0 { ((target - c0) / (c1 - c0)).clamp(0.0, 1.0) } else { 0.5 };
        ((table.first_cell + k as i64) as f64 + frac) * self.step
    }

    /// Draw from the posterior: slab when `u_select < a(x)`, zero otherwise.
    pub fn sample(&mut self, u_select: f64, u_slab: f64) -> f64 {
        if u_select < self.weight {
            self.sample_slab(u_slab)
        } else {
            0.0
        }
    }
}
