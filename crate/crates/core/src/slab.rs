//! Slab densities and the noise-convolved marginal `g = φ * γ`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::quadrature::{GaussLegendre, Quadrature, QuadratureSpec};

/// Shape of the continuous slab component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlabFamily {
    /// `γ(u) = (δ/2) (1 + |u|)^{-1-δ}` for `δ ∈ (0, 2)`.
    HeavyTail,
    /// `γ(u) = 1 / (π (1 + u²))`.
    Cauchy,
    /// `γ(u) = exp(-|u|/b) / (2b)`.
    Laplace,
}

/// A symmetric unimodal slab density.
///
/// For every family `|d/du log γ(u)|` is bounded on `u > 0`: by `1 + δ` for
/// the heavy-tailed family, `1` for Cauchy and `1/b` for Laplace. The bound is
/// a property of the family and is not stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabModel {
    pub family: SlabFamily,
    /// Tail index of [`SlabFamily::HeavyTail`]; ignored otherwise.
    pub delta: f64,
    /// Laplace scale `b`; ignored otherwise.
    pub scale: f64,
    pub quadrature: QuadratureSpec,
}

impl SlabModel {
    pub fn heavy_tail(delta: f64) -> Result<Self> {
        let m = Self { family: SlabFamily::HeavyTail, delta, scale: 1.0, quadrature: QuadratureSpec::default() };
        m.validate()?;
        Ok(m)
    }

    pub fn cauchy() -> Self {
        Self { family: SlabFamily::Cauchy, delta: 1.0, scale: 1.0, quadrature: QuadratureSpec::default() }
    }

    pub fn laplace(scale: f64) -> Result<Self> {
        let m = Self { family: SlabFamily::Laplace, delta: 1.0, scale, quadrature: QuadratureSpec::default() };
        m.validate()?;
        Ok(m)
    }

    pub fn with_quadrature(mut self, spec: QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        self.quadrature = spec;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            SlabFamily::HeavyTail if !(self.delta > 0.0 && self.delta < 2.0) => {
                Err(Error::Config("heavy-tail slab requires delta in (0, 2)"))
            }
            SlabFamily::Laplace if !(self.scale > 0.0 && self.scale.is_finite()) => {
                Err(Error::Config("laplace slab requires a positive scale"))
            }
            _ => self.quadrature.validate(),
        }
    }

    /// Normalizing constant of the heavy-tailed family, `δ/2`.
    pub fn heavy_tail_normalizer(&self) -> f64 {
        0.5 * self.delta
    }

    #[inline]
    pub fn density(&self, u: f64) -> f64 {
        let a = u.abs();
        match self.family {
            SlabFamily::HeavyTail => {
                0.5 * self.delta * math::exp(-(1.0 + self.delta) * math::ln_1p(a))
            }
            SlabFamily::Cauchy => 1.0 / (core::f64::consts::PI * (1.0 + a * a)),
            SlabFamily::Laplace => math::exp(-a / self.scale) / (2.0 * self.scale),
        }
    }

    /// `∫_L^∞ γ(u) du` for `L ≥ 0`.
    pub fn tail_mass(&self, l: f64) -> f64 {
        let l = l.max(0.0);
        match self.family {
            SlabFamily::HeavyTail => 0.5 * math::exp(-self.delta * math::ln_1p(l)),
            SlabFamily::Cauchy => 0.5 - math::atan(l) / core::f64::consts::PI,
            SlabFamily::Laplace => 0.5 * math::exp(-l / self.scale),
        }
    }

    /// Panel breakpoints: the kink at 0 of the heavy-tailed and Laplace
    /// densities, and for Cauchy the real point closest to its poles at `±i`.
    pub fn breaks(&self) -> &'static [f64] {
        &[0.0]
    }

    /// Total mass: quadrature on `[-L, L]` plus the analytic tails.
    pub fn total_mass(&self, l: f64) -> f64 {
        let rule = GaussLegendre::new(self.quadrature.node_count);
        // Geometric panels keep the polynomial tail resolved.
        let mut acc = 0.0;
        let mut a = 0.0;
        let mut b: f64 = 1.0;
        while a < l {
            let hi = b.min(l);
            acc += rule.integrate(a, hi, |u| self.density(u));
            a = hi;
            b *= 2.0;
        }
        2.0 * (acc + self.tail_mass(l))
    }
}

/// `γ(u)` after validating the model.
pub fn density(slab: &SlabModel, u: f64) -> Result<f64> {
    slab.validate()?;
    Ok(slab.density(u))
}

/// `g(x) = ∫ φ(x − u) γ(u) du` by direct quadrature with an error check.
pub fn convolve(slab: &SlabModel, x: f64) -> Result<f64> {
    slab.validate()?;
    let quad = Quadrature::new(slab.quadrature)?;
    Ok(direct_values(slab, &quad, x, true)?.g)
}

/// `log g(x) − log φ(x)` by direct quadrature.
pub fn log_ratio(slab: &SlabModel, x: f64) -> Result<f64> {
    let g = convolve(slab, x)?;
    Ok(math::ln(g) + 0.5 * x * x + math::LN_SQRT_2PI)
}

/// `g`, `g'` and `g''` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvolutionValues {
    pub g: f64,
    pub dg: f64,
    pub d2g: f64,
}

fn direct_values(slab: &SlabModel, quad: &Quadrature, x: f64, check: bool) -> Result<ConvolutionValues> {
    let r = quad.spec.truncation_radius;
    let (lo, hi) = (x - r, x + r);
    let run = |rule: &GaussLegendre| {
        let mut acc = [0.0f64; 3];
        let mut a = lo;
        let mut push = |a: f64, b: f64| {
            for (u, wt) in rule.mapped(a, b) {
                let v = x - u;
                let w = wt * math::norm_pdf(v) * slab.density(u);
                acc[0] += w;
                acc[1] -= v * w;
                acc[2] += (v * v - 1.0) * w;
            }
        };
        for &k in slab.breaks() {
            if k > lo && k < hi {
                push(a, k);
                a = k;
            }
        }
        push(a, hi);
        acc
    };
    let full = run(&quad.full);
    if check {
        let half = run(&quad.half);
        let est = (full[0] - half[0]).abs() / full[0];
        if !(est <= quad.spec.relative_tolerance) || !(full[0] > 0.0) {
            return Err(Error::Quadrature { at: x, estimate: est });
        }
    }
    Ok(ConvolutionValues { g: full[0], dg: full[1], d2g: full[2] })
}

/// Tabulation settings for [`ConvolvedDensity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheSpec {
    pub step: f64,
    pub x_max: f64,
}

impl Default for CacheSpec {
    fn default() -> Self {
        Self { step: 0.01, x_max: 40.0 }
    }
}

/// `g = φ * γ` with a tabulated fast path.
///
/// `log g` and `(log g)'` are stored with their derivatives on a uniform grid
/// over `[0, x_max]` and reconstructed by cubic Hermite interpolation; beyond
/// `x_max` values come from direct quadrature. The table is built eagerly and
/// the value is immutable afterwards.
#[derive(Debug, Clone)]
pub struct ConvolvedDensity {
    slab: SlabModel,
    quad: Quadrature,
    cache: CacheSpec,
    // f = log g, f1 = g'/g, f2 = (log g)''
    f: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
}

#[inline]
fn hermite(y0: f64, d0: f64, y1: f64, d1: f64, h: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

impl ConvolvedDensity {
    pub fn new(slab: SlabModel) -> Result<Self> {
        Self::with_cache(slab, CacheSpec::default())
    }

    pub fn with_cache(slab: SlabModel, cache: CacheSpec) -> Result<Self> {
        slab.validate()?;
        if !(cache.step > 0.0 && cache.x_max > cache.step) {
            return Err(Error::Config("cache step must be positive and below x_max"));
        }
        let quad = Quadrature::new(slab.quadrature)?;
        let nodes = math::ceil(cache.x_max / cache.step) as usize + 1;
        let mut f = Vec::with_capacity(nodes);
        let mut f1 = Vec::with_capacity(nodes);
        let mut f2 = Vec::with_capacity(nodes);
        for k in 0..nodes {
            let x = k as f64 * cache.step;
            let v = direct_values(&slab, &quad, x, true)?;
            let d1 = v.dg / v.g;
            f.push(math::ln(v.g));
            // g is even, so g'(0) = 0 exactly.
            f1.push(if k == 0 { 0.0 } else { d1 });
            f2.push(v.d2g / v.g - d1 * d1);
        }
        let x_max = (nodes - 1) as f64 * cache.step;
        Ok(Self { slab, quad, cache: CacheSpec { step: cache.step, x_max }, f, f1, f2 })
    }

    pub fn slab(&self) -> &SlabModel {
        &self.slab
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quad
    }

    pub fn cache_spec(&self) -> CacheSpec {
        self.cache
    }

    /// Direct quadrature of `g`, `g'`, `g''` with the tolerance check.
    pub fn direct(&self, x: f64) -> Result<ConvolutionValues> {
        direct_values(&self.slab, &self.quad, x, true)
    }

    #[inline]
    fn locate(&self, a: f64) -> Option<(usize, f64)> {
        if a >= self.cache.x_max {
            return None;
        }
        let s = a / self.cache.step;
        let k = (s as usize).min(self.f.len() - 2);
        Some((k, s - k as f64))
    }

    /// `log g(x)`.
    pub fn ln_g(&self, x: f64) -> f64 {
        let a = x.abs();
        match self.locate(a) {
            Some((k, t)) => hermite(self.f[k], self.f1[k], self.f[k + 1], self.f1[k + 1], self.cache.step, t),
            None => math::ln(self.fallback(a).g),
        }
    }

    /// `g'(x) / g(x)`; odd in `x`.
    pub fn score_ln_g(&self, x: f64) -> f64 {
        let a = x.abs();
        let v = match self.locate(a) {
            Some((k, t)) => hermite(self.f1[k], self.f2[k], self.f1[k + 1], self.f2[k + 1], self.cache.step, t),
            None => {
                let v = self.fallback(a);
                v.dg / v.g
            }
        };
        if x < 0.0 {
            -v
        } else {
            v
        }
    }

    fn fallback(&self, a: f64) -> ConvolutionValues {
        // Tolerance was verified when the table was built; far points use the
        // same rule without the companion pass.
        direct_values(&self.slab, &self.quad, a, false).expect("unchecked quadrature cannot fail")
    }

    pub fn g(&self, x: f64) -> f64 {
        math::exp(self.ln_g(x))
    }

    /// `log(g/φ)(x)`, formed without evaluating `φ(x)` in a denominator.
    pub fn log_ratio(&self, x: f64) -> f64 {
        self.ln_g(x) + 0.5 * x * x + math::LN_SQRT_2PI
    }

    /// `(φ/g)(x) = 1/(1 + B(x))`, in `(0, (φ/g)(0)]`.
    pub fn phi_over_g(&self, x: f64) -> f64 {
        math::exp(-self.log_ratio(x))
    }
}
