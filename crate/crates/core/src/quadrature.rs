//! Composite Gauss–Legendre quadrature.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Accuracy controls for every integral over the slab.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss–Legendre nodes per panel.
    pub node_count: usize,
    /// Half-width `R` of the window `[x − R, x + R]` kept around the Gaussian
    /// factor. `R = 10` leaves a neglected Gaussian mass of `1.5e-23`.
    pub truncation_radius: f64,
    /// Target relative error, checked against a rule with half the nodes.
    pub relative_tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { node_count: 200, truncation_radius: 10.0, relative_tolerance: 1e-9 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.node_count < 8 {
            return Err(Error::Config("quadrature node_count must be at least 8"));
        }
        if !(self.truncation_radius > 0.0 && self.truncation_radius.is_finite()) {
            return Err(Error::Config("quadrature truncation_radius must be positive"));
        }
        if !(self.relative_tolerance > 0.0) {
            return Err(Error::Config("quadrature relative_tolerance must be positive"));
        }
        Ok(())
    }
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5));
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
                }
                pp = nf * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * pp * pp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, w * half))
    }

    /// `∫_a^b f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Appends the nodes and weights of this rule mapped to `[a, b]`.
    ///
    /// `grading` clusters nodes towards endpoints that carry an algebraic
    /// singularity such as `|u − c|^q` via the substitution `u = a + (b−a) w³`.
    pub fn push_panel(&self, a: f64, b: f64, grading: Grading, out: &mut Vec<(f64, f64)>) {
        self.visit_panel(a, b, grading, |u, w| out.push((u, w)));
    }

    /// Calls `f(u, w)` for every mapped node of the panel; see [`Self::push_panel`].
    pub fn visit_panel<F: FnMut(f64, f64)>(&self, a: f64, b: f64, grading: Grading, mut f: F) {
        self.visit_inner(a, b, grading, &mut f);
    }

    fn visit_inner<F: FnMut(f64, f64)>(&self, a: f64, b: f64, grading: Grading, f: &mut F) {
        if b <= a {
            return;
        }
        match grading {
            Grading::None => {
                let half = 0.5 * (b - a);
                let mid = 0.5 * (a + b);
                for (x, w) in self.nodes.iter().zip(&self.weights) {
                    f(mid + half * x, w * half);
                }
            }
            Grading::Left => {
                let len = b - a;
                for (x, w) in self.nodes.iter().zip(&self.weights) {
                    let s = 0.5 * (x + 1.0);
                    let s2 = s * s;
                    f(a + len * s2 * s, 0.5 * w * 3.0 * len * s2);
                }
            }
            Grading::Right => {
                let len = b - a;
                for (x, w) in self.nodes.iter().zip(&self.weights) {
                    let s = 0.5 * (x + 1.0);
                    let s2 = s * s;
                    f(b - len * s2 * s, 0.5 * w * 3.0 * len * s2);
                }
            }
            Grading::Both => {
                let mid = 0.5 * (a + b);
                self.visit_inner(a, mid, Grading::Left, f);
                self.visit_inner(mid, b, Grading::Right, f);
            }
        }
    }
}

/// Which panel endpoints carry a weak singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grading {
    None,
    Left,
    Right,
    Both,
}

/// Splits `[lo, hi]` at the interior points of `breaks` and returns panels
/// tagged with the grading implied by `singular` points.
pub fn panels(lo: f64, hi: f64, breaks: &[f64], singular: &[f64]) -> Vec<(f64, f64, Grading)> {
    let mut cuts: Vec<f64> = Vec::with_capacity(breaks.len() + singular.len() + 2);
    cuts.push(lo);
    for &p in breaks.iter().chain(singular) {
        if p > lo && p < hi {
            cuts.push(p);
        }
    }
    cuts.push(hi);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    cuts.dedup();
    let is_singular = |p: f64| singular.contains(&p);
    cuts.windows(2)
        .map(|w| {
            let grading = match (is_singular(w[0]), is_singular(w[1])) {
                (false, false) => Grading::None,
                (true, false) => Grading::Left,
                (false, true) => Grading::Right,
                (true, true) => Grading::Both,
            };
            (w[0], w[1], grading)
        })
        .collect()
}

/// A full rule plus its half-size companion used for error estimates.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub spec: QuadratureSpec,
    pub full: GaussLegendre,
    pub half: GaussLegendre,
}

impl Quadrature {
    pub fn new(spec: QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec,
            full: GaussLegendre::new(spec.node_count),
            half: GaussLegendre::new(spec.node_count / 2),
        })
    }
}
