#![allow(dead_code)]

use std::sync::OnceLock;

use ebslab_core::{ConvolvedDensity, SlabModel};

pub fn slabs() -> [SlabModel; 5] {
    [
        SlabModel::heavy_tail(0.2).unwrap(),
        SlabModel::heavy_tail(0.5).unwrap(),
        SlabModel::heavy_tail(1.0).unwrap(),
        SlabModel::cauchy(),
        SlabModel::laplace(1.0).unwrap(),
    ]
}

/// Convolved densities for [`slabs`], built once per test binary.
pub fn densities() -> &'static [ConvolvedDensity] {
    static CELL: OnceLock<Vec<ConvolvedDensity>> = OnceLock::new();
    CELL.get_or_init(|| slabs().into_iter().map(|s| ConvolvedDensity::new(s).unwrap()).collect())
}

/// Slab density written out independently of the library.
pub fn slab_pdf(slab: &SlabModel, u: f64) -> f64 {
    use ebslab_core::SlabFamily::*;
    match slab.family {
        HeavyTail => 0.5 * slab.delta * (1.0 + u.abs()).powf(-1.0 - slab.delta),
        Cauchy => 1.0 / (std::f64::consts::PI * (1.0 + u * u)),
        Laplace => (-u.abs() / slab.scale).exp() / (2.0 * slab.scale),
    }
}

fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Composite Simpson over `[lo, hi]` with `panels` (even) panels.
pub fn simpson(lo: f64, hi: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (hi - lo) / panels as f64;
    let mut s = f(lo) + f(hi);
    for k in 1..panels {
        s += f(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `∫ φ(x − u) γ(u) du` by Simpson on `[x − 14, x + 14]`, split at the slab's kink.
pub fn brute_g(slab: &SlabModel, x: f64) -> f64 {
    let f = |u: f64| phi(x - u) * slab_pdf(slab, u);
    let (lo, hi) = (x - 14.0, x + 14.0);
    if lo < 0.0 && hi > 0.0 {
        simpson(lo, 0.0, 20_000, f) + simpson(0.0, hi, 20_000, f)
    } else {
        simpson(lo, hi, 40_000, f)
    }
}
