#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ebslab_core::{SlabFamily, SlabModel};
use rand::Rng;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ebslab"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn ebslab")
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Value of `key` in a `key = value` report.
pub fn report_value<'a>(report: &'a str, key: &str) -> Option<&'a str> {
    report.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix(" = "))
}

pub fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Φ from statrs, independent of the library's erfc.
pub fn big_phi(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

pub fn slab_pdf(slab: &SlabModel, u: f64) -> f64 {
    match slab.family {
        SlabFamily::HeavyTail => 0.5 * slab.delta * (1.0 + u.abs()).powf(-1.0 - slab.delta),
        SlabFamily::Cauchy => 1.0 / (std::f64::consts::PI * (1.0 + u * u)),
        SlabFamily::Laplace => (-u.abs() / slab.scale).exp() / (2.0 * slab.scale),
    }
}

pub fn simpson(lo: f64, hi: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (hi - lo) / panels as f64;
    let mut s = f(lo) + f(hi);
    for k in 1..panels {
        s += f(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `∫ φ(x − u) γ(u) du` by Simpson on `[x − 14, x + 14]`, split at 0.
pub fn brute_g(slab: &SlabModel, x: f64) -> f64 {
    let f = |u: f64| phi(x - u) * slab_pdf(slab, u);
    let (lo, hi) = (x - 14.0, x + 14.0);
    if lo < 0.0 && hi > 0.0 {
        simpson(lo, 0.0, 20_000, f) + simpson(0.0, hi, 20_000, f)
    } else {
        simpson(lo, hi, 40_000, f)
    }
}

/// Posterior draws for one coordinate: the atom with probability `1 − a`,
/// otherwise `N(x, 1)` proposals accepted with probability `γ(u)/γ(0)`.
pub struct RejectionSampler {
    slab: SlabModel,
    x: f64,
    a: f64,
    peak: f64,
}

impl RejectionSampler {
    pub fn new(slab: SlabModel, x: f64, alpha: f64) -> Self {
        let g = brute_g(&slab, x);
        let a = alpha * g / (alpha * g + (1.0 - alpha) * phi(x));
        Self { slab, x, a, peak: slab_pdf(&slab, 0.0) }
    }

    pub fn slab_weight(&self) -> f64 {
        self.a
    }

    pub fn draw(&self, rng: &mut impl Rng) -> f64 {
        if rng.gen::<f64>() >= self.a {
            return 0.0;
        }
        loop {
            let u = self.x + rng.sample::<f64, _>(rand_distr::StandardNormal);
            if rng.gen::<f64>() * self.peak <= slab_pdf(&self.slab, u) {
                return u;
            }
        }
    }
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}
