//! Excessive-bias and testing conditions, and signal fixtures.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::rng::{CounterRng, Purpose};

/// Constants `(A, C_q, D_q)` of the `d_q` excessive-bias restriction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EbConstants {
    pub a: f64,
    pub c_q: f64,
    pub d_q: f64,
    pub q: f64,
}

impl EbConstants {
    pub fn new(a: f64, c_q: f64, d_q: f64, q: f64) -> Result<Self> {
        let c = Self { a, c_q, d_q, q };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 1.0) {
            return Err(Error::Config("excessive-bias constant A must exceed 1"));
        }
        if !(self.c_q > 0.0 && self.d_q > 0.0) {
            return Err(Error::Config("excessive-bias constants C_q and D_q must be positive"));
        }
        if !(self.q > 0.0 && self.q <= 2.0) {
            return Err(Error::Config("q must lie in (0, 2]"));
        }
        Ok(())
    }
}

/// Lower end of the `ℓ` scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EllFloor {
    /// `⌈(log₂ n)²⌉`.
    #[default]
    Log2Squared,
    /// `⌈(ln n)²⌉`.
    NaturalLogSquared,
    /// `1`.
    One,
}

impl EllFloor {
    pub fn value(self, n: usize) -> usize {
        let nf = n.max(1) as f64;
        let v = match self {
            EllFloor::Log2Squared => math::ceil(math::log2(nf) * math::log2(nf)),
            EllFloor::NaturalLogSquared => math::ceil(math::ln(nf) * math::ln(nf)),
            EllFloor::One => 1.0,
        };
        (v as usize).max(1)
    }
}

/// Outcome of [`check_eb`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EbReport {
    pub satisfied: bool,
    pub smallest_ell: Option<usize>,
    /// `s̃_q`: signals at or above `A √(2 log(n/ℓ))` at the smallest admissible `ℓ`.
    pub effective_sparsity: Option<usize>,
    /// Evaluated at `smallest_ell` when satisfied, else at the floor (capped at `s`).
    pub large_signal_count_at_ell: usize,
    pub small_signal_energy_at_ell: f64,
    pub ell_floor: usize,
}

/// Magnitudes sorted descending with suffix sums of `|θ|^q`.
struct SortedSignal {
    mags: Vec<f64>,
    // suffix[k] = Σ_{j ≥ k} mags[j]^q, summed from the smallest entry upwards.
    suffix: Vec<f64>,
}

impl SortedSignal {
    fn new(theta: &[f64], q: f64) -> Self {
        let mut mags: Vec<f64> = theta.iter().map(|x| x.abs()).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        let mut suffix = alloc::vec![0.0; mags.len() + 1];
        for k in (0..mags.len()).rev() {
            suffix[k] = suffix[k + 1] + math::abs_pow(mags[k], q);
        }
        Self { mags, suffix }
    }

    /// `(|{i : |θ_i| ≥ level}|, Σ_{|θ_i| < level} |θ_i|^q)`.
    fn split(&self, level: f64) -> (usize, f64) {
        let count = self.mags.partition_point(|&m| m >= level);
        (count, self.suffix[count])
    }
}

fn detection_level(a: f64, n: usize, ell: usize) -> f64 {
    a * math::sqrt(2.0 * math::ln(n as f64 / ell as f64))
}

/// Scans `ℓ = floor, …, s` for the smallest `ℓ` with
/// `Σ_{|θ_i| < A√(2 log(n/ℓ))} |θ_i|^q ≤ D_q ℓ log^{q/2}(n/ℓ)` and
/// `|{i : |θ_i| ≥ A√(2 log(n/ℓ))}| ≥ ℓ / C_q`.
pub fn check_eb(theta0: &[f64], s: usize, constants: &EbConstants, floor: EllFloor) -> Result<EbReport> {
    constants.validate()?;
    let n = theta0.len();
    if s > n {
        return Err(Error::Input("sparsity s exceeds the vector length"));
    }
    if theta0.iter().filter(|&&x| x != 0.0).count() > s {
        return Err(Error::Input("signal has more than s nonzero entries"));
    }
    let sorted = SortedSignal::new(theta0, constants.q);
    let ell_floor = floor.value(n);
    for ell in ell_floor..=s {
        let (count, energy) = sorted.split(detection_level(constants.a, n, ell));
        let log_term = math::ln(n as f64 / ell as f64);
        let budget = constants.d_q * ell as f64 * math::powf(log_term, 0.5 * constants.q);
        if energy <= budget && count as f64 >= ell as f64 / constants.c_q {
            return Ok(EbReport {
                satisfied: true,
                smallest_ell: Some(ell),
                effective_sparsity: Some(count),
                large_signal_count_at_ell: count,
                small_signal_energy_at_ell: energy,
                ell_floor,
            });
        }
    }
    let probe = ell_floor.min(s.max(1));
    let (count, energy) = sorted.split(detection_level(constants.a, n.max(1), probe));
    Ok(EbReport {
        satisfied: false,
        smallest_ell: None,
        effective_sparsity: None,
        large_signal_count_at_ell: count,
        small_signal_energy_at_ell: energy,
        ell_floor,
    })
}

/// `‖θ − ℓ₀[s₁]‖²`: the sum of squares of all but the `s₁` largest entries.
pub fn distance_to_sparse_sq(theta: &[f64], s1: usize) -> f64 {
    let sorted = SortedSignal::new(theta, 2.0);
    sorted.suffix[s1.min(sorted.mags.len())]
}

/// Membership in `𝒯[s₁, s₂; c] = {θ ∈ ℓ₀[s₂] : ‖θ − ℓ₀[s₁]‖² ≥ c (√n ∧ s₂ log n)}`.
pub fn check_testing_condition(theta0: &[f64], s1: usize, s2: usize, c: f64) -> Result<bool> {
    let n = theta0.len();
    if !(s1 <= s2 && s2 <= n) {
        return Err(Error::Input("testing condition requires s1 <= s2 <= n"));
    }
    if !(c > 0.0) {
        return Err(Error::Config("testing constant c must be positive"));
    }
    if theta0.iter().filter(|&&x| x != 0.0).count() > s2 {
        return Ok(false);
    }
    let nf = n as f64;
    let level = c * math::sqrt(nf).min(s2 as f64 * math::ln(nf));
    Ok(distance_to_sparse_sq(theta0, s1) >= level)
}

/// Dyadic pairs `(2^i, 2^{i+1})` for `i = 1, …, ⌊log₂ s⌋ − 1`.
pub fn dyadic_levels(s: usize) -> Vec<(usize, usize)> {
    if s < 4 {
        return Vec::new();
    }
    let top = (usize::BITS - 1 - s.leading_zeros()) as usize;
    (1..top).map(|i| (1usize << i, 1usize << (i + 1))).collect()
}

/// Membership in `𝒯_d[s; c]`, the union of `𝒯[2^i, 2^{i+1}; c]` over the dyadic levels.
pub fn in_dyadic_testing_set(theta0: &[f64], s: usize, c: f64) -> Result<bool> {
    for (s1, s2) in dyadic_levels(s) {
        if s2 <= theta0.len() && check_testing_condition(theta0, s1, s2, c)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Signal classes used as fixtures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignalKind {
    Zero,
    /// `s` entries at `amplitude · √(2 log(n/s))`.
    Flat { amplitude: f64 },
    /// `s` entries drawn uniformly in `[t/8, t/4]` for a threshold `t = t(α)`.
    Adversarial { t_alpha: f64 },
    /// `large` entries at `2A √(2 log(n/ℓ))` with `ℓ = large`, plus `s − large`
    /// entries below `A √(2 log(n/ℓ))` whose `|θ|^q` sum to `fill` times the
    /// budget `D_q ℓ log^{q/2}(n/ℓ)`.
    EbTail { a: f64, d_q: f64, q: f64, large: usize, fill: f64 },
    /// `s₁` entries at `A √(2 log(n/s₁))` and `s − s₁` at `c √(2 log(n/s))`.
    B0Construction { a: f64, c: f64, s1: usize },
}

/// A signal of the requested kind with exactly `s` nonzero entries (none for
/// [`SignalKind::Zero`]) at positions chosen by `seed`.
pub fn generate_signal(kind: SignalKind, n: usize, s: usize, seed: u64) -> Result<Vec<f64>> {
    if s > n {
        return Err(Error::Input("sparsity s exceeds the vector length"));
    }
    let mut theta = alloc::vec![0.0; n];
    if matches!(kind, SignalKind::Zero) || s == 0 {
        return Ok(theta);
    }
    let mut cursor = CounterRng::new(seed).stream(0, Purpose::Signal).cursor(0);
    let nf = n as f64;
    let values: Vec<f64> = match kind {
        SignalKind::Zero => unreachable!(),
        SignalKind::Flat { amplitude } => {
            let v = amplitude * math::sqrt(2.0 * math::ln(nf / s as f64));
            if !(v > 0.0) {
                return Err(Error::Input("flat signal amplitude must be positive"));
            }
            alloc::vec![v; s]
        }
        SignalKind::Adversarial { t_alpha } => {
            if !(t_alpha > 0.0) {
                return Err(Error::Input("adversarial signal needs a positive threshold"));
            }
            (0..s).map(|_| t_alpha * (0.125 + 0.125 * cursor.uniform())).collect()
        }
        SignalKind::EbTail { a, d_q, q, large, fill } => {
            if large == 0 || large > s || !(0.0..1.0).contains(&fill) || !(q > 0.0 && q <= 2.0) {
                return Err(Error::Input("infeasible excessive-bias tail parameters"));
            }
            let level = detection_level(a, n, large);
            let tail = s - large;
            let mut v = alloc::vec![2.0 * level; large];
            if tail > 0 {
                let budget = d_q * large as f64 * math::powf(math::ln(nf / large as f64), 0.5 * q);
                let each = math::powf(fill * budget / tail as f64, 1.0 / q);
                if !(each > 0.0 && each < level) {
                    return Err(Error::Input("tail entries would reach the detection level"));
                }
                v.extend(core::iter::repeat_n(each, tail));
            }
            v
        }
        SignalKind::B0Construction { a, c, s1 } => {
            if s1 == 0 || s1 > s {
                return Err(Error::Input("B0 construction requires 0 < s1 <= s"));
            }
            let big = a * math::sqrt(2.0 * math::ln(nf / s1 as f64));
            let small = c * math::sqrt(2.0 * math::ln(nf / s as f64));
            let mut v = alloc::vec![big; s1];
            v.extend(core::iter::repeat_n(small, s - s1));
            v
        }
    };
    // Partial Fisher-Yates: the first `s` slots of `order` are the support.
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..s {
        let j = k + cursor.below(n - k);
        order.swap(k, j);
    }
    for (k, v) in values.into_iter().enumerate() {
        theta[order[k]] = v;
    }
    Ok(theta)
}
