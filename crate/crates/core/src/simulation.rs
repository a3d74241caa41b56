//! Monte Carlo replicates of the fit-and-cover pipeline.
//!
//! An experiment fixes a truth `θ₀`, then each replicate draws
//! `X = θ₀ + ε`, chooses `α`, builds the credible ball around the posterior
//! median and records coverage, radius and risks. A replicate is a pure
//! function of `(config, replicate index)`, so replicates can run in any order
//! and aggregate identically.

use alloc::vec::Vec;

use crate::credible::{self, RadiusKind};
use crate::error::{Error, Result};
use crate::math;
use crate::mmle;
use crate::posterior::{self, MomentTable};
use crate::rng::{CounterRng, Purpose};
use crate::slab::{ConvolvedDensity, SlabModel};
use crate::sparsity::{self, SignalKind};
use crate::stats::{self, KahanSum};
use crate::thresholds;

/// Normal quantile for the reported Wilson intervals.
pub const WILSON_Z: f64 = 1.96;

/// How each replicate picks the mixing weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaRule {
    Mmle,
    Fixed(f64),
    /// `multiplier · s log^{δ/2}(n/s) / n`, capped at 1.
    Oracle { multiplier: f64 },
}

/// `s log^{δ/2}(n/s) / n`.
pub fn oracle_alpha(n: usize, s: usize, delta: f64) -> f64 {
    let (nf, sf) = (n as f64, s as f64);
    sf * math::powf(math::ln(nf / sf), 0.5 * delta) / nf
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub s: usize,
    pub q: f64,
    pub slab: SlabModel,
    pub signal: SignalKind,
    pub alpha_rule: AlphaRule,
    /// Radius multipliers `M`; one coverage summary per entry. Empty means `1/β`.
    pub multipliers: Vec<f64>,
    pub beta: f64,
    pub radius_kind: RadiusKind,
    /// Posterior draws per replicate for quantile radii.
    pub posterior_draws: usize,
    pub replicates: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.slab.validate()?;
        posterior::validate_q(self.q)?;
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1"));
        }
        if self.n < 2 || self.s > self.n {
            return Err(Error::Config("need n >= 2 and s <= n"));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Config("beta must lie in (0, 1)"));
        }
        if self.multipliers.iter().any(|&m| !(m >= 1.0 && m.is_finite())) {
            return Err(Error::Config("multipliers must be at least 1"));
        }
        match self.alpha_rule {
            AlphaRule::Fixed(a) if !(a > 0.0 && a <= 1.0) => {
                return Err(Error::Config("fixed alpha must lie in (0, 1]"))
            }
            AlphaRule::Oracle { multiplier } if !(multiplier > 0.0) => {
                return Err(Error::Config("oracle multiplier must be positive"))
            }
            AlphaRule::Oracle { .. } if self.s == 0 => {
                return Err(Error::Config("oracle alpha requires s >= 1"))
            }
            _ => {}
        }
        if self.radius_kind == RadiusKind::Quantile && self.posterior_draws < credible::MIN_QUANTILE_DRAWS {
            return Err(Error::Config("quantile radius needs at least 1000 posterior draws"));
        }
        Ok(())
    }

    pub fn effective_multipliers(&self) -> Vec<f64> {
        if self.multipliers.is_empty() {
            alloc::vec![1.0 / self.beta]
        } else {
            self.multipliers.clone()
        }
    }

    /// True when `s < (log n)²`, outside the regime the theory covers.
    pub fn below_sparsity_floor(&self) -> bool {
        let l = math::ln(self.n as f64);
        (self.s as f64) < l * l
    }

    fn tail_index(&self) -> f64 {
        match self.slab.family {
            crate::slab::SlabFamily::HeavyTail => self.slab.delta,
            _ => 1.0,
        }
    }

    pub fn alpha_for(&self, _: &[f64]) -> Option<f64> {
        match self.alpha_rule {
            AlphaRule::Mmle => None,
            AlphaRule::Fixed(a) => Some(a),
            AlphaRule::Oracle { multiplier } => {
                Some((multiplier * oracle_alpha(self.n, self.s, self.tail_index())).min(1.0))
            }
        }
    }
}

/// One replicate's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub alpha_hat: f64,
    /// `v_{q,α}(X)` for moment balls, `r_β` for quantile balls.
    pub radius: f64,
    /// `d_q(θ₀, θ̂)`.
    pub distance: f64,
    /// One flag per multiplier.
    pub covered: Vec<bool>,
    /// `Σ_i r_q(α, θ_{0,i}, X_i)`.
    pub risk_q: f64,
    pub point_risk_median: f64,
    pub point_risk_mean: f64,
}

/// Coverage for one multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageSummary {
    pub multiplier: f64,
    pub covered: usize,
    pub trials: usize,
    pub coverage_rate: f64,
    pub wilson: (f64, f64),
    pub mean_diameter_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub summaries: Vec<CoverageSummary>,
    pub mean_radius: f64,
    pub mean_posterior_risk_q: f64,
    pub mean_point_risk_median: f64,
    pub mean_point_risk_mean: f64,
    pub mean_alpha_hat: f64,
    /// Replicates aborted by a numerical error.
    pub failures: usize,
    pub below_sparsity_floor: bool,
    pub records: Vec<ReplicateRecord>,
}

impl ExperimentResult {
    /// Coverage of the first multiplier.
    pub fn coverage_rate(&self) -> f64 {
        self.summaries.first().map_or(f64::NAN, |s| s.coverage_rate)
    }

    pub fn mean_to_median_risk_ratio(&self) -> f64 {
        self.mean_point_risk_mean / self.mean_point_risk_median
    }
}

/// Everything shared across replicates: the convolved density and the truth.
#[derive(Debug, Clone)]
pub struct ExperimentSetup {
    pub config: ExperimentConfig,
    pub density: ConvolvedDensity,
    pub theta0: Vec<f64>,
}

impl ExperimentSetup {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let density = ConvolvedDensity::new(config.slab)?;
        let theta0 = sparsity::generate_signal(config.signal, config.n, config.s, config.seed)?;
        Ok(Self { config, density, theta0 })
    }

    pub fn runner(&self) -> Result<Runner<'_>> {
        Ok(Runner { setup: self, table: MomentTable::new(&self.density, self.config.q)?, rng: CounterRng::new(self.config.seed) })
    }
}

/// Per-experiment state needed to evaluate replicates.
#[derive(Debug, Clone)]
pub struct Runner<'s> {
    setup: &'s ExperimentSetup,
    table: MomentTable<'s>,
    rng: CounterRng,
}

impl<'s> Runner<'s> {
    pub fn setup(&self) -> &ExperimentSetup {
        self.setup
    }

    /// Observations of replicate `r`.
    pub fn observations(&self, r: usize) -> Vec<f64> {
        let noise = self.rng.stream(r as u32, Purpose::Noise);
        self.setup.theta0.iter().enumerate().map(|(i, &t)| t + noise.normal_at(i as u64)).collect()
    }

    pub fn replicate(&self, r: usize) -> Result<ReplicateRecord> {
        let cfg = &self.setup.config;
        let g = &self.setup.density;
        let q = cfg.q;
        let theta0 = &self.setup.theta0;
        let xs = self.observations(r);
        let alpha = match cfg.alpha_for(&xs) {
            Some(a) => a,
            None => mmle::fit_alpha(g, &xs)?.alpha_hat,
        };
        let t = thresholds::t_of(g, alpha)?;
        // Below t the median is zero; evaluate the exact rule only near and above it.
        let skip = t * (1.0 - 1e-9);
        let medians: Vec<f64> = xs
            .iter()
            .map(|&x| if x.abs() < skip { 0.0 } else { posterior::posterior_median(g, x, alpha) })
            .collect();
        let means: Vec<f64> = xs.iter().map(|&x| posterior::posterior_mean(g, x, alpha)).collect();

        let radius = match cfg.radius_kind {
            RadiusKind::Moment => {
                let parts: Vec<f64> =
                    xs.iter().zip(&medians).map(|(&x, &m)| self.table.coordinate_radius(x, alpha, m)).collect();
                stats::pairwise_sum(&parts)
            }
            RadiusKind::Quantile => {
                let stream = self.rng.stream(r as u32, Purpose::PosteriorDraw);
                let dist =
                    credible::posterior_draw_distances(g, &xs, &medians, alpha, q, cfg.posterior_draws, &stream)?;
                credible::empirical_quantile(&dist, cfg.beta)
            }
        };
        let distance = credible::dq_distance(theta0, &medians, q)?;
        let covered = cfg.effective_multipliers().iter().map(|&m| distance <= m * radius).collect();
        let risks: Vec<f64> =
            xs.iter().zip(theta0).map(|(&x, &t0)| self.table.coordinate_radius(x, alpha, t0)).collect();
        Ok(ReplicateRecord {
            replicate: r,
            alpha_hat: alpha,
            radius,
            distance,
            covered,
            risk_q: stats::pairwise_sum(&risks),
            point_risk_median: distance,
            point_risk_mean: credible::dq_distance(theta0, &means, q)?,
        })
    }
}

/// Aggregates per-replicate outcomes listed in replicate order.
pub fn aggregate(config: &ExperimentConfig, outcomes: Vec<Result<ReplicateRecord>>) -> ExperimentResult {
    let multipliers = config.effective_multipliers();
    let failures = outcomes.iter().filter(|o| o.is_err()).count();
    let records: Vec<ReplicateRecord> = outcomes.into_iter().filter_map(|o| o.ok()).collect();
    let k = records.len();
    let mean = |f: &dyn Fn(&ReplicateRecord) -> f64| {
        let mut s = KahanSum::new();
        for r in &records {
            s.add(f(r));
        }
        if k == 0 {
            f64::NAN
        } else {
            s.value() / k as f64
        }
    };
    let mean_radius = mean(&|r| r.radius);
    let diameter_factor = 2.0 * credible::quasi_triangle_constant(config.q);
    let summaries = multipliers
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            let covered = records.iter().filter(|r| r.covered[j]).count();
            CoverageSummary {
                multiplier: m,
                covered,
                trials: k,
                coverage_rate: if k == 0 { f64::NAN } else { covered as f64 / k as f64 },
                wilson: stats::wilson_interval(covered, k, WILSON_Z),
                mean_diameter_bound: diameter_factor * m * mean_radius,
            }
        })
        .collect();
    ExperimentResult {
        summaries,
        mean_radius,
        mean_posterior_risk_q: mean(&|r| r.risk_q),
        mean_point_risk_median: mean(&|r| r.point_risk_median),
        mean_point_risk_mean: mean(&|r| r.point_risk_mean),
        mean_alpha_hat: mean(&|r| r.alpha_hat),
        failures,
        below_sparsity_floor: config.below_sparsity_floor(),
        records,
    }
}

/// Runs every replicate sequentially.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let setup = ExperimentSetup::new(config.clone())?;
    let runner = setup.runner()?;
    let outcomes = (0..config.replicates).map(|r| runner.replicate(r)).collect();
    Ok(aggregate(config, outcomes))
}

/// Coverage and radius study.
pub fn run_coverage(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run(config)
}

/// Integrated posterior risk and point risks; the same replicates as
/// [`run_coverage`].
pub fn run_risk(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run(config)
}

/// Posterior mean against posterior median at `θ₀ = 0` for `q < 1`.
pub fn run_mean_suboptimality(config: &ExperimentConfig) -> Result<ExperimentResult> {
    if !(config.q < 1.0) {
        return Err(Error::Config("mean suboptimality study requires q < 1"));
    }
    let cfg = ExperimentConfig { signal: SignalKind::Zero, ..config.clone() };
    run(&cfg)
}
