//! JSON experiment configuration. Unknown keys are rejected at every level.

use std::path::Path;

use ebslab_core::credible::RadiusKind;
use ebslab_core::simulation::{AlphaRule, ExperimentConfig};
use ebslab_core::{thresholds, ConvolvedDensity, SignalKind, SlabModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SlabConfig {
    HeavyTail { delta: f64 },
    Cauchy,
    Laplace {
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl SlabConfig {
    pub fn model(self) -> CliResult<SlabModel> {
        Ok(match self {
            SlabConfig::HeavyTail { delta } => SlabModel::heavy_tail(delta)?,
            SlabConfig::Cauchy => SlabModel::cauchy(),
            SlabConfig::Laplace { scale } => SlabModel::laplace(scale)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalConfig {
    Zero,
    /// Entries at `amplitude · √(2 log(n/s))`.
    Flat { amplitude: f64 },
    /// Entries uniform in `[t(alpha)/8, t(alpha)/4]` for the configured slab.
    Adversarial { alpha: f64 },
    EbTail { a: f64, d_q: f64, large: usize, fill: f64 },
    B0Construction { a: f64, c: f64, s1: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaRuleConfig {
    #[default]
    Mmle,
    Fixed { alpha: f64 },
    Oracle { multiplier: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusConfig {
    #[default]
    Moment,
    Quantile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub n: usize,
    pub s: usize,
    pub q: f64,
    pub slab: SlabConfig,
    pub signal: SignalConfig,
    #[serde(default)]
    pub alpha_rule: AlphaRuleConfig,
    /// Empty means a single multiplier `1/beta`.
    #[serde(default)]
    pub multipliers: Vec<f64>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub radius: RadiusConfig,
    #[serde(default)]
    pub posterior_draws: usize,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_beta() -> f64 {
    0.05
}

impl SimulateConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Converts to the core configuration. Adversarial signals are placed
    /// with `t(alpha)` of the configured slab.
    pub fn resolve(&self) -> CliResult<ExperimentConfig> {
        let slab = self.slab.model()?;
        let signal = match self.signal {
            SignalConfig::Zero => SignalKind::Zero,
            SignalConfig::Flat { amplitude } => SignalKind::Flat { amplitude },
            SignalConfig::Adversarial { alpha } => {
                let g = ConvolvedDensity::new(slab)?;
                SignalKind::Adversarial { t_alpha: thresholds::t_of(&g, alpha)? }
            }
            SignalConfig::EbTail { a, d_q, large, fill } => SignalKind::EbTail { a, d_q, q: self.q, large, fill },
            SignalConfig::B0Construction { a, c, s1 } => SignalKind::B0Construction { a, c, s1 },
        };
        let alpha_rule = match self.alpha_rule {
            AlphaRuleConfig::Mmle => AlphaRule::Mmle,
            AlphaRuleConfig::Fixed { alpha } => AlphaRule::Fixed(alpha),
            AlphaRuleConfig::Oracle { multiplier } => AlphaRule::Oracle { multiplier },
        };
        let config = ExperimentConfig {
            n: self.n,
            s: self.s,
            q: self.q,
            slab,
            signal,
            alpha_rule,
            multipliers: self.multipliers.clone(),
            beta: self.beta,
            radius_kind: match self.radius {
                RadiusConfig::Moment => RadiusKind::Moment,
                RadiusConfig::Quantile => RadiusKind::Quantile,
            },
            posterior_draws: self.posterior_draws,
            replicates: self.replicates,
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}
