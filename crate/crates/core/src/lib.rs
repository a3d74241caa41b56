//! Marginal-maximum-likelihood empirical Bayes for the sparse Gaussian
//! sequence model `X_i = θ_i + ε_i` under spike-and-slab priors.
//!
//! The crate is `no_std` (with `alloc`). Disable the default `std` feature to
//! route elementary functions through `libm`; results are identical up to the
//! last ulp of the underlying math library.
//!
//! Layout:
//! - [`slab`]: slab densities and the noise-convolved marginal `g = φ * γ`.
//! - [`thresholds`]: the score transforms and the thresholds `ζ`, `τ`, `t`.
//! - [`posterior`]: per-coordinate posterior functionals (slab weight, median,
//!   mean, `q`-th moment radii) and a posterior sampler.
//! - [`mmle`]: the marginal maximum likelihood estimate of the mixing weight.
//! - [`credible`]: moment and quantile credible balls.
//! - [`sparsity`]: excessive-bias and testing-condition checks, signal fixtures.
//! - [`simulation`]: Monte Carlo replicates and aggregation.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod credible;
pub mod error;
pub mod math;
pub mod mmle;
pub mod posterior;
pub mod quadrature;
pub mod rng;
pub mod simulation;
pub mod slab;
pub mod sparsity;
pub mod stats;
pub mod thresholds;

pub use credible::{CredibleBall, RadiusKind};
pub use error::{Error, Result};
pub use mmle::MmleResult;
pub use posterior::{CoordinatePosterior, MomentTable, PosteriorSampler};
pub use quadrature::QuadratureSpec;
pub use slab::{ConvolvedDensity, SlabFamily, SlabModel};
pub use sparsity::{EbConstants, EbReport, EllFloor, SignalKind};
pub use thresholds::{MomentDiagnostics, ThresholdTriple};
pub use simulation::{AlphaRule, ExperimentConfig, ExperimentResult, ReplicateRecord};
