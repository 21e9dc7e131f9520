//! Run configuration schema.
//!
//! A run is described by a flat key/value document with sections per
//! subsystem; every default matches the reference experiment setup. The
//! schema (TOML on disk, flags override keys one-to-one in the CLI):
//!
//! ```toml
//! problem = "elliptic"            # elliptic|parabolic|hyperbolic|poisson2d
//! dim = 10                        # spatial dimension
//! sampler = "self_normalized"     # annular|mh|self_normalized|rar
//! p = 1.0                         # residual exponent
//! burn_in = 0                     # Metropolis burn-in
//! annuli = 8                      # shells of the annular proposal
//! # pool_size = 12000             # self-normalized pool (default: n1)
//! adaptive_boundary = true        # resample the boundary adaptively too
//!
//! [stencil]
//! h = 1e-4
//!
//! [rar]
//! base_count = 10000
//! top_k = 2000
//!
//! [network]
//! depth = 3
//! width = 100
//! init = "fan_bias"              # or "xavier"
//!
//! [training]
//! epochs = 20000
//! n1 = 12000
//! # n2 = 12000                    # default: n1 (+ n1/dim with time)
//! lambda = 10.0
//! seed = 0
//! eval_every = 100
//! checkpoint_every = 0
//! lr = "schedule"                 # or a positive number for a fixed rate
//! test_points = 10000
//! # test_seed = 1001              # default: per-problem constant
//! ```

use serde::{Deserialize, Serialize};

use crate::problems::{PdeProblem, ProblemKind};
use crate::trainer::{InitScheme, LrPolicy, SamplerKind, SamplerSettings, TrainingConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: String,
    pub dim: usize,
    pub sampler: String,
    pub p: f64,
    pub burn_in: usize,
    pub annuli: usize,
    pub pool_size: Option<usize>,
    pub adaptive_boundary: bool,
    pub stencil: StencilSection,
    pub rar: RarSection,
    pub network: NetworkSection,
    pub training: TrainingSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: "elliptic".into(),
            dim: 10,
            sampler: "self_normalized".into(),
            p: 1.0,
            burn_in: 0,
            annuli: 8,
            pool_size: None,
            adaptive_boundary: true,
            stencil: StencilSection::default(),
            rar: RarSection::default(),
            network: NetworkSection::default(),
            training: TrainingSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct StencilSection {
    pub h: f64,
}

impl Default for StencilSection {
    fn default() -> Self {
        Self { h: 1e-4 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RarSection {
    pub base_count: usize,
    pub top_k: usize,
}

impl Default for RarSection {
    fn default() -> Self {
        Self { base_count: 10_000, top_k: 2_000 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub depth: usize,
    pub width: usize,
    /// Weight init: "fan_bias" (fan-in uniform weights and biases) or
    /// "xavier" (zero biases; collapses under the cubic activation).
    pub init: String,
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self { depth: 3, width: 100, init: "fan_bias".into() }
    }
}

/// Learning-rate setting: the staircase schedule by name, or a fixed value.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum LrSetting {
    Named(String),
    Constant(f64),
}

impl Default for LrSetting {
    fn default() -> Self {
        LrSetting::Named("schedule".into())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub epochs: usize,
    pub n1: usize,
    pub n2: Option<usize>,
    pub lambda: f64,
    pub seed: u64,
    pub eval_every: usize,
    pub checkpoint_every: usize,
    pub lr: LrSetting,
    pub test_points: usize,
    pub test_seed: Option<u64>,
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self {
            epochs: 20_000,
            n1: 12_000,
            n2: None,
            lambda: 10.0,
            seed: 0,
            eval_every: 100,
            checkpoint_every: 0,
            lr: LrSetting::default(),
            test_points: crate::metrics::TEST_SET_SIZE,
            test_seed: None,
        }
    }
}

impl RunConfig {
    pub fn problem(&self) -> Result<PdeProblem> {
        let kind: ProblemKind = self.problem.parse()?;
        PdeProblem::from_kind(kind, if kind == ProblemKind::Poisson2d { 2 } else { self.dim })
    }

    pub fn sampler_settings(&self) -> Result<SamplerSettings> {
        Ok(SamplerSettings {
            kind: self.sampler.parse::<SamplerKind>()?,
            exponent: self.p,
            burn_in: self.burn_in,
            annuli: self.annuli,
            pool_size: self.pool_size,
            rar_base: self.rar.base_count,
            rar_top_k: self.rar.top_k,
            adaptive_boundary: self.adaptive_boundary,
        })
    }

    pub fn lr_policy(&self) -> Result<LrPolicy> {
        match &self.training.lr {
            LrSetting::Named(name) if name == "schedule" => Ok(LrPolicy::Staircase),
            LrSetting::Named(other) => {
                Err(Error::Config(format!("unknown lr setting '{other}' (expected \"schedule\" or a number)")))
            }
            LrSetting::Constant(r) => Ok(LrPolicy::Constant(*r)),
        }
    }

    pub fn training_config(&self) -> Result<TrainingConfig> {
        Ok(TrainingConfig {
            epochs: self.training.epochs,
            n1: self.training.n1,
            n2: self.training.n2,
            lambda: self.training.lambda,
            width: self.network.width,
            depth: self.network.depth,
            sampler: self.sampler_settings()?,
            stencil_h: self.stencil.h,
            seed: self.training.seed,
            eval_every: self.training.eval_every,
            checkpoint_every: self.training.checkpoint_every,
            checkpoint_dir: None,
            lr: self.lr_policy()?,
            test_points: self.training.test_points,
            test_seed: self.training.test_seed,
            init: self.network.init.parse::<InitScheme>()?,
        })
    }
}
