//! Declarative run configuration.
//!
//! ```toml
//! run.dim = 3
//! run.side = 31
//! run.steps = 256
//! run.replicates = 100
//! run.seed = 1
//! kernel = "srw"
//! noise.family = "gaussian"
//! wall.family = "flat"
//! wall.height = 0.0
//! ```
//!
//! An explicit kernel replaces `kernel = "srw"` by a weight table whose
//! values are exact decimal or `p/q` strings:
//!
//! ```toml
//! kernel.weights = { "1" = "1/2", "-1" = "1/2" }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dynamics::Mode;
use crate::experiments::{geometric_grid, Averaging, Estimator, GrowthSpec};
use crate::lattice::{Kernel, KernelSpec, Torus};
use crate::noise::SymmetricLaw;
use crate::properties::PropertySetup;
use crate::wall::{WallFamily, WallSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    /// The text does not parse or names an unknown key.
    #[error("config error: {0}")]
    Parse(String),
    /// The config parses but describes an invalid run.
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid(format!("{key}: {msg}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[default]
    Exact,
    Torus,
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Mode {
        match m {
            ModeName::Exact => Mode::Exact,
            ModeName::Torus => Mode::Torus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AveragingName {
    #[default]
    Annealed,
    Quenched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorName {
    #[default]
    Origin,
    SiteAverage,
}

fn default_replicates() -> u64 {
    100
}

fn default_bootstrap() -> usize {
    200
}

fn is_zero(v: &u64) -> bool {
    *v == 0
}

fn is_false(v: &bool) -> bool {
    !*v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    /// Torus side `L`.
    pub side: usize,
    /// Largest time `n`; the grid is `1, 2, 4, ..` up to it.
    pub steps: u64,
    #[serde(default = "default_replicates")]
    pub replicates: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: ModeName,
    #[serde(default)]
    pub averaging: AveragingName,
    /// Wall replicate frozen under quenched averaging.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub quenched_wall: u64,
    #[serde(default)]
    pub estimator: EstimatorName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Bootstrap resamples for exponent intervals.
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    /// Number of replicates whose origin trajectories `simulate` exports.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub trajectories: u64,
    /// Whether `simulate` writes the final field of replicate 0.
    #[serde(default, skip_serializing_if = "is_false")]
    pub snapshot: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelConfig {
    /// `"srw"`, the nearest-neighbour walk.
    Named(String),
    /// Offsets `"i,j,k"` to probabilities.
    Table(KernelTable),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelTable {
    pub weights: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawFamily {
    Gaussian,
    Laplace,
    StretchedExponential,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub family: LawFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default = "one")]
    pub sigma: f64,
    /// Overrides `run.seed` for the noise streams.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallFamilyName {
    Gaussian,
    Laplace,
    StretchedExponential,
    Flat,
    NegInfinity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallConfig {
    pub family: WallFamilyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default = "one")]
    pub sigma: f64,
    /// Height of a flat wall.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    #[serde(default)]
    pub q_neginf: f64,
    /// Overrides `run.seed` for the wall fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_horizon() -> u64 {
    50
}

fn default_heights() -> usize {
    10
}

fn default_window() -> u64 {
    10
}

fn default_return_horizon() -> u64 {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// Steps of the `nu` comparison.
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    /// Number of random spike heights.
    #[serde(default = "default_heights")]
    pub heights: usize,
    /// Sites `|j|_inf <= window` are compared.
    #[serde(default = "default_window")]
    pub window: u64,
    /// Horizon of the return-sum bracket.
    #[serde(default = "default_return_horizon")]
    pub return_horizon: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            horizon: default_horizon(),
            heights: default_heights(),
            window: default_window(),
            return_horizon: default_return_horizon(),
        }
    }
}

/// `param` is a dotted config key (`wall.theta`, `run.side`, ..), or one
/// of the experiment parameters `upper_bound.k` and `mu.c0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub param: String,
    pub values: Vec<toml::Value>,
}

pub const SWEEP_UPPER_BOUND_K: &str = "upper_bound.k";
pub const SWEEP_MU_C0: &str = "mu.c0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub run: RunConfig,
    pub kernel: KernelConfig,
    pub noise: NoiseConfig,
    pub wall: WallConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

/// Parses `"1/6"`, `"0.25"` or `"1"`.
pub fn parse_weight(text: &str) -> Option<f64> {
    let t = text.trim();
    match t.split_once('/') {
        Some((p, q)) => {
            let p: u64 = p.trim().parse().ok()?;
            let q: u64 = q.trim().parse().ok()?;
            (q > 0).then(|| p as f64 / q as f64)
        }
        None => t.parse().ok().filter(|w: &f64| w.is_finite()),
    }
}

fn parse_offset(text: &str) -> Option<Vec<i64>> {
    text.split(',').map(|c| c.trim().parse().ok()).collect()
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Config, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        hex_digest(self.to_toml().as_bytes())
    }

    pub fn noise_seed(&self) -> u64 {
        self.noise.seed.unwrap_or(self.run.seed)
    }

    pub fn wall_seed(&self) -> u64 {
        self.wall.seed.unwrap_or(self.run.seed)
    }

    pub fn kernel(&self) -> Result<Kernel, ConfigError> {
        let spec = match &self.kernel {
            KernelConfig::Named(name) if name == "srw" => KernelSpec::simple_random_walk(self.run.dim),
            KernelConfig::Named(name) => {
                return Err(invalid("kernel", format!("unknown kernel {name:?}, expected \"srw\" or a weight table")))
            }
            KernelConfig::Table(t) => {
                let mut weights = BTreeMap::new();
                for (k, v) in &t.weights {
                    let o = parse_offset(k)
                        .ok_or_else(|| invalid("kernel.weights", format!("bad offset {k:?}")))?;
                    let w = parse_weight(v)
                        .ok_or_else(|| invalid("kernel.weights", format!("bad weight {v:?} at {k:?}")))?;
                    weights.insert(o, w);
                }
                let range = weights
                    .keys()
                    .map(|o| crate::lattice::graph_norm(o))
                    .max()
                    .unwrap_or(0) as u32;
                KernelSpec {
                    dim: self.run.dim,
                    range,
                    weights,
                }
            }
        };
        spec.validate().map_err(|e| invalid("kernel", e))
    }

    pub fn noise_law(&self) -> Result<SymmetricLaw, ConfigError> {
        let n = &self.noise;
        law_from(n.family, n.alpha, n.sigma, "noise")
    }

    pub fn wall_spec(&self) -> Result<WallSpec, ConfigError> {
        let w = &self.wall;
        let family = match w.family {
            WallFamilyName::Flat => WallFamily::Flat(w.height.unwrap_or(0.0)),
            WallFamilyName::NegInfinity => WallFamily::NegInfinity,
            WallFamilyName::Gaussian => {
                WallFamily::Symmetric(law_from(LawFamily::Gaussian, w.theta, w.sigma, "wall")?)
            }
            WallFamilyName::Laplace => {
                WallFamily::Symmetric(law_from(LawFamily::Laplace, w.theta, w.sigma, "wall")?)
            }
            WallFamilyName::StretchedExponential => WallFamily::Symmetric(law_from(
                LawFamily::StretchedExponential,
                w.theta,
                w.sigma,
                "wall",
            )?),
        };
        if w.height.is_some() && w.family != WallFamilyName::Flat {
            return Err(invalid("wall.height", "only applies to family = \"flat\""));
        }
        let spec = WallSpec {
            family,
            q_neginf: w.q_neginf,
        };
        spec.validate().map_err(|e| invalid("wall", e))?;
        Ok(spec)
    }

    pub fn torus(&self) -> Result<Torus, ConfigError> {
        if self.run.dim == 0 {
            return Err(invalid("run.dim", "must be at least 1"));
        }
        if self.run.side == 0 {
            return Err(invalid("run.side", "must be at least 1"));
        }
        Ok(Torus::new(self.run.dim, self.run.side))
    }

    pub fn mode(&self) -> Mode {
        self.run.mode.into()
    }

    pub fn oracle(&self) -> OracleConfig {
        self.oracle.clone().unwrap_or_default()
    }

    /// Checks everything a run needs, including the exact-mode rule.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let kernel = self.kernel()?;
        self.noise_law()?;
        self.wall_spec()?;
        let torus = self.torus()?;
        if torus.side() < kernel.min_side() {
            return Err(invalid(
                "run.side",
                format!("L = {} is below 2v+1 = {}", torus.side(), kernel.min_side()),
            ));
        }
        if self.run.steps == 0 {
            return Err(invalid("run.steps", "must be at least 1"));
        }
        self.mode()
            .check(torus.side(), kernel.range(), self.run.steps)
            .map_err(|e| invalid("run.side", format!("{e} (set run.mode = \"torus\" to allow wrapping)")))?;
        if self.run.replicates < 2 {
            return Err(invalid("run.replicates", "need at least 2"));
        }
        if self.run.estimator == EstimatorName::SiteAverage
            && self.run.averaging == AveragingName::Quenched
        {
            return Err(invalid("run.estimator", "site_average needs annealed averaging"));
        }
        if self.run.threads == Some(0) {
            return Err(invalid("run.threads", "must be at least 1"));
        }
        Ok(())
    }

    pub fn growth_spec(&self) -> Result<GrowthSpec, ConfigError> {
        self.validate()?;
        Ok(GrowthSpec {
            kernel: self.kernel()?,
            torus: self.torus()?,
            noise: self.noise_law()?,
            wall: self.wall_spec()?,
            seed: self.noise_seed(),
            wall_seed: self.wall_seed(),
            times: geometric_grid(self.run.steps),
            replicates: self.run.replicates,
            averaging: match self.run.averaging {
                AveragingName::Annealed => Averaging::Annealed,
                AveragingName::Quenched => Averaging::Quenched {
                    wall_replicate: self.run.quenched_wall,
                },
            },
            estimator: match self.run.estimator {
                EstimatorName::Origin => Estimator::Origin,
                EstimatorName::SiteAverage => Estimator::SiteAverage,
            },
            mode: self.mode(),
        })
    }

    pub fn property_setup(&self) -> Result<PropertySetup, ConfigError> {
        self.validate()?;
        Ok(PropertySetup {
            kernel: self.kernel()?,
            torus: self.torus()?,
            steps: self.run.steps,
            noise: self.noise_law()?,
            wall: self.wall_spec()?,
            seed: self.noise_seed(),
        })
    }

    /// A copy with the dotted key `param` set to `value`.
    pub fn with_param(&self, param: &str, value: &toml::Value) -> Result<Config, ConfigError> {
        let mut root = toml::Value::try_from(self).expect("config serializes");
        let mut slot = &mut root;
        let parts: Vec<&str> = param.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let table = slot
                .as_table_mut()
                .ok_or_else(|| ConfigError::Parse(format!("sweep.param: {param} is not a config key")))?;
            if i + 1 == parts.len() {
                table.insert(part.to_string(), value.clone());
                break;
            }
            slot = table
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(Default::default()));
        }
        let mut next: Config = root
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(format!("sweep.param {param}: {e}")))?;
        next.sweep = None;
        Ok(next)
    }
}

fn law_from(
    family: LawFamily,
    exponent: Option<f64>,
    sigma: f64,
    section: &str,
) -> Result<SymmetricLaw, ConfigError> {
    let key = if section == "wall" { "wall.theta" } else { "noise.alpha" };
    let law = match (family, exponent) {
        (LawFamily::Gaussian, None) => SymmetricLaw::gaussian(sigma),
        (LawFamily::Gaussian, Some(a)) if a == 2.0 => SymmetricLaw::gaussian(sigma),
        (LawFamily::Laplace, None) => SymmetricLaw::laplace(sigma),
        (LawFamily::Laplace, Some(a)) if a == 1.0 => SymmetricLaw::laplace(sigma),
        (LawFamily::StretchedExponential, Some(a)) => SymmetricLaw::stretched(a, sigma),
        (LawFamily::StretchedExponential, None) => {
            return Err(invalid(key, "required for stretched_exponential"))
        }
        (f, Some(a)) => {
            return Err(invalid(key, format!("{a} does not match the {f:?} family")))
        }
    };
    law.validate().map_err(|e| invalid(section, e))?;
    Ok(law)
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
