//! Run configuration: a TOML file with tagged records for the model pieces.
//!
//! ```toml
//! seed = 42
//! output_dir = "out"
//!
//! [params]
//! a = 0.0
//! b = 1.0
//!
//! [grid]
//! n_points = 4096
//! length = 80.0
//!
//! [model]
//! epsilon = { fraction_of_max = 0.5 }   # or a plain number
//! rho = 1.0
//! source = { family = "gaussian_bump", center = 0.0, width = 1.0, amplitude = 1.0 }
//! kernel = { family = "gaussian", width = 1.0 }
//! nonlinearity = { family = "scaled_sine", beta = 1.0 }
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::SpectralGrid;
use crate::model::{KernelSpec, ModelSpec, NonlinearitySpec, SourceSpec};
use crate::operator::{ContractionConstants, OperatorParams};
use crate::solver::{prepare, LinearSolveResult, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_points: usize,
    pub length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_points: 4096,
            length: 80.0,
        }
    }
}

/// Coupling strength, either absolute or as a fraction of the admissible maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsilonSetting {
    Absolute(f64),
    Relative { fraction_of_max: f64 },
}

impl EpsilonSetting {
    pub fn resolve(&self, epsilon_max: f64) -> f64 {
        match *self {
            EpsilonSetting::Absolute(e) => e,
            EpsilonSetting::Relative { fraction_of_max } => fraction_of_max * epsilon_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub epsilon: EpsilonSetting,
    pub rho: f64,
    pub source: SourceSpec,
    pub kernel: KernelSpec,
    pub nonlinearity: NonlinearitySpec,
}

fn default_trials() -> usize {
    100
}

fn default_fractions() -> Vec<f64> {
    vec![0.125, 0.25, 0.5]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Pairs drawn by the contraction audit.
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Sweep values as fractions of `ε_max`.
    #[serde(default = "default_fractions")]
    pub sweep_fractions: Vec<f64>,
    /// Second nonlinearity for the continuity experiment; the model's own when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternate_nonlinearity: Option<NonlinearitySpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            trials: default_trials(),
            sweep_fractions: default_fractions(),
            alternate_nonlinearity: None,
        }
    }
}

fn default_seed() -> u64 {
    42
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub params: ParamsConfig,
    #[serde(default)]
    pub grid: GridConfig,
    pub model: ModelConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub experiment: ExperimentConfig,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Field-level checks that do not need a solve.
    pub fn validate(&self) -> Result<()> {
        if !self.params.a.is_finite() {
            return Err(Error::validation("params.a", "must be finite"));
        }
        if self.params.b == 0.0 || !self.params.b.is_finite() {
            return Err(Error::validation("params.b", "must be finite and nonzero"));
        }
        if !self.grid.n_points.is_power_of_two() || self.grid.n_points < 2 {
            return Err(Error::validation("grid.n_points", "must be a power of two >= 2"));
        }
        if !(self.grid.length > 0.0) || !self.grid.length.is_finite() {
            return Err(Error::validation("grid.length", "must be positive and finite"));
        }
        if !(self.model.rho > 0.0 && self.model.rho <= 1.0) {
            return Err(Error::validation("model.rho", "must lie in (0, 1]"));
        }
        match self.model.epsilon {
            EpsilonSetting::Absolute(e) if !(e >= 0.0) || !e.is_finite() => {
                return Err(Error::validation("model.epsilon", "must be nonnegative and finite"));
            }
            EpsilonSetting::Relative { fraction_of_max: f } if !(f >= 0.0) || !f.is_finite() => {
                return Err(Error::validation(
                    "model.epsilon.fraction_of_max",
                    "must be nonnegative and finite",
                ));
            }
            _ => {}
        }
        self.model.source.validate()?;
        self.model.kernel.validate()?;
        self.model.nonlinearity.validate()?;
        if let Some(g) = &self.experiment.alternate_nonlinearity {
            g.validate()
                .map_err(|e| Error::validation("experiment.alternate_nonlinearity", e.to_string()))?;
        }
        if self.experiment.sweep_fractions.iter().any(|f| !(*f >= 0.0)) {
            return Err(Error::validation(
                "experiment.sweep_fractions",
                "must be nonnegative",
            ));
        }
        self.tolerances.validate()
    }

    /// SHA-256 of the canonical serialization, hex encoded. The output
    /// directory is left out so relocating a run keeps its stamp.
    pub fn hash(&self) -> Result<String> {
        let mut stripped = self.clone();
        stripped.output_dir = PathBuf::new();
        let canonical = stripped.to_toml_string()?;
        Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
    }

    /// First 12 hex digits of [`RunConfig::hash`], used to stamp file names.
    pub fn short_hash(&self) -> Result<String> {
        Ok(self.hash()?[..12].to_string())
    }

    pub fn grid(&self) -> Result<Arc<SpectralGrid>> {
        SpectralGrid::new(self.grid.n_points, self.grid.length)
    }

    pub fn operator_params(&self) -> Result<OperatorParams> {
        OperatorParams::new(self.params.a, self.params.b)
    }

    /// Model with `ε` left at zero; the caller fills it in after resolving.
    pub fn base_model(&self) -> ModelSpec {
        ModelSpec {
            source: self.model.source,
            kernel: self.model.kernel,
            nonlinearity: self.model.nonlinearity.clone(),
            epsilon: 0.0,
            rho: self.model.rho,
        }
    }

    /// Computes every constant of the admissibility condition, including `‖u₀‖₂`.
    pub fn resolve(&self) -> Result<Resolved> {
        self.validate()?;
        let grid = self.grid()?;
        let params = self.operator_params()?;
        let base = self.base_model();
        let (_, linear, probe) = prepare(&base, &params, &grid, &self.tolerances)?;
        let epsilon = self.model.epsilon.resolve(probe.epsilon_max);
        let model = base.with_epsilon(epsilon);
        let constants = ContractionConstants::new(
            epsilon,
            probe.rho,
            probe.m,
            probe.kernel_l1,
            probe.u0_l2,
            probe.c_ab,
        )?;
        Ok(Resolved {
            grid,
            params,
            model,
            tolerances: self.tolerances,
            linear,
            constants,
        })
    }
}

/// A configuration with all derived quantities computed.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub grid: Arc<SpectralGrid>,
    pub params: OperatorParams,
    pub model: ModelSpec,
    pub tolerances: Tolerances,
    pub linear: LinearSolveResult,
    pub constants: ContractionConstants,
}

/// The configuration shipped as `configs/default.toml`.
pub const DEFAULT_CONFIG: &str = r#"seed = 42
output_dir = "out"

[params]
a = 0.0
b = 1.0

[grid]
n_points = 4096
length = 80.0

[model]
epsilon = { fraction_of_max = 0.5 }
rho = 1.0
source = { family = "gaussian_bump", center = 0.0, width = 1.0, amplitude = 1.0 }
kernel = { family = "gaussian", width = 1.0 }
nonlinearity = { family = "scaled_sine", beta = 1.0 }

[experiment]
trials = 100
sweep_fractions = [0.125, 0.25, 0.5]
alternate_nonlinearity = { family = "scaled_sine", beta = 0.9 }
"#;
