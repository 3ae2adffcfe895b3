//! JSON run configuration, one optional block per subcommand.

use std::path::PathBuf;

use erdim_core::complexity::{DEFAULT_GT_RANGE, DEFAULT_NGT_RANGE, DEFAULT_RESOLUTION};
use erdim_core::exact_model::ExactModel;
use erdim_core::lindblad::{EmbeddingParams, MarkovParams, PseudomodeParams};
use erdim_core::PhysicalParams;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub estimate: Option<EstimateConfig>,
    pub heatmap: Option<HeatmapConfig>,
    pub exact_run: Option<ExactRunConfig>,
    pub fit: Option<FitConfig>,
    pub lindblad_run: Option<LindbladRunConfig>,
    pub trn_verify: Option<TrnVerifyConfig>,
}

impl RunConfig {
    pub fn parse(bytes: &[u8]) -> Result<Self, CliError> {
        serde_json::from_slice(bytes).map_err(|e| CliError::Config(e.to_string()))
    }
}

fn config_err(block: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{block}: {msg}"))
}

/// Physical parameters, either dimensional (`gamma`, `T`, `tau`) or
/// dimensionless (`n_gamma_t`, `gamma_tau`).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    pub n: usize,
    pub epsilon: f64,
    pub gamma: Option<f64>,
    #[serde(rename = "T")]
    pub big_t: Option<f64>,
    pub tau: Option<f64>,
    pub n_gamma_t: Option<f64>,
    pub gamma_tau: Option<f64>,
}

impl EstimateConfig {
    pub fn params(&self) -> Result<PhysicalParams, CliError> {
        let dimensional = [("gamma", self.gamma), ("T", self.big_t), ("tau", self.tau)];
        let reduced = [("n_gamma_t", self.n_gamma_t), ("gamma_tau", self.gamma_tau)];
        let any_dimensional = dimensional.iter().any(|(_, v)| v.is_some());
        let any_reduced = reduced.iter().any(|(_, v)| v.is_some());
        if any_dimensional && any_reduced {
            return Err(config_err("estimate", "use either `gamma`/`T`/`tau` or `n_gamma_t`/`gamma_tau`, not both"));
        }
        let built = if any_dimensional {
            let [g, t, tau] = require("estimate", dimensional)?;
            PhysicalParams::new(self.n, g, t, tau, self.epsilon)
        } else {
            let [ngt, gt] = require("estimate", reduced)?;
            PhysicalParams::from_dimensionless(self.n, ngt, gt, self.epsilon)
        };
        built.map_err(|e| config_err("estimate", e))
    }
}

fn require<const N: usize>(block: &str, fields: [(&str, Option<f64>); N]) -> Result<[f64; N], CliError> {
    let mut out = [0.0; N];
    for (slot, (name, value)) in out.iter_mut().zip(fields) {
        *slot = value.ok_or_else(|| config_err(block, format!("missing field `{name}`")))?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeatmapLayout {
    /// One row per `n_gamma_t`, one column per `gamma_tau`, cells `log2 d_ER`.
    #[default]
    Matrix,
    /// One row per cell with raw and integer values.
    Long,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatmapConfig {
    pub epsilon: f64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_ngt_range")]
    pub n_gamma_t_range: [f64; 2],
    #[serde(default = "default_gt_range")]
    pub gamma_tau_range: [f64; 2],
    #[serde(default)]
    pub layout: HeatmapLayout,
}

fn default_resolution() -> usize {
    DEFAULT_RESOLUTION
}

fn default_ngt_range() -> [f64; 2] {
    [DEFAULT_NGT_RANGE.0, DEFAULT_NGT_RANGE.1]
}

fn default_gt_range() -> [f64; 2] {
    [DEFAULT_GT_RANGE.0, DEFAULT_GT_RANGE.1]
}

/// Band model; give exactly one of `modes` and `delta_omega`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactModelConfig {
    pub omega: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub g: f64,
    pub modes: Option<usize>,
    pub delta_omega: Option<f64>,
}

impl ExactModelConfig {
    pub fn model(&self, block: &str) -> Result<ExactModel, CliError> {
        let built = match (self.modes, self.delta_omega) {
            (Some(n), None) => ExactModel::with_modes(self.omega, self.omega_min, self.omega_max, n, self.g),
            (None, Some(dw)) => ExactModel::new(self.omega, self.omega_min, self.omega_max, dw, self.g),
            (None, None) => return Err(config_err(block, "model: missing field `modes` (or `delta_omega`)")),
            (Some(_), Some(_)) => return Err(config_err(block, "model: give only one of `modes` and `delta_omega`")),
        };
        built.map_err(|e| config_err(block, format!("model: {e}")))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactRunConfig {
    pub model: ExactModelConfig,
    /// Defaults to ten correlation times.
    pub t_max: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Continuum step; defaults to `tau / 20`.
    pub step: Option<f64>,
    #[serde(default = "yes")]
    pub continuum: bool,
}

fn default_samples() -> usize {
    201
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModels {
    Markov,
    Embedding,
    #[default]
    Both,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactTargetConfig {
    pub model: ExactModelConfig,
    pub t_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

/// Either an exact-model run or a CSV file with `t` and `sigma_z` columns.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitTargetConfig {
    pub exact: Option<ExactTargetConfig>,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub target: FitTargetConfig,
    #[serde(default)]
    pub models: FitModels,
    /// Qubit frequency for the Markov fit; taken from the exact model if absent.
    pub omega: Option<f64>,
    pub seed: Option<u64>,
    pub max_evals: Option<usize>,
    pub restarts: Option<usize>,
    #[serde(default = "yes")]
    pub warm_start: bool,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GadConfig {
    pub omega: f64,
    pub gamma_down: f64,
    pub gamma_up: f64,
}

impl From<GadConfig> for MarkovParams {
    fn from(c: GadConfig) -> Self {
        MarkovParams { omega: c.omega, gamma_down: c.gamma_down, gamma_up: c.gamma_up }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub omega1: f64,
    pub omega2: f64,
    pub g_tilde: f64,
    pub gamma1_down: f64,
    pub gamma1_up: f64,
    pub gamma2_down: f64,
    pub gamma2_up: f64,
}

impl From<EmbeddingConfig> for EmbeddingParams {
    fn from(c: EmbeddingConfig) -> Self {
        EmbeddingParams {
            omega1: c.omega1,
            omega2: c.omega2,
            g_tilde: c.g_tilde,
            gamma1_down: c.gamma1_down,
            gamma1_up: c.gamma1_up,
            gamma2_down: c.gamma2_down,
            gamma2_up: c.gamma2_up,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PseudomodeConfig {
    pub omega0: f64,
    pub omega: f64,
    pub omega_rabi: f64,
    pub gamma_decay: f64,
    pub cutoff: usize,
    #[serde(default)]
    pub n0: f64,
    /// Accuracy for the reported cutoff estimate.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    0.05
}

impl From<PseudomodeConfig> for PseudomodeParams {
    fn from(c: PseudomodeConfig) -> Self {
        PseudomodeParams {
            omega0: c.omega0,
            omega: c.omega,
            omega_rabi: c.omega_rabi,
            gamma_decay: c.gamma_decay,
            cutoff: c.cutoff,
            n0: c.n0,
        }
    }
}

/// Exactly one of `gad`, `embedding`, `pseudomode`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladRunConfig {
    pub t_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub gad: Option<GadConfig>,
    pub embedding: Option<EmbeddingConfig>,
    pub pseudomode: Option<PseudomodeConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrnVerifyConfig {
    #[serde(default = "two")]
    pub system_dim: usize,
    pub reservoir_dim: usize,
    pub n: usize,
    pub gamma: f64,
    pub tau: f64,
    pub steps: usize,
    #[serde(default)]
    pub correlated: bool,
    pub seed: Option<u64>,
    /// Defaults to every rank up to the largest bond dimension.
    pub ranks: Option<Vec<usize>>,
    /// Defaults to 0.1, 0.2, ..., 0.9.
    pub alphas: Option<Vec<f64>>,
}

fn two() -> usize {
    2
}
