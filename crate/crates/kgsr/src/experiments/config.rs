//! Experiment configuration: a TOML file with one section per experiment
//! kind. Unknown keys are rejected so that typos fail closed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mkl::{AdmmParams, IiaParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {reason}")]
    Io { path: String, reason: String },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    NmseVsSigma,
    NmseVsSamples,
    SparsityPath,
    BandwidthTable,
    PropertySuite,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::NmseVsSigma => "nmse_vs_sigma",
            Self::NmseVsSamples => "nmse_vs_samples",
            Self::SparsityPath => "sparsity_path",
            Self::BandwidthTable => "bandwidth_table",
            Self::PropertySuite => "property_suite",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum GraphConfig {
    ErdosRenyi { n: usize, edge_prob: f64 },
    Circular { n: usize },
    EdgeList { path: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionaryConfig {
    /// Bandlimited-kernel beta (off-band penalty weight).
    pub beta: f64,
    /// Low-pass bandwidths, one kernel per entry.
    pub bandwidths: Vec<usize>,
    /// Scale every dictionary kernel to a common trace.
    #[serde(default = "default_true")]
    pub normalize: bool,
    /// Trace each kernel is scaled to when `normalize` is set (default 1).
    /// Scaling all kernels by c shifts the meaningful mu range by
    /// 1/sqrt(c); a target equal to the vertex count keeps dictionary
    /// kernels on identity-kernel scale.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_target: Option<f64>,
}

impl DictionaryConfig {
    pub fn trace_target(&self) -> Option<f64> {
        if self.normalize {
            Some(self.trace_target.unwrap_or(1.0))
        } else {
            None
        }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmmConfig {
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_admm_eps")]
    pub eps: f64,
    #[serde(default = "default_admm_max_iter")]
    pub max_iter: usize,
}

fn default_rho() -> f64 {
    1.0
}
fn default_admm_eps() -> f64 {
    1e-6
}
fn default_admm_max_iter() -> usize {
    5000
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            rho: default_rho(),
            eps: default_admm_eps(),
            max_iter: default_admm_max_iter(),
        }
    }
}

impl AdmmConfig {
    pub fn params(&self) -> AdmmParams {
        AdmmParams {
            rho: self.rho,
            eps: self.eps,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IiaConfig {
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_iia_eps")]
    pub eps: f64,
    #[serde(default = "default_iia_max_iter")]
    pub max_iter: usize,
}

fn default_radius() -> f64 {
    1.0
}
fn default_eta() -> f64 {
    0.5
}
fn default_iia_eps() -> f64 {
    1e-6
}
fn default_iia_max_iter() -> usize {
    2000
}

impl Default for IiaConfig {
    fn default() -> Self {
        Self {
            radius: default_radius(),
            eta: default_eta(),
            eps: default_iia_eps(),
            max_iter: default_iia_max_iter(),
        }
    }
}

impl IiaConfig {
    pub fn params(&self) -> IiaParams {
        IiaParams {
            radius: self.radius,
            eta: self.eta,
            eps: self.eps,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NmseVsSigmaConfig {
    pub s: usize,
    pub mu: f64,
    pub sigma2_grid: Vec<f64>,
    /// One curve per true signal bandwidth.
    pub bands: Vec<usize>,
    pub snr_db: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NmseVsSamplesConfig {
    pub s_values: Vec<usize>,
    pub band: usize,
    pub snr_db: f64,
    pub rs_mu: f64,
    pub ks_mu: f64,
    pub ls_bandwidths: Vec<usize>,
    pub dictionary: DictionaryConfig,
    /// Kernel-superposition dictionary override; the two learners pair
    /// their fixed mu values with different kernel scales.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_dictionary: Option<DictionaryConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparsityPathConfig {
    pub s: usize,
    pub band: usize,
    pub snr_db: f64,
    pub mu_grid: Vec<f64>,
    pub dictionary: DictionaryConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandwidthTableConfig {
    pub s: usize,
    pub mu: f64,
    pub snr_db: f64,
    pub true_bands: Vec<usize>,
    pub dictionary: DictionaryConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub graph: Option<GraphConfig>,
    #[serde(default)]
    pub admm: AdmmConfig,
    #[serde(default)]
    pub iia: IiaConfig,
    pub nmse_vs_sigma: Option<NmseVsSigmaConfig>,
    pub nmse_vs_samples: Option<NmseVsSamplesConfig>,
    pub sparsity_path: Option<SparsityPathConfig>,
    pub bandwidth_table: Option<BandwidthTableConfig>,
}

fn default_trials() -> usize {
    100
}

impl ExperimentConfig {
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_str(&text)
    }

    /// Echo the resolved configuration as TOML (used for the CSV header).
    pub fn echo(&self) -> String {
        toml::to_string(self).unwrap_or_else(|e| format!("<unserializable config: {e}>"))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::Invalid("trials must be at least 1".into()));
        }
        let graph_n = match &self.graph {
            Some(GraphConfig::ErdosRenyi { n, edge_prob }) => {
                if !(*edge_prob > 0.0 && *edge_prob < 1.0) {
                    return Err(ConfigError::Invalid(format!(
                        "edge_prob must lie in (0, 1), got {edge_prob}"
                    )));
                }
                if *n == 0 {
                    return Err(ConfigError::Invalid("graph n must be positive".into()));
                }
                Some(*n)
            }
            Some(GraphConfig::Circular { n }) => {
                if *n < 3 {
                    return Err(ConfigError::Invalid(
                        "circular graph needs at least 3 vertices".into(),
                    ));
                }
                Some(*n)
            }
            Some(GraphConfig::EdgeList { .. }) => None, // size known at load time
            None => None,
        };

        let needs_graph = self.experiment != ExperimentKind::PropertySuite;
        if needs_graph && self.graph.is_none() {
            return Err(ConfigError::Invalid(
                "this experiment requires a [graph] section".into(),
            ));
        }

        let check_band = |band: usize, what: &str| -> Result<(), ConfigError> {
            if band == 0 {
                return Err(ConfigError::Invalid(format!("{what} must be positive")));
            }
            if let Some(n) = graph_n {
                if band > n {
                    return Err(ConfigError::Invalid(format!(
                        "{what} {band} exceeds graph size {n}"
                    )));
                }
            }
            Ok(())
        };
        let check_s = |s: usize| -> Result<(), ConfigError> {
            if s == 0 {
                return Err(ConfigError::Invalid("sample count must be positive".into()));
            }
            if let Some(n) = graph_n {
                if s > n {
                    return Err(ConfigError::Invalid(format!(
                        "sample count {s} exceeds graph size {n}"
                    )));
                }
            }
            Ok(())
        };
        let check_mu = |mu: f64| -> Result<(), ConfigError> {
            if !(mu > 0.0) {
                return Err(ConfigError::Invalid(format!(
                    "regularization parameter must be positive, got {mu}"
                )));
            }
            Ok(())
        };
        let check_dict = |d: &DictionaryConfig| -> Result<(), ConfigError> {
            if d.bandwidths.is_empty() {
                return Err(ConfigError::Invalid("dictionary has no kernels".into()));
            }
            if !(d.beta > 0.0) {
                return Err(ConfigError::Invalid(format!(
                    "dictionary beta must be positive, got {}",
                    d.beta
                )));
            }
            if let Some(t) = d.trace_target {
                if !(t > 0.0) {
                    return Err(ConfigError::Invalid(format!(
                        "dictionary trace_target must be positive, got {t}"
                    )));
                }
            }
            for &b in &d.bandwidths {
                check_band(b, "dictionary bandwidth")?;
            }
            Ok(())
        };

        let section = |present: bool| -> Result<(), ConfigError> {
            if !present {
                return Err(ConfigError::Invalid(format!(
                    "experiment `{}` requires a matching [{}] section",
                    self.experiment.name(),
                    self.experiment.name()
                )));
            }
            Ok(())
        };

        match self.experiment {
            ExperimentKind::NmseVsSigma => {
                section(self.nmse_vs_sigma.is_some())?;
                let cfg = self.nmse_vs_sigma.as_ref().unwrap();
                check_s(cfg.s)?;
                check_mu(cfg.mu)?;
                if cfg.sigma2_grid.is_empty() || cfg.bands.is_empty() {
                    return Err(ConfigError::Invalid(
                        "sigma2_grid and bands must be nonempty".into(),
                    ));
                }
                if cfg.sigma2_grid.iter().any(|&s| !(s > 0.0)) {
                    return Err(ConfigError::Invalid("sigma2 values must be positive".into()));
                }
                for &b in &cfg.bands {
                    check_band(b, "signal bandwidth")?;
                }
            }
            ExperimentKind::NmseVsSamples => {
                section(self.nmse_vs_samples.is_some())?;
                let cfg = self.nmse_vs_samples.as_ref().unwrap();
                if cfg.s_values.is_empty() {
                    return Err(ConfigError::Invalid("s_values must be nonempty".into()));
                }
                for &s in &cfg.s_values {
                    check_s(s)?;
                }
                check_band(cfg.band, "signal bandwidth")?;
                check_mu(cfg.rs_mu)?;
                check_mu(cfg.ks_mu)?;
                for &b in &cfg.ls_bandwidths {
                    check_band(b, "assumed bandwidth")?;
                }
                check_dict(&cfg.dictionary)?;
                if let Some(ks) = &cfg.ks_dictionary {
                    check_dict(ks)?;
                }
            }
            ExperimentKind::SparsityPath => {
                section(self.sparsity_path.is_some())?;
                let cfg = self.sparsity_path.as_ref().unwrap();
                check_s(cfg.s)?;
                check_band(cfg.band, "signal bandwidth")?;
                if cfg.mu_grid.is_empty() {
                    return Err(ConfigError::Invalid("mu_grid must be nonempty".into()));
                }
                if cfg.mu_grid.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(ConfigError::Invalid(
                        "mu_grid must be strictly ascending".into(),
                    ));
                }
                for &mu in &cfg.mu_grid {
                    check_mu(mu)?;
                }
                check_dict(&cfg.dictionary)?;
            }
            ExperimentKind::BandwidthTable => {
                section(self.bandwidth_table.is_some())?;
                let cfg = self.bandwidth_table.as_ref().unwrap();
                check_s(cfg.s)?;
                check_mu(cfg.mu)?;
                if cfg.true_bands.is_empty() {
                    return Err(ConfigError::Invalid("true_bands must be nonempty".into()));
                }
                for &b in &cfg.true_bands {
                    check_band(b, "true bandwidth")?;
                }
                check_dict(&cfg.dictionary)?;
            }
            ExperimentKind::PropertySuite => {}
        }
        Ok(())
    }
}
