//! Subcommand configuration schemas.
//!
//! A run is configured by a single JSON document; CLI flags override the
//! top-level keys. Unknown keys are rejected. Manifests are ordinary
//! configs with two extra bookkeeping keys (`artifact_version`,
//! `subcommand`), so a manifest can be fed straight back to `--config`.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::model_xy::QuenchProtocol;
use crate::universal::LimitVariable;

/// A parsed config file with the manifest bookkeeping split off.
#[derive(Debug, Clone)]
pub struct ConfigDocument {
    pub artifact_version: Option<String>,
    pub subcommand: Option<String>,
    pub body: serde_json::Value,
}

/// Load a config document from JSON text.
pub fn load_config(text: &str) -> Result<ConfigDocument> {
    let mut value: serde_json::Value = serde_json::from_str(text)?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::InvalidArgument("config must be a JSON object".into()))?;
    let artifact_version = obj
        .remove("artifact_version")
        .and_then(|v| v.as_str().map(String::from));
    let subcommand = obj
        .remove("subcommand")
        .and_then(|v| v.as_str().map(String::from));
    Ok(ConfigDocument {
        artifact_version,
        subcommand,
        body: value,
    })
}

impl ConfigDocument {
    /// Deserialize the body into a concrete config, rejecting unknown keys.
    pub fn parse<T: serde::de::DeserializeOwned>(&self, subcommand: &str) -> Result<T> {
        if let Some(sub) = &self.subcommand {
            if sub != subcommand {
                return Err(Error::InvalidArgument(format!(
                    "config is for subcommand `{sub}`, invoked `{subcommand}`"
                )));
            }
        }
        Ok(serde_json::from_value(self.body.clone())?)
    }
}

fn default_chunks() -> usize {
    64
}
fn default_bins() -> usize {
    101
}
fn default_points() -> usize {
    801
}
fn default_p_max() -> usize {
    4
}
fn default_m_max() -> usize {
    8
}

/// `modes`: emit the per-momentum spectral table of one quench.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesConfig {
    pub protocol: QuenchProtocol,
}

/// How `sim` transforms raw magnetization samples before binning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rescale {
    None,
    Centered,
    /// (M - M-bar) / (L dh): the per-site susceptibility-scaled variable.
    PerSiteField,
    /// (M - M-bar) / Delta M.
    UnitVariance,
}

impl Default for Rescale {
    fn default() -> Self {
        Self::PerSiteField
    }
}

/// `sim`: Monte-Carlo time sampling of the magnetization.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub protocol: QuenchProtocol,
    pub t_max: f64,
    pub n_samples: usize,
    #[serde(default = "default_chunks")]
    pub n_chunks: usize,
    pub seed: u64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// Histogram range; derived from the samples when absent.
    #[serde(default)]
    pub range: Option<[f64; 2]>,
    #[serde(default)]
    pub rescale: Rescale,
    #[serde(default)]
    pub dump_samples: bool,
}

/// Weight source for `charfun`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightsSource {
    /// Literal J0 scale factors.
    Inline { values: Vec<f64> },
    /// Merged frequency-class amplitudes of a quench; `rescale` divides
    /// by Delta M so the variable has unit variance.
    Protocol {
        protocol: QuenchProtocol,
        #[serde(default)]
        rescale: bool,
    },
}

/// `charfun`: analytic characteristic function and inverted density.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharfunConfig {
    pub weights: WeightsSource,
    pub s_max: f64,
    #[serde(default = "default_points")]
    pub s_points: usize,
    pub x_max: f64,
    #[serde(default = "default_points")]
    pub x_points: usize,
}

/// `universal`: zeta values, ratios, truncation law, limit distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniversalConfig {
    pub alpha: f64,
    pub d: usize,
    pub b: Vec<f64>,
    #[serde(default = "default_p_max")]
    pub p_max: usize,
    #[serde(default)]
    pub truncation_sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub limit_variable: Option<LimitVariable>,
}

/// Weight source for `le`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LeWeightsSource {
    Inline {
        p: Vec<f64>,
    },
    /// CSV file `index,p`.
    File {
        path: PathBuf,
    },
    Critical {
        nu: f64,
        d: usize,
        b: Vec<f64>,
        n_modes: usize,
        delta_lambda: f64,
    },
}

/// `le`: Loschmidt-echo density and purities from spectral weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeConfig {
    pub weights: LeWeightsSource,
    #[serde(default)]
    pub x_max: Option<f64>,
    #[serde(default = "default_points")]
    pub x_points: usize,
    /// Gaussian window for weight sets whose J^L decays too slowly.
    #[serde(default)]
    pub window_sigma: Option<f64>,
    #[serde(default = "default_m_max")]
    pub m_max: usize,
}

/// Mode source for `quasifree`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum QuasifreeModes {
    Inline { alpha: Vec<f64>, epsilon: Vec<f64> },
    /// CSV file `index,alpha,epsilon`.
    File { path: PathBuf },
}

/// `quasifree`: echo trajectory, log-echo characteristic function and
/// cumulants for commuting quasi-free mode data.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasifreeConfig {
    pub modes: QuasifreeModes,
    pub t_max: f64,
    #[serde(default = "default_points")]
    pub t_points: usize,
    pub lambda_max: f64,
    #[serde(default = "default_bins")]
    pub lambda_points: usize,
}

/// System source for `exactdiag`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExactDiagSource {
    /// Dense XY chain quenched in the transverse field; A = B = total
    /// magnetization.
    XyDense { l: usize, h: f64, gamma: f64 },
    /// Matrix JSON files ({dim, entries, hermitian}).
    Files {
        h0: PathBuf,
        a: PathBuf,
        b: PathBuf,
    },
}

/// `exactdiag`: first-order weight report for a dense system.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactDiagConfig {
    pub system: ExactDiagSource,
    /// Quench amplitude for the variance entries of the report.
    #[serde(default)]
    pub delta_lambda: Option<f64>,
}

/// `scalingfit`: log-log exponent fit of a size series.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingFitConfig {
    #[serde(default)]
    pub sizes: Option<Vec<f64>>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    /// CSV file `size,value`; exclusive with inline data.
    #[serde(default)]
    pub input: Option<PathBuf>,
}
