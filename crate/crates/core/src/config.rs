//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::indices::ModeVec;
use crate::kam::KamOptions;
use crate::nlkg::{draw_potential, ModelParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// `V` as an explicit array over modes `-N_max..=N_max`, or a seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialSpec {
    Values(Vec<f64>),
    Seeded { seed: u64 },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    c: f64,
    eps: f64,
    #[serde(rename = "V")]
    v: Option<PotentialSpec>,
    /// Informational, as written back by a resolved config.
    v_seed: Option<u64>,
    sigma: Option<f64>,
    r: Option<f64>,
    #[serde(rename = "N_max")]
    n_max: Option<u32>,
    #[serde(rename = "D_max")]
    d_max: Option<u32>,
    gamma: Option<f64>,
    steps: Option<u32>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
    hamiltonian: Option<PathBuf>,
}

/// A fully resolved configuration. Serializes with the same keys it reads,
/// `V` always explicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub c: f64,
    pub eps: f64,
    #[serde(rename = "V")]
    pub v: Vec<f64>,
    /// Seed `V` was drawn from, when it was not given explicitly.
    pub v_seed: Option<u64>,
    pub sigma: f64,
    pub r: f64,
    #[serde(rename = "N_max")]
    pub n_max: u32,
    #[serde(rename = "D_max")]
    pub d_max: u32,
    pub gamma: f64,
    pub steps: u32,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub hamiltonian: Option<PathBuf>,
}

pub const DEFAULT_SIGMA: f64 = 3.0;
pub const DEFAULT_R: f64 = 1.5;
pub const DEFAULT_N_MAX: u32 = 4;
pub const DEFAULT_D_MAX: u32 = 8;
pub const DEFAULT_GAMMA: f64 = 1e-3;
pub const DEFAULT_STEPS: u32 = 3;

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, ConfigError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })?;
        let n_max = raw.n_max.unwrap_or(DEFAULT_N_MAX);
        let seed = raw.seed.unwrap_or(0);
        let (v, v_seed) = match raw.v {
            Some(PotentialSpec::Values(v)) => (v, raw.v_seed),
            Some(PotentialSpec::Seeded { seed }) => (draw_potential(n_max, seed).into_vec(), Some(seed)),
            None => (draw_potential(n_max, 0).into_vec(), Some(0)),
        };
        let cfg = RunConfig {
            c: raw.c,
            eps: raw.eps,
            v,
            v_seed,
            sigma: raw.sigma.unwrap_or(DEFAULT_SIGMA),
            r: raw.r.unwrap_or(DEFAULT_R),
            n_max,
            d_max: raw.d_max.unwrap_or(DEFAULT_D_MAX),
            gamma: raw.gamma.unwrap_or(DEFAULT_GAMMA),
            steps: raw.steps.unwrap_or(DEFAULT_STEPS),
            seed,
            out: raw.out,
            csv: raw.csv,
            hamiltonian: raw.hamiltonian,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        RunConfig::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let expected = 2 * self.n_max as usize + 1;
        if self.v.len() != expected {
            return Err(ConfigError::Validation(format!(
                "V has {} entries, expected 2·N_max+1 = {expected}",
                self.v.len()
            )));
        }
        self.model().validate().map_err(|e| ConfigError::Validation(e.to_string()))?;
        if self.eps >= 1.0 {
            return Err(ConfigError::Validation(format!("eps = {} must be below 1", self.eps)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(ConfigError::Validation(format!("gamma = {} must be positive", self.gamma)));
        }
        if self.steps == 0 {
            return Err(ConfigError::Validation("steps must be at least 1".into()));
        }
        for p in [&self.out, &self.csv, &self.hamiltonian].into_iter().flatten() {
            check_writable(p)?;
        }
        Ok(())
    }

    /// The model parameters. Panics only if `V` has the wrong length, which
    /// `validate` rejects.
    pub fn model(&self) -> ModelParams {
        let v = ModeVec::from_vec(self.n_max, self.v.clone()).unwrap_or_else(|| ModeVec::filled(self.n_max, f64::NAN));
        ModelParams {
            c: self.c,
            v,
            eps: self.eps,
            sigma: self.sigma,
            r: self.r,
            n_max: self.n_max,
            d_max: self.d_max,
        }
    }

    pub fn kam_options(&self) -> KamOptions {
        KamOptions {
            gamma: self.gamma,
            steps: self.steps,
            seed: self.seed,
            ..KamOptions::default()
        }
    }
}

/// The parent directory must exist and the path must not be a directory.
pub fn check_writable(path: &Path) -> Result<(), ConfigError> {
    if path.is_dir() {
        return Err(ConfigError::Validation(format!("output path {} is a directory", path.display())));
    }
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(ConfigError::Validation(format!(
            "output directory {} does not exist",
            parent.display()
        )));
    }
    Ok(())
}
