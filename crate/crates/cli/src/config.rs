//! Experiment configuration read from TOML. Every field has a default, so an
//! empty file describes the split model on the classical preset.

use std::path::Path;

use serde::{Deserialize, Serialize};
use shqmm_core::datagen::{GeneratorSpec, PAPER_CLASSICAL, SYNTHETIC_QUANTUM};
use shqmm_core::learning::{LossScale, TrainConfig};
use shqmm_core::Boundary;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Hmm,
    Hqmm,
    Shqmm,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Hmm => "hmm",
            Family::Hqmm => "hqmm",
            Family::Shqmm => "shqmm",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Row label in comparison tables; defaults to the config file stem.
    pub name: Option<String>,
    pub model: ModelSection,
    pub train: TrainSection,
    pub data: DataSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub family: Family,
    pub dim_o: usize,
    /// Hidden dimension of the quantum models.
    pub m: usize,
    pub n_max: usize,
    pub k: usize,
    pub boundary: String,
    /// Kraus operators per symbol (HQMM).
    pub w: usize,
    /// Hidden states (HMM).
    pub states: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            family: Family::Shqmm,
            dim_o: 6,
            m: 6,
            n_max: 3,
            k: 1,
            boundary: Boundary::Periodic.to_string(),
            w: 1,
            states: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub tau: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epochs: usize,
    pub batches: usize,
    pub seed: u64,
    pub ensemble_init: String,
    pub loss_scale: String,
    /// Baum-Welch iterations (HMM).
    pub em_iters: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        Self {
            tau: d.tau,
            alpha: d.alpha,
            beta: d.beta,
            epochs: d.epochs,
            batches: 4,
            seed: d.seed,
            ensemble_init: d.ensemble_init.to_string(),
            loss_scale: d.loss_scale.to_string(),
            em_iters: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub preset: String,
    pub count: usize,
    pub length: usize,
    pub seed: u64,
    /// `[train, val, test]` counts; defaults to half / quarter / rest.
    pub split: Option<[usize; 3]>,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            preset: PAPER_CLASSICAL.to_string(),
            count: 40,
            length: 500,
            seed: 0,
            split: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        let cfg: Self =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every structural and optimizer constraint without computing
    /// anything.
    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if m.dim_o < 2 {
            return Err(CliError::Config("dim_o must be at least 2".into()));
        }
        match m.family {
            Family::Hmm => {
                if m.states == 0 {
                    return Err(CliError::Config("states must be at least 1".into()));
                }
                if self.train.em_iters == 0 {
                    return Err(CliError::Config("em_iters must be at least 1".into()));
                }
            }
            Family::Hqmm => {
                if m.w == 0 {
                    return Err(CliError::Config("w must be at least 1".into()));
                }
                self.train_config()?.validate()?;
            }
            Family::Shqmm => self.train_config()?.validate()?,
        }
        self.data.validate()
    }

    /// Optimizer and structure settings; for the HQMM family the split
    /// structure collapses to one slot.
    pub fn train_config(&self) -> Result<TrainConfig> {
        let (n_max, k) = match self.model.family {
            Family::Shqmm => (self.model.n_max, self.model.k),
            _ => (1, 0),
        };
        Ok(TrainConfig {
            tau: self.train.tau,
            alpha: self.train.alpha,
            beta: self.train.beta,
            epochs: self.train.epochs,
            batches: self.train.batches,
            seed: self.train.seed,
            ensemble_init: parse(&self.train.ensemble_init)?,
            loss_scale: parse::<LossScale>(&self.train.loss_scale)?,
            m: self.model.m,
            dim_o: self.model.dim_o,
            n_max,
            k,
            boundary: parse(&self.model.boundary)?,
        })
    }

    pub fn label(&self, path: &Path) -> String {
        self.name.clone().unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "model".into())
        })
    }

    /// Number of free parameters of the configured model.
    pub fn param_count(&self) -> usize {
        let m = &self.model;
        match m.family {
            Family::Hmm => m.states * m.states + m.dim_o * m.states,
            Family::Hqmm => shqmm_core::param_count(m.m, m.w),
            Family::Shqmm => shqmm_core::param_count(m.m, 2 * m.k + 1),
        }
    }
}

impl DataSection {
    fn validate(&self) -> Result<()> {
        if self.count == 0 || self.length == 0 {
            return Err(CliError::Config("data count and length must be at least 1".into()));
        }
        if ![PAPER_CLASSICAL, SYNTHETIC_QUANTUM].contains(&self.preset.as_str()) {
            return Err(CliError::Config(format!(
                "unknown preset `{}` (expected {PAPER_CLASSICAL} or {SYNTHETIC_QUANTUM})",
                self.preset
            )));
        }
        if let Some(s) = self.split {
            if s.iter().sum::<usize>() != self.count {
                return Err(CliError::Config(format!(
                    "split {s:?} does not sum to count {}",
                    self.count
                )));
            }
        }
        Ok(())
    }

    pub fn generator(&self) -> Result<GeneratorSpec> {
        Ok(GeneratorSpec::preset(&self.preset, self.count, self.length, self.seed)?)
    }

    /// Split counts for a dataset of `n` sequences.
    pub fn proportions(&self, n: usize) -> Result<(usize, usize, usize)> {
        match self.split {
            Some([a, b, c]) if a + b + c == n => Ok((a, b, c)),
            Some(s) => Err(CliError::Config(format!("split {s:?} does not sum to {n} sequences"))),
            None => {
                let a = n / 2;
                let b = n / 4;
                Ok((a, b, n - a - b))
            }
        }
    }
}

fn parse<T: std::str::FromStr<Err = shqmm_core::Error>>(s: &str) -> Result<T> {
    Ok(s.parse()?)
}
