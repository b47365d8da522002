//! JSON checkpoints. Floats are written in shortest round-trip form and
//! parsed exactly, so a reloaded model reproduces likelihoods bit for bit.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use shqmm_core::{
    split_point, CMatrix, ConditionalDensityEnsemble, DensityMatrix, HmmModel, HqmmModel, SequenceModel,
    ShqmmModel, StiefelPoint, C64,
};

use crate::config::{Family, ModelSection, TrainSection};
use crate::error::{CliError, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Complex matrix as rows of `[re, im]` pairs.
pub type ComplexRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone)]
pub enum AnyModel {
    Hmm(HmmModel),
    Hqmm(HqmmModel),
    Shqmm(ShqmmModel),
}

impl AnyModel {
    pub fn as_sequence_model(&self) -> &dyn SequenceModel {
        match self {
            AnyModel::Hmm(m) => m,
            AnyModel::Hqmm(m) => m,
            AnyModel::Shqmm(m) => m,
        }
    }

    pub fn family(&self) -> Family {
        match self {
            AnyModel::Hmm(_) => Family::Hmm,
            AnyModel::Hqmm(_) => Family::Hqmm,
            AnyModel::Shqmm(_) => Family::Shqmm,
        }
    }

    pub fn kappa(&self) -> Option<StiefelPoint> {
        match self {
            AnyModel::Hmm(_) => None,
            AnyModel::Hqmm(m) => Some(m.point()),
            AnyModel::Shqmm(m) => Some(m.point()),
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            AnyModel::Hmm(m) => m.param_count(),
            AnyModel::Hqmm(m) => m.param_count(),
            AnyModel::Shqmm(m) => m.param_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmmParams {
    /// Column-stochastic, `transition[to][from]`.
    pub transition: Vec<Vec<f64>>,
    /// Column-stochastic, `emission[symbol][state]`.
    pub emission: Vec<Vec<f64>>,
    pub x0: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FinalMetrics {
    pub final_mean_loss: Option<f64>,
    pub final_val_da: Option<f64>,
    pub epochs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub family: Family,
    pub structure: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<ComplexRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_ensemble: Option<Vec<ComplexRows>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hmm: Option<HmmParams>,
    pub seed: u64,
    pub hyperparameters: TrainSection,
    pub metrics: FinalMetrics,
}

fn to_rows(m: &CMatrix) -> ComplexRows {
    m.row_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()
}

fn from_rows(rows: &ComplexRows) -> Result<CMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if n == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(CliError::Config("ragged or empty complex matrix in checkpoint".into()));
    }
    Ok(CMatrix::from_fn(n, cols, |r, c| C64::new(rows[r][c][0], rows[r][c][1])))
}

fn real_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn real_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || rows.iter().any(|r| r.len() != cols) {
        return Err(CliError::Config("ragged or empty real matrix in checkpoint".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |r, c| rows[r][c]))
}

impl Checkpoint {
    pub fn new(
        model: &AnyModel,
        structure: &ModelSection,
        hyper: &TrainSection,
        metrics: FinalMetrics,
    ) -> Self {
        let mut structure = structure.clone();
        structure.family = model.family();
        let (kappa, initial_ensemble, hmm) = match model {
            AnyModel::Hmm(m) => (
                None,
                None,
                Some(HmmParams {
                    transition: real_rows(m.transition()),
                    emission: real_rows(m.emission()),
                    x0: m.x0().iter().copied().collect(),
                }),
            ),
            AnyModel::Hqmm(m) => (
                Some(to_rows(m.point().matrix())),
                Some(vec![to_rows(m.rho0().matrix())]),
                None,
            ),
            AnyModel::Shqmm(m) => (
                Some(to_rows(m.point().matrix())),
                Some(m.ensemble0().members().iter().map(to_rows).collect()),
                None,
            ),
        };
        Self {
            format_version: FORMAT_VERSION,
            family: model.family(),
            structure,
            kappa,
            initial_ensemble,
            hmm,
            seed: hyper.seed,
            hyperparameters: hyper.clone(),
            metrics,
        }
    }

    pub fn model(&self) -> Result<AnyModel> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::Config(format!(
                "unsupported checkpoint format version {}",
                self.format_version
            )));
        }
        let s = &self.structure;
        let missing = |what: &str| CliError::Config(format!("{} checkpoint is missing `{what}`", self.family));
        match self.family {
            Family::Hmm => {
                let p = self.hmm.as_ref().ok_or_else(|| missing("hmm"))?;
                let model = HmmModel::new(
                    real_matrix(&p.transition)?,
                    real_matrix(&p.emission)?,
                    DVector::from_vec(p.x0.clone()),
                )?;
                Ok(AnyModel::Hmm(model))
            }
            Family::Hqmm | Family::Shqmm => {
                let kappa = StiefelPoint::new(from_rows(self.kappa.as_ref().ok_or_else(|| missing("kappa"))?)?)?;
                let members = self
                    .initial_ensemble
                    .as_ref()
                    .ok_or_else(|| missing("initial_ensemble"))?
                    .iter()
                    .map(from_rows)
                    .collect::<Result<Vec<_>>>()?;
                if self.family == Family::Hqmm {
                    let bundle = split_point(&kappa, s.dim_o, s.w, s.m)?;
                    let rho = members.into_iter().next().ok_or_else(|| missing("initial state"))?;
                    Ok(AnyModel::Hqmm(HqmmModel::new(bundle, DensityMatrix::new(rho)?)?))
                } else {
                    let bundle = split_point(&kappa, s.dim_o, 2 * s.k + 1, s.m)?;
                    let ens = ConditionalDensityEnsemble::new(members)?;
                    let boundary = s.boundary.parse()?;
                    Ok(AnyModel::Shqmm(ShqmmModel::new(bundle, ens, s.k, boundary)?))
                }
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("checkpoint serializes");
        std::fs::write(path, text + "\n").map_err(CliError::io(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}
