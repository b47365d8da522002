use std::time::Instant;

use crate::error::{Error, Result};
use crate::learning::{cayley_update, init_ensemble, init_stiefel, loss_and_grad, EnsembleInit, GradientBlock};
use crate::linalg::C64;
use crate::metrics::da_report;
use crate::model::{Boundary, HqmmModel, KrausModel, ShqmmModel};
use crate::quantum::{DensityMatrix, StiefelPoint};

/// Halvings of `τ` tried when a Cayley step fails.
pub const MAX_STEP_RETRIES: usize = 8;

/// Mixed into the seed for the initial ensemble so it does not share a
/// stream with the Kraus initialization.
const ENSEMBLE_SEED_SALT: u64 = 0x5851_f42d_4c95_7f2d;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Learning rate.
    pub tau: f64,
    /// Per-epoch learning-rate decay.
    pub alpha: f64,
    /// Momentum.
    pub beta: f64,
    pub epochs: usize,
    pub batches: usize,
    pub seed: u64,
    pub ensemble_init: EnsembleInit,
    pub m: usize,
    pub dim_o: usize,
    pub n_max: usize,
    pub k: usize,
    pub boundary: Boundary,
    pub loss_scale: LossScale,
}

/// Normalization of the objective the optimizer descends on. Reported
/// losses are always the per-sequence mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossScale {
    /// Mean over sequences of `−ln P(seq)`.
    PerSequence,
    /// The same divided by the batch's mean sequence length, so the step
    /// size does not grow with sequence length.
    #[default]
    PerSymbol,
}

impl std::str::FromStr for LossScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-sequence" => Ok(Self::PerSequence),
            "per-symbol" => Ok(Self::PerSymbol),
            other => Err(Error::Config(format!("unknown loss scale `{other}`"))),
        }
    }
}

impl std::fmt::Display for LossScale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::PerSequence => "per-sequence",
            Self::PerSymbol => "per-symbol",
        })
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            tau: 0.95,
            alpha: 0.95,
            beta: 0.90,
            epochs: 30,
            batches: 1,
            seed: 0,
            ensemble_init: EnsembleInit::UniformMixed,
            m: 2,
            dim_o: 2,
            n_max: 3,
            k: 1,
            boundary: Boundary::Periodic,
            loss_scale: LossScale::PerSymbol,
        }
    }
}

impl TrainConfig {
    /// Optimizer settings only.
    pub fn validate_optimizer(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return fail(format!("tau must be a finite non-negative number, got {}", self.tau));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return fail(format!("alpha must be in (0, 1], got {}", self.alpha));
        }
        if !(self.beta >= 0.0 && self.beta < 1.0) {
            return fail(format!("beta must be in [0, 1), got {}", self.beta));
        }
        if self.epochs == 0 || self.batches == 0 {
            return fail("epochs and batches must be at least 1".into());
        }
        Ok(())
    }

    /// Optimizer settings plus the split-model structure.
    pub fn validate(&self) -> Result<()> {
        self.validate_optimizer()?;
        if self.m == 0 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        if self.dim_o < 2 {
            return Err(Error::Config(format!("dimO must be at least 2, got {}", self.dim_o)));
        }
        if 2 * self.k + 1 > self.n_max {
            return Err(Error::Config(format!(
                "2k+1 = {} exceeds N_max = {}",
                2 * self.k + 1,
                self.n_max
            )));
        }
        Ok(())
    }

    pub fn ensemble_seed(&self) -> u64 {
        self.seed ^ ENSEMBLE_SEED_SALT
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_loss: f64,
    pub val_da: Option<f64>,
    /// Learning rate after this epoch's decay.
    pub tau: f64,
    /// Seconds since training started.
    pub elapsed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    /// One entry per `(epoch, batch)`, evaluated before that batch's update.
    pub losses: Vec<f64>,
    pub epochs: Vec<EpochRecord>,
    pub final_point: StiefelPoint,
    pub wall_time: f64,
}

/// The initial split model for `cfg`: seeded Kraus point and ensemble.
pub fn initial_shqmm(cfg: &TrainConfig) -> Result<ShqmmModel> {
    cfg.validate()?;
    let j = 2 * cfg.k + 1;
    let point = init_stiefel(cfg.m, j, cfg.dim_o, cfg.seed)?;
    let ens = init_ensemble(cfg.m, cfg.n_max, cfg.ensemble_init, cfg.ensemble_seed())?;
    let bundle = crate::quantum::split_point(&point, cfg.dim_o, j, cfg.m)?;
    ShqmmModel::new(bundle, ens, cfg.k, cfg.boundary)
}

/// The initial HQMM with `w` operators per symbol; `n_max`, `k` and the
/// boundary in `cfg` are ignored.
pub fn initial_hqmm(cfg: &TrainConfig, w: usize) -> Result<HqmmModel> {
    cfg.validate_optimizer()?;
    if w == 0 || cfg.m == 0 || cfg.dim_o < 2 {
        return Err(Error::Config("w, m must be >= 1 and dimO >= 2".into()));
    }
    let point = init_stiefel(cfg.m, w, cfg.dim_o, cfg.seed)?;
    let ens = init_ensemble(cfg.m, 1, cfg.ensemble_init, cfg.ensemble_seed())?;
    let rho0 = ens.into_members().remove(0);
    let bundle = crate::quantum::split_point(&point, cfg.dim_o, w, cfg.m)?;
    HqmmModel::new(bundle, DensityMatrix::new(rho0)?)
}

/// Trains a split model from its seeded initialization.
pub fn train(cfg: &TrainConfig, train: &[Vec<usize>], val: &[Vec<usize>]) -> Result<(ShqmmModel, TrainHistory)> {
    let model = initial_shqmm(cfg)?;
    check_data(cfg.dim_o, train, val)?;
    fit(model, cfg, train, val)
}

/// Trains an HQMM with `w` operators per symbol using the same optimizer.
pub fn train_hqmm(
    cfg: &TrainConfig,
    w: usize,
    train: &[Vec<usize>],
    val: &[Vec<usize>],
) -> Result<(HqmmModel, TrainHistory)> {
    let model = initial_hqmm(cfg, w)?;
    check_data(cfg.dim_o, train, val)?;
    fit(model, cfg, train, val)
}

fn check_data(dim_o: usize, train: &[Vec<usize>], val: &[Vec<usize>]) -> Result<()> {
    if train.is_empty() || train.iter().any(Vec::is_empty) {
        return Err(Error::EmptyDataset);
    }
    for seq in train.iter().chain(val) {
        if let Some(&y) = seq.iter().find(|&&y| y >= dim_o) {
            return Err(Error::SymbolOutOfRange { symbol: y, dim_o });
        }
    }
    Ok(())
}

/// Splits `data` into `b` contiguous, near-equal batches.
pub fn split_batches(data: &[Vec<usize>], b: usize) -> Result<Vec<&[Vec<usize>]>> {
    if b == 0 || b > data.len() {
        return Err(Error::Config(format!(
            "cannot split {} sequences into {b} batches",
            data.len()
        )));
    }
    let base = data.len() / b;
    let extra = data.len() % b;
    let mut out = Vec::with_capacity(b);
    let mut start = 0;
    for i in 0..b {
        let len = base + usize::from(i < extra);
        out.push(&data[start..start + len]);
        start += len;
    }
    Ok(out)
}

/// Gradient descent on the Stiefel manifold with momentum and per-epoch
/// learning-rate decay, starting from `model`.
pub fn fit<M: KrausModel>(
    mut model: M,
    cfg: &TrainConfig,
    train: &[Vec<usize>],
    val: &[Vec<usize>],
) -> Result<(M, TrainHistory)> {
    cfg.validate_optimizer()?;
    check_data(model.dim_o(), train, val)?;
    let batches = split_batches(train, cfg.batches)?;
    let start = Instant::now();

    let mut point = model.point();
    let (rows, cols) = point.matrix().shape();
    let mut momentum = GradientBlock::zeros(rows, cols);
    let mut tau = cfg.tau;
    let mut losses = Vec::with_capacity(cfg.epochs * cfg.batches);
    let mut epochs = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let abort = |batch: usize, err: Error, losses: &[f64]| Error::TrainingAborted {
            epoch,
            batch,
            reason: err.to_string(),
            partial_losses: losses.to_vec(),
        };
        let first = losses.len();
        for (b, batch) in batches.iter().enumerate() {
            let (loss, grad) = loss_and_grad(&model, batch).map_err(|e| abort(b, e, &losses))?;
            losses.push(loss);
            let grad = match cfg.loss_scale {
                LossScale::PerSequence => grad,
                LossScale::PerSymbol => {
                    let symbols: usize = batch.iter().map(Vec::len).sum();
                    GradientBlock(grad.0 * C64::new(batch.len() as f64 / symbols as f64, 0.0))
                }
            };

            let beta = C64::new(cfg.beta, 0.0);
            let fresh = C64::new(1.0 - cfg.beta, 0.0);
            momentum = GradientBlock(momentum.0 * beta + grad.0 * fresh);

            point = step_with_retries(&point, &momentum, tau).map_err(|e| abort(b, e, &losses))?;
            model = model.with_point(&point).map_err(|e| abort(b, e, &losses))?;
        }
        tau *= cfg.alpha;

        let mean_loss = losses[first..].iter().sum::<f64>() / (losses.len() - first) as f64;
        let val_da = if val.is_empty() {
            None
        } else {
            let report = da_report(&model, val).map_err(|e| abort(batches.len(), e, &losses))?;
            Some(report.mean)
        };
        epochs.push(EpochRecord {
            epoch: epoch + 1,
            mean_loss,
            val_da,
            tau,
            elapsed: start.elapsed().as_secs_f64(),
        });
    }

    let history = TrainHistory {
        losses,
        epochs,
        final_point: point,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((model, history))
}

fn step_with_retries(point: &StiefelPoint, grad: &GradientBlock, tau: f64) -> Result<StiefelPoint> {
    let mut step = tau;
    let mut last = None;
    for _ in 0..=MAX_STEP_RETRIES {
        match cayley_update(point, grad, step) {
            Ok(p) => return Ok(p),
            Err(e @ Error::StepFailure(_)) => {
                last = Some(e);
                step *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::StepFailure("no step attempted".into())))
}
