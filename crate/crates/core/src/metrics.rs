//! Description accuracy (DA): `f(1 + log_ι P(D|M) / ℓ)`.
//!
//! `DA = 1` means perfect prediction and `DA = 0` matches a uniform random
//! predictor over `ι` symbols. The squashing `f` is the identity on `[0, 1]`
//! and `(1 − e^{−x/4}) / (1 + e^{−x/4})` below zero, so scores stay in `(−1, 1]`.

use crate::error::{Error, Result};
use crate::model::SequenceModel;

pub fn f_nonlinear(x: f64) -> Result<f64> {
    if x > 1.0 || x.is_nan() {
        return Err(Error::Domain(format!("f is defined on (-inf, 1], got {x}")));
    }
    if x >= 0.0 {
        Ok(x)
    } else {
        let e = (-0.25 * x).exp();
        Ok((1.0 - e) / (1.0 + e))
    }
}

/// DA of a single sequence from its natural-log likelihood.
pub fn da_score(loglik: f64, len: usize, iota: usize) -> Result<f64> {
    if iota < 2 {
        return Err(Error::Domain(format!("alphabet size must be >= 2, got {iota}")));
    }
    if len == 0 {
        return Err(Error::Domain("sequence length must be positive".into()));
    }
    if loglik > 0.0 || loglik.is_nan() {
        return Err(Error::Domain(format!("log-likelihood must be <= 0, got {loglik}")));
    }
    let log_iota = loglik / (iota as f64).ln();
    f_nonlinear(1.0 + log_iota / len as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DaReport {
    pub per_sequence: Vec<f64>,
    pub lengths: Vec<usize>,
    pub iota: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl DaReport {
    /// Builds a report from `(loglik, length)` pairs.
    pub fn from_logliks(logliks: &[(f64, usize)], iota: usize) -> Result<Self> {
        if logliks.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let per_sequence = logliks
            .iter()
            .map(|&(ll, len)| da_score(ll, len, iota))
            .collect::<Result<Vec<_>>>()?;
        let (mean, std) = mean_std(&per_sequence);
        Ok(Self {
            per_sequence,
            lengths: logliks.iter().map(|&(_, l)| l).collect(),
            iota,
            mean,
            std,
        })
    }
}

/// Scores every sequence under `model` with `ι = dimO`.
pub fn da_report<M: SequenceModel + ?Sized>(model: &M, sequences: &[Vec<usize>]) -> Result<DaReport> {
    let lls = sequences
        .iter()
        .map(|s| Ok((model.loglik(s)?, s.len())))
        .collect::<Result<Vec<_>>>()?;
    DaReport::from_logliks(&lls, model.dim_o())
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
