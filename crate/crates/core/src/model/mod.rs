//! Filtering and likelihoods for the classical, quantum and split quantum
//! hidden Markov models.

mod channel;
mod hmm;
mod hqmm;
mod shqmm;

pub(crate) use channel::{Channel, Coupling, QuantumModel};
pub use hmm::HmmModel;
pub use hqmm::HqmmModel;
pub use shqmm::{aggregate_density, ShqmmModel, StepResult};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::quantum::StiefelPoint;

/// Below this a symbol probability is treated as impossible.
pub const MIN_PROB: f64 = 1e-300;

/// How a split model treats ensemble indices that fall off either end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Boundary {
    /// Indices wrap modulo `N_max`; the summed map is trace preserving.
    #[default]
    Periodic,
    /// Out-of-range source terms are dropped.
    Open,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Self::Periodic),
            "open" => Ok(Self::Open),
            other => Err(Error::Config(format!("unknown boundary mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Periodic => "periodic",
            Self::Open => "open",
        })
    }
}

/// A quantum model whose Kraus operators are parameterized by a Stiefel point.
pub trait KrausModel: SequenceModel + QuantumModel + Clone {
    fn point(&self) -> StiefelPoint;

    /// Same structure and initial state with operators split from `point`.
    fn with_point(&self, point: &StiefelPoint) -> Result<Self>;
}

impl KrausModel for ShqmmModel {
    fn point(&self) -> StiefelPoint {
        ShqmmModel::point(self)
    }

    fn with_point(&self, point: &StiefelPoint) -> Result<Self> {
        ShqmmModel::with_point(self, point)
    }
}

impl KrausModel for HqmmModel {
    fn point(&self) -> StiefelPoint {
        HqmmModel::point(self)
    }

    fn with_point(&self, point: &StiefelPoint) -> Result<Self> {
        HqmmModel::with_point(self, point)
    }
}

/// Anything that assigns a log-likelihood to a symbol sequence.
pub trait SequenceModel {
    fn dim_o(&self) -> usize;

    /// Natural-log likelihood of `seq`.
    fn loglik(&self, seq: &[usize]) -> Result<f64>;
}

pub(crate) fn check_symbol(y: usize, dim_o: usize) -> Result<()> {
    if y >= dim_o {
        return Err(Error::SymbolOutOfRange { symbol: y, dim_o });
    }
    Ok(())
}

/// Scaled forward pass: `Σ_t ln s_t`.
pub(crate) fn quantum_loglik(model: &impl QuantumModel, seq: &[usize]) -> Result<f64> {
    let ch = model.channel();
    let dim_o = ch.bundle.dim_o();
    let m = ch.bundle.m();
    let mut cur = model.initial().to_vec();
    let mut next = cur.clone();
    let mut tmp = CMatrix::zeros(m, m);
    let mut ll = 0.0;
    for &y in seq {
        check_symbol(y, dim_o)?;
        let s = ch.apply(y, &cur, &mut next, &mut tmp);
        if !(s >= MIN_PROB) {
            return Err(Error::Underflow { prob: s });
        }
        let inv = C64::new(1.0 / s, 0.0);
        for x in next.iter_mut() {
            *x *= inv;
        }
        std::mem::swap(&mut cur, &mut next);
        ll += s.ln();
    }
    Ok(ll)
}

/// `P(y)` for every symbol from the current ensemble.
pub(crate) fn quantum_symbol_distribution(ch: Channel<'_>, state: &[CMatrix]) -> Vec<f64> {
    let m = ch.bundle.m();
    let mut out = vec![CMatrix::zeros(m, m); state.len()];
    let mut tmp = CMatrix::zeros(m, m);
    (0..ch.bundle.dim_o())
        .map(|y| ch.apply(y, state, &mut out, &mut tmp))
        .collect()
}
