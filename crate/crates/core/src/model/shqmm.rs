use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::quantum::{self, ConditionalDensityEnsemble, DensityMatrix, KrausBundle, StiefelPoint};

use super::{check_symbol, Boundary, Channel, Coupling, QuantumModel, SequenceModel, MIN_PROB};

/// Split hidden quantum Markov model with `k`-local coupling between
/// `N_max` conditional density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ShqmmModel {
    bundle: KrausBundle,
    ensemble0: ConditionalDensityEnsemble,
    k: usize,
    boundary: Boundary,
}

/// Unnormalized ensemble after reading one symbol, and its total trace.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub members: Vec<CMatrix>,
    pub trace: f64,
}

impl ShqmmModel {
    pub fn new(
        bundle: KrausBundle,
        ensemble0: ConditionalDensityEnsemble,
        k: usize,
        boundary: Boundary,
    ) -> Result<Self> {
        let j = 2 * k + 1;
        if bundle.classes() != j {
            return Err(Error::Shape(format!(
                "k={k} needs {j} operator classes, bundle has {}",
                bundle.classes()
            )));
        }
        if j > ensemble0.n_max() {
            return Err(Error::Config(format!(
                "2k+1 = {j} exceeds N_max = {}",
                ensemble0.n_max()
            )));
        }
        if bundle.m() != ensemble0.dim() {
            return Err(Error::Shape(format!(
                "operator dimension {} != ensemble dimension {}",
                bundle.m(),
                ensemble0.dim()
            )));
        }
        let r = bundle.completeness_residual();
        if !(r <= quantum::STIEFEL_TOL) {
            return Err(Error::Input(format!("Kraus completeness residual {r:e}")));
        }
        Ok(Self {
            bundle,
            ensemble0,
            k,
            boundary,
        })
    }

    /// Same structure and initial ensemble, new operators from `point`.
    pub fn with_point(&self, point: &StiefelPoint) -> Result<Self> {
        let bundle = quantum::split_point(point, self.dim_o(), self.j(), self.m())?;
        Self::new(bundle, self.ensemble0.clone(), self.k, self.boundary)
    }

    pub fn bundle(&self) -> &KrausBundle {
        &self.bundle
    }

    pub fn ensemble0(&self) -> &ConditionalDensityEnsemble {
        &self.ensemble0
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn j(&self) -> usize {
        2 * self.k + 1
    }

    pub fn m(&self) -> usize {
        self.bundle.m()
    }

    pub fn n_max(&self) -> usize {
        self.ensemble0.n_max()
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn point(&self) -> StiefelPoint {
        quantum::stack_bundle(&self.bundle)
    }

    pub fn param_count(&self) -> usize {
        quantum::param_count(self.m(), self.j())
    }

    fn check_ensemble(&self, ens: &ConditionalDensityEnsemble) -> Result<()> {
        if ens.n_max() != self.n_max() || ens.dim() != self.m() {
            return Err(Error::Shape(format!(
                "ensemble is {}x{}x{}, model expects {}x{}x{}",
                ens.n_max(),
                ens.dim(),
                ens.dim(),
                self.n_max(),
                self.m(),
                self.m()
            )));
        }
        Ok(())
    }

    /// Applies the symbol-`y` branch of the channel without normalizing.
    pub fn step(&self, ens: &ConditionalDensityEnsemble, y: usize) -> Result<StepResult> {
        self.check_ensemble(ens)?;
        check_symbol(y, self.dim_o())?;
        let m = self.m();
        let mut members = vec![CMatrix::zeros(m, m); self.n_max()];
        let mut tmp = CMatrix::zeros(m, m);
        let trace = self.channel().apply(y, ens.members(), &mut members, &mut tmp);
        Ok(StepResult { members, trace })
    }

    /// Bayesian update on observing `y`: the normalized posterior ensemble
    /// and the probability of `y`.
    pub fn filter(
        &self,
        ens: &ConditionalDensityEnsemble,
        y: usize,
    ) -> Result<(ConditionalDensityEnsemble, f64)> {
        let StepResult { mut members, trace } = self.step(ens, y)?;
        if !(trace >= MIN_PROB) {
            return Err(Error::Underflow { prob: trace });
        }
        let inv = C64::new(1.0 / trace, 0.0);
        for x in members.iter_mut() {
            *x *= inv;
        }
        Ok((ConditionalDensityEnsemble::from_unchecked(members)?, trace))
    }

    /// Probability of each next symbol given the current ensemble.
    pub fn symbol_distribution(&self, ens: &ConditionalDensityEnsemble) -> Result<Vec<f64>> {
        self.check_ensemble(ens)?;
        Ok(super::quantum_symbol_distribution(self.channel(), ens.members()))
    }

    /// `ln P(seq)` starting from the initial ensemble.
    pub fn sequence_loglik(&self, seq: &[usize]) -> Result<f64> {
        super::quantum_loglik(self, seq)
    }
}

impl QuantumModel for ShqmmModel {
    fn channel(&self) -> Channel<'_> {
        Channel {
            bundle: &self.bundle,
            coupling: Coupling::Split {
                n_slots: self.n_max(),
                k: self.k,
                boundary: self.boundary,
            },
        }
    }

    fn initial(&self) -> &[CMatrix] {
        self.ensemble0.members()
    }
}

impl SequenceModel for ShqmmModel {
    fn dim_o(&self) -> usize {
        self.bundle.dim_o()
    }

    fn loglik(&self, seq: &[usize]) -> Result<f64> {
        self.sequence_loglik(seq)
    }
}

/// `Σ_n ρ^(n)`.
pub fn aggregate_density(ens: &ConditionalDensityEnsemble) -> DensityMatrix {
    ens.aggregate()
}
