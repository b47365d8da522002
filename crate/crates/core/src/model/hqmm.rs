use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::quantum::{self, DensityMatrix, KrausBundle, StiefelPoint};

use super::{check_symbol, Channel, Coupling, QuantumModel, SequenceModel, MIN_PROB};

/// Hidden quantum Markov model with `w` Kraus operators per symbol.
///
/// The bundle's classes play the role of the auxiliary index `ω_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct HqmmModel {
    bundle: KrausBundle,
    rho0: DensityMatrix,
}

impl HqmmModel {
    pub fn new(bundle: KrausBundle, rho0: DensityMatrix) -> Result<Self> {
        if bundle.m() != rho0.dim() {
            return Err(Error::Shape(format!(
                "operator dimension {} != state dimension {}",
                bundle.m(),
                rho0.dim()
            )));
        }
        let r = bundle.completeness_residual();
        if !(r <= quantum::STIEFEL_TOL) {
            return Err(Error::Input(format!("Kraus completeness residual {r:e}")));
        }
        Ok(Self { bundle, rho0 })
    }

    pub fn with_point(&self, point: &StiefelPoint) -> Result<Self> {
        let bundle = quantum::split_point(point, self.dim_o(), self.w(), self.m())?;
        Self::new(bundle, self.rho0.clone())
    }

    pub fn bundle(&self) -> &KrausBundle {
        &self.bundle
    }

    pub fn rho0(&self) -> &DensityMatrix {
        &self.rho0
    }

    pub fn m(&self) -> usize {
        self.bundle.m()
    }

    /// Kraus operators per symbol.
    pub fn w(&self) -> usize {
        self.bundle.classes()
    }

    pub fn point(&self) -> StiefelPoint {
        quantum::stack_bundle(&self.bundle)
    }

    pub fn param_count(&self) -> usize {
        quantum::param_count(self.m(), self.w())
    }

    /// Posterior state and probability after reading `y`.
    pub fn filter(&self, rho: &DensityMatrix, y: usize) -> Result<(DensityMatrix, f64)> {
        check_symbol(y, self.dim_o())?;
        if rho.dim() != self.m() {
            return Err(Error::Shape("state dimension mismatch".into()));
        }
        let m = self.m();
        let mut out = [CMatrix::zeros(m, m)];
        let mut tmp = CMatrix::zeros(m, m);
        let p = self
            .channel()
            .apply(y, std::slice::from_ref(rho.matrix()), &mut out, &mut tmp);
        if !(p >= MIN_PROB) {
            return Err(Error::Underflow { prob: p });
        }
        let [post] = out;
        Ok((DensityMatrix::from_unchecked(post * C64::new(1.0 / p, 0.0)), p))
    }

    pub fn symbol_distribution(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.m() {
            return Err(Error::Shape("state dimension mismatch".into()));
        }
        Ok(super::quantum_symbol_distribution(
            self.channel(),
            std::slice::from_ref(rho.matrix()),
        ))
    }

    pub fn sequence_loglik(&self, seq: &[usize]) -> Result<f64> {
        super::quantum_loglik(self, seq)
    }
}

impl QuantumModel for HqmmModel {
    fn channel(&self) -> Channel<'_> {
        Channel {
            bundle: &self.bundle,
            coupling: Coupling::Single,
        }
    }

    fn initial(&self) -> &[CMatrix] {
        std::slice::from_ref(self.rho0.matrix())
    }
}

impl SequenceModel for HqmmModel {
    fn dim_o(&self) -> usize {
        self.bundle.dim_o()
    }

    fn loglik(&self, seq: &[usize]) -> Result<f64> {
        self.sequence_loglik(seq)
    }
}
