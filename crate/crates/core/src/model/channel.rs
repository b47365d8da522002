//! The linear map behind both quantum models: ensemble slot `i` receives
//! `K_y^c ρ^(src(i,c)) K_y^c†` from every class `c` whose source slot exists.

use crate::linalg::{self, CMatrix};
use crate::quantum::KrausBundle;

use super::Boundary;

#[derive(Debug, Clone, Copy)]
pub enum Coupling {
    /// One slot; every class reads slot 0 (plain HQMM).
    Single,
    /// `k`-local coupling over `n_slots` conditional matrices.
    Split {
        n_slots: usize,
        k: usize,
        boundary: Boundary,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct Channel<'a> {
    pub bundle: &'a KrausBundle,
    pub coupling: Coupling,
}

impl<'a> Channel<'a> {
    pub fn n_slots(&self) -> usize {
        match self.coupling {
            Coupling::Single => 1,
            Coupling::Split { n_slots, .. } => n_slots,
        }
    }

    /// Slot read by class `c` when writing slot `i`.
    #[inline]
    pub fn source(&self, i: usize, c: usize) -> Option<usize> {
        match self.coupling {
            Coupling::Single => Some(0),
            Coupling::Split {
                n_slots,
                k,
                boundary,
            } => {
                // shift j' = c − k, source = i − j'
                let s = i as isize - (c as isize - k as isize);
                match boundary {
                    Boundary::Periodic => Some(s.rem_euclid(n_slots as isize) as usize),
                    Boundary::Open => (0..n_slots as isize).contains(&s).then_some(s as usize),
                }
            }
        }
    }

    /// `out = Φ_y(input)`; returns the total trace of `out`.
    pub fn apply(&self, y: usize, input: &[CMatrix], out: &mut [CMatrix], tmp: &mut CMatrix) -> f64 {
        let mut total = 0.0;
        for (i, dst) in out.iter_mut().enumerate() {
            dst.fill(linalg::C64::new(0.0, 0.0));
            for c in 0..self.bundle.classes() {
                if let Some(s) = self.source(i, c) {
                    linalg::sandwich_acc(dst, self.bundle.op(y, c), &input[s], tmp);
                }
            }
            total += linalg::trace_re(dst);
        }
        total
    }

    /// `out = Φ_y†(effect)`, the Heisenberg-picture adjoint of [`Self::apply`].
    pub fn apply_adjoint(&self, y: usize, effect: &[CMatrix], out: &mut [CMatrix], tmp: &mut CMatrix) {
        for o in out.iter_mut() {
            o.fill(linalg::C64::new(0.0, 0.0));
        }
        for (i, e) in effect.iter().enumerate() {
            for c in 0..self.bundle.classes() {
                if let Some(s) = self.source(i, c) {
                    linalg::adjoint_sandwich_acc(&mut out[s], self.bundle.op(y, c), e, tmp);
                }
            }
        }
    }
}

/// The quantum models viewed as a channel plus an initial ensemble.
/// Sealed: not nameable outside the crate.
pub trait QuantumModel {
    fn channel(&self) -> Channel<'_>;
    fn initial(&self) -> &[CMatrix];
}
