//! Cayley-transform retraction on the complex Stiefel manifold.
//!
//! With `U = [G, κ]` and `V = [κ, −G]` the update
//! `κ ← κ − τ U (I + τ/2 V†U)⁻¹ V†κ` equals `(I + τ/2 A)⁻¹(I − τ/2 A) κ` for the
//! skew-Hermitian `A = Gκ† − κG†`, so only a `2m×2m` system is solved.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::quantum::{StiefelPoint, STIEFEL_TOL};

use super::GradientBlock;

pub fn cayley_update(kappa: &StiefelPoint, grad: &GradientBlock, tau: f64) -> Result<StiefelPoint> {
    let k = kappa.matrix();
    let g = grad.matrix();
    if g.shape() != k.shape() {
        return Err(Error::Shape(format!(
            "gradient {:?} does not match κ {:?}",
            g.shape(),
            k.shape()
        )));
    }
    if tau == 0.0 || g.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
        return Ok(kappa.clone());
    }
    if !tau.is_finite() || !linalg::all_finite(g) {
        return Err(Error::StepFailure("non-finite step size or gradient".into()));
    }
    let (n, m) = k.shape();
    let mut u = CMatrix::zeros(n, 2 * m);
    u.view_mut((0, 0), (n, m)).copy_from(g);
    u.view_mut((0, m), (n, m)).copy_from(k);
    let mut v = CMatrix::zeros(n, 2 * m);
    v.view_mut((0, 0), (n, m)).copy_from(k);
    v.view_mut((0, m), (n, m)).copy_from(&(-g));

    let half = C64::new(0.5 * tau, 0.0);
    let inner = linalg::identity(2 * m) + v.ad_mul(&u) * half;
    let rhs = v.ad_mul(k);
    let x = inner
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::StepFailure("singular 2m×2m Cayley system".into()))?;
    let next = k - &u * x * C64::new(tau, 0.0);
    if !linalg::all_finite(&next) {
        return Err(Error::StepFailure("non-finite Cayley update".into()));
    }
    let r = linalg::orthonormality_residual(&next);
    if !(r <= STIEFEL_TOL) {
        return Err(Error::StepFailure(format!("update left the manifold (residual {r:e})")));
    }
    Ok(StiefelPoint::from_unchecked(next))
}

/// `‖κ₁†κ₂ − I‖₂`; zero when the points coincide.
pub fn stiefel_distance(a: &StiefelPoint, b: &StiefelPoint) -> Result<f64> {
    if a.matrix().shape() != b.matrix().shape() {
        return Err(Error::Shape(format!(
            "cannot compare points of shape {:?} and {:?}",
            a.matrix().shape(),
            b.matrix().shape()
        )));
    }
    let d = a.matrix().ad_mul(b.matrix()) - linalg::identity(a.cols());
    Ok(linalg::spectral_norm(&d))
}
