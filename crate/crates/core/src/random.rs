//! Seeded randomness shared by initialization, presets and tests.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMatrix, C64};
use crate::quantum::StiefelPoint;

/// Deterministic, platform-independent generator.
#[derive(Debug, Clone)]
pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn seed(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.0.gen::<f64>()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.0.gen_range(0..n)
    }

    /// Draws an index from a discrete distribution (weights need not be normalized).
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut u = self.uniform() * total;
        for (i, &w) in weights.iter().enumerate() {
            if u < w {
                return i;
            }
            u -= w;
        }
        // Rounding can leave u just past the last positive weight.
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }

    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        use rand::seq::SliceRandom;
        xs.shuffle(&mut self.0);
    }

    pub fn complex_normal(&mut self) -> C64 {
        C64::new(self.normal(), self.normal()) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn complex_matrix(&mut self, rows: usize, cols: usize) -> CMatrix {
        // Fill column by column so the draw order is independent of storage.
        let mut m = CMatrix::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                m[(r, c)] = self.complex_normal();
            }
        }
        m
    }
}

/// Orthonormalizes the columns of `mat` in place (modified Gram–Schmidt with
/// one re-orthogonalization pass). Returns `false` if a column collapses.
pub fn gram_schmidt(mat: &mut CMatrix) -> bool {
    let cols = mat.ncols();
    for c in 0..cols {
        let before = mat.column(c).norm();
        for _pass in 0..2 {
            for p in 0..c {
                let proj = mat.column(p).dotc(&mat.column(c));
                let q = mat.column(p).into_owned();
                mat.column_mut(c).axpy(-proj, &q, C64::new(1.0, 0.0));
            }
        }
        let n = mat.column(c).norm();
        if !(n > 1e-8 * before) || n == 0.0 {
            return false;
        }
        mat.column_mut(c).unscale_mut(n);
    }
    true
}

/// A random point on the complex Stiefel manifold `rows × cols`.
pub fn haar_stiefel(rng: &mut Rng, rows: usize, cols: usize) -> StiefelPoint {
    assert!(rows >= cols, "Stiefel point must be tall");
    loop {
        let mut m = rng.complex_matrix(rows, cols);
        if gram_schmidt(&mut m) {
            return StiefelPoint::from_unchecked(m);
        }
    }
}

/// A random PSD matrix `A A†` (unnormalized).
pub fn random_psd(rng: &mut Rng, m: usize) -> CMatrix {
    let a = rng.complex_matrix(m, m);
    &a * a.adjoint()
}
