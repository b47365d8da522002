use nalgebra::{DMatrix, DVector};

use crate::linalg::{CMatrix, C64};
use crate::model::{HmmModel, HqmmModel};
use crate::quantum::{DensityMatrix, KrausBundle};
use crate::random::{haar_stiefel, Rng};

pub const PAPER_CLASSICAL: &str = "paper-classical";
pub const SYNTHETIC_QUANTUM: &str = "synthetic-quantum";

#[rustfmt::skip]
const T_ROWS: [[f64; 6]; 6] = [
    [0.80, 0.01, 0.00, 0.10, 0.30, 0.00],
    [0.02, 0.02, 0.10, 0.15, 0.05, 0.00],
    [0.08, 0.03, 0.10, 0.40, 0.05, 0.50],
    [0.05, 0.04, 0.50, 0.35, 0.00, 0.50],
    [0.03, 0.50, 0.03, 0.00, 0.60, 0.00],
    [0.02, 0.40, 0.27, 0.00, 0.00, 0.00],
];

#[rustfmt::skip]
const C_ROWS: [[f64; 6]; 6] = [
    [0.20, 0.00, 0.05, 0.95, 0.01, 0.05],
    [0.70, 0.10, 0.05, 0.01, 0.05, 0.05],
    [0.05, 0.80, 0.10, 0.02, 0.05, 0.04],
    [0.04, 0.04, 0.02, 0.00, 0.84, 0.11],
    [0.01, 0.03, 0.70, 0.01, 0.02, 0.20],
    [0.00, 0.03, 0.08, 0.01, 0.03, 0.55],
];

fn from_rows(rows: &[[f64; 6]; 6]) -> DMatrix<f64> {
    DMatrix::from_fn(6, 6, |r, c| rows[r][c])
}

/// The 6-state, 6-symbol classical generator with a uniform initial state.
///
/// Construction validates both matrices as column-stochastic, so a
/// transcription error panics here rather than producing skewed data.
pub fn paper_classical() -> HmmModel {
    HmmModel::new(
        from_rows(&T_ROWS),
        from_rows(&C_ROWS),
        DVector::from_element(6, 1.0 / 6.0),
    )
    .expect("preset matrices are column-stochastic")
}

/// Probability that a measurement basis state reports its own symbol.
const SYNTHETIC_PEAK: f64 = 0.95;

/// Seeded random HQMM with `m = 6`, `dimO = 6`, one Kraus operator per
/// symbol, starting maximally mixed.
///
/// Each `K_y = V_y √E_y` pairs a POVM element `E_y = W diag(p_y) W†` (shared
/// random basis `W`, outcome `y` peaked on basis state `y`) with a random
/// unitary `V_y`, so `Σ_y K_y†K_y = Σ_y E_y = I`.
pub fn synthetic_quantum(seed: u64) -> HqmmModel {
    const M: usize = 6;
    let mut rng = Rng::seed(seed);
    let basis = haar_stiefel(&mut rng, M, M).into_matrix();

    // p[y][h]: column-stochastic over y for each basis state h.
    let mut p = [[0.0f64; M]; M];
    for h in 0..M {
        let noise: Vec<f64> = (0..M).map(|y| if y == h { 0.0 } else { rng.uniform() }).collect();
        let total: f64 = noise.iter().sum();
        for (y, row) in p.iter_mut().enumerate() {
            row[h] = if y == h {
                SYNTHETIC_PEAK
            } else {
                (1.0 - SYNTHETIC_PEAK) * noise[y] / total
            };
        }
    }

    let ops: Vec<CMatrix> = (0..M)
        .map(|y| {
            let unitary = haar_stiefel(&mut rng, M, M).into_matrix();
            let sqrt_diag = CMatrix::from_fn(M, M, |r, c| {
                if r == c {
                    C64::new(p[y][r].sqrt(), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            unitary * &basis * sqrt_diag * basis.adjoint()
        })
        .collect();
    let bundle = KrausBundle::new(M, 1, ops).expect("six square operators");
    HqmmModel::new(bundle, DensityMatrix::maximally_mixed(M)).expect("POVM construction is complete")
}
