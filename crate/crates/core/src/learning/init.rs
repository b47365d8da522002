use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::quantum::{ConditionalDensityEnsemble, StiefelPoint};
use crate::random::{self, Rng};

const MAX_REDRAWS: usize = 64;

/// Seeded random Kraus point of shape `(m·j·dimO) × m`.
///
/// Draws `2m` real Gaussian columns, Gram–Schmidt orthonormalizes them
/// (redrawing any column that collapses), and assembles the complex point
/// `(κ[:, :m] + i·κ[:, m:]) / √2`, which is orthonormal because the two
/// halves are mutually orthogonal real blocks. When there are fewer than
/// `2m` rows (`j·dimO = 1`) the columns are drawn complex instead.
pub fn init_stiefel(m: usize, j: usize, dim_o: usize, seed: u64) -> Result<StiefelPoint> {
    if m == 0 || j == 0 || dim_o == 0 {
        return Err(Error::Config("dimensions must be positive".into()));
    }
    let rows = m * j * dim_o;
    let mut rng = Rng::seed(seed);

    let mut point = if rows >= 2 * m {
        let basis = orthonormal_columns(&mut rng, rows, 2 * m, false)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_fn(rows, m, |r, c| C64::new(basis[(r, c)].re * s, basis[(r, c + m)].re * s))
    } else {
        orthonormal_columns(&mut rng, rows, m, true)?
    };
    // Remove rounding residue from the assembly.
    if !random::gram_schmidt(&mut point) {
        return Err(Error::StepFailure("degenerate Stiefel initialization".into()));
    }
    Ok(StiefelPoint::from_unchecked(point))
}

fn orthonormal_columns(rng: &mut Rng, rows: usize, cols: usize, complex: bool) -> Result<CMatrix> {
    let mut out = CMatrix::zeros(rows, cols);
    for c in 0..cols {
        let mut redraws = 0;
        loop {
            for r in 0..rows {
                out[(r, c)] = if complex {
                    rng.complex_normal()
                } else {
                    C64::new(rng.normal(), 0.0)
                };
            }
            let mut view = out.columns(0, c + 1).into_owned();
            if random::gram_schmidt(&mut view) {
                out.column_mut(c).copy_from(&view.column(c));
                break;
            }
            redraws += 1;
            if redraws > MAX_REDRAWS {
                return Err(Error::StepFailure("could not draw independent columns".into()));
            }
        }
    }
    Ok(out)
}

/// How the initial conditional density matrices are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnsembleInit {
    /// Every member `I/(m·N_max)`.
    #[default]
    UniformMixed,
    /// Seeded `A_i A_i†`, jointly normalized to unit total trace.
    RandomPsd,
}

impl std::str::FromStr for EnsembleInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-mixed" => Ok(Self::UniformMixed),
            "random-psd" => Ok(Self::RandomPsd),
            other => Err(Error::Config(format!("unknown ensemble init `{other}`"))),
        }
    }
}

impl std::fmt::Display for EnsembleInit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::UniformMixed => "uniform-mixed",
            Self::RandomPsd => "random-psd",
        })
    }
}

pub fn init_ensemble(m: usize, n_max: usize, scheme: EnsembleInit, seed: u64) -> Result<ConditionalDensityEnsemble> {
    if m == 0 || n_max == 0 {
        return Err(Error::Config("dimensions must be positive".into()));
    }
    match scheme {
        EnsembleInit::UniformMixed => Ok(ConditionalDensityEnsemble::uniform(m, n_max)),
        EnsembleInit::RandomPsd => {
            let mut rng = Rng::seed(seed);
            let mut members: Vec<CMatrix> = (0..n_max).map(|_| random::random_psd(&mut rng, m)).collect();
            let total: f64 = members.iter().map(linalg::trace_re).sum();
            for x in members.iter_mut() {
                *x /= C64::new(total, 0.0);
                // Symmetrize away rounding so members are exactly Hermitian.
                *x = (&*x + x.adjoint()) * C64::new(0.5, 0.0);
            }
            ConditionalDensityEnsemble::new(members)
        }
    }
}
