//! Density matrices, conditional ensembles, Kraus operator bundles and their
//! stacked Stiefel-manifold representation.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

/// Tolerance for Stiefel and Kraus-completeness checks.
pub const STIEFEL_TOL: f64 = 1e-9;
/// Tolerance for density-matrix and ensemble checks.
pub const DENSITY_TOL: f64 = 1e-10;

/// Outcome of [`validate_density`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityReport {
    /// Max entrywise `|A − A†|`.
    pub hermitian_residual: f64,
    pub min_eigenvalue: f64,
    pub trace: C64,
    pub valid: bool,
}

/// Checks Hermiticity, positive semi-definiteness and unit trace.
pub fn validate_density(mat: &CMatrix, tol: f64) -> Result<DensityReport> {
    if !mat.is_square() {
        return Err(Error::Shape(format!(
            "density matrix must be square, got {}x{}",
            mat.nrows(),
            mat.ncols()
        )));
    }
    let hermitian_residual = linalg::hermitian_residual(mat);
    let min_eigenvalue = linalg::hermitian_eigenvalues(mat)
        .first()
        .copied()
        .unwrap_or(0.0);
    let trace = mat.trace();
    let valid = linalg::all_finite(mat)
        && hermitian_residual <= tol
        && min_eigenvalue >= -tol
        && (trace.re - 1.0).abs() <= tol
        && trace.im.abs() <= tol;
    Ok(DensityReport {
        hermitian_residual,
        min_eigenvalue,
        trace,
        valid,
    })
}

/// A validated `m×m` density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        let report = validate_density(&mat, DENSITY_TOL)?;
        if !report.valid {
            return Err(Error::Input(format!("not a density matrix: {report:?}")));
        }
        Ok(Self(mat))
    }

    /// The maximally mixed state `I/m`.
    pub fn maximally_mixed(m: usize) -> Self {
        Self(linalg::identity(m) * C64::new(1.0 / m as f64, 0.0))
    }

    pub(crate) fn from_unchecked(mat: CMatrix) -> Self {
        Self(mat)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

/// The hidden state of a split model: `N_max` conditional density matrices
/// whose traces form a probability distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDensityEnsemble {
    members: Vec<CMatrix>,
}

impl ConditionalDensityEnsemble {
    /// Validates each member (Hermitian, PSD) and the joint unit trace.
    pub fn new(members: Vec<CMatrix>) -> Result<Self> {
        let ens = Self::from_unchecked(members)?;
        ens.check(DENSITY_TOL)?;
        Ok(ens)
    }

    /// Shape checks only.
    pub(crate) fn from_unchecked(members: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::Shape("ensemble needs at least one member".into()));
        };
        let m = first.nrows();
        if members.iter().any(|x| x.nrows() != m || x.ncols() != m) {
            return Err(Error::Shape("ensemble members must share one square shape".into()));
        }
        Ok(Self { members })
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        for (i, x) in self.members.iter().enumerate() {
            if !linalg::all_finite(x) {
                return Err(Error::Input(format!("ensemble member {i} is not finite")));
            }
            let h = linalg::hermitian_residual(x);
            if h > tol {
                return Err(Error::Input(format!(
                    "ensemble member {i} not Hermitian (residual {h:e})"
                )));
            }
            let min = linalg::hermitian_eigenvalues(x)[0];
            if min < -tol {
                return Err(Error::Input(format!(
                    "ensemble member {i} not PSD (min eigenvalue {min:e})"
                )));
            }
        }
        let t = self.total_trace();
        if (t - 1.0).abs() > tol {
            return Err(Error::Input(format!("ensemble total trace {t} != 1")));
        }
        Ok(())
    }

    /// Every member equal to `I/(m·N_max)`.
    pub fn uniform(m: usize, n_max: usize) -> Self {
        let x = linalg::identity(m) * C64::new(1.0 / (m * n_max) as f64, 0.0);
        Self {
            members: vec![x; n_max],
        }
    }

    pub fn n_max(&self) -> usize {
        self.members.len()
    }

    pub fn dim(&self) -> usize {
        self.members[0].nrows()
    }

    pub fn members(&self) -> &[CMatrix] {
        &self.members
    }

    pub fn into_members(self) -> Vec<CMatrix> {
        self.members
    }

    pub fn total_trace(&self) -> f64 {
        self.members.iter().map(linalg::trace_re).sum()
    }

    /// `Σ_n ρ^(n)`: the ensemble viewed as a single density matrix.
    pub fn aggregate(&self) -> DensityMatrix {
        let mut acc = linalg::zeros(self.dim());
        for x in &self.members {
            acc += x;
        }
        DensityMatrix::from_unchecked(acc)
    }
}

/// Kraus operators `K_y^c` for every symbol `y` and class `c`, stored in
/// stacking order: block `b = c·dimO + y` (0-based class).
///
/// For split models `classes = 2k+1` and class `c` acts on ensemble member
/// `i − (c − k)`; with `k = 1` class 0 couples to `ρ^(i+1)`, class 1 to `ρ^(i)`
/// and class 2 to `ρ^(i−1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausBundle {
    m: usize,
    dim_o: usize,
    classes: usize,
    ops: Vec<CMatrix>,
}

impl KrausBundle {
    /// Shape checks only; completeness is checked by [`Self::completeness_residual`].
    pub fn new(dim_o: usize, classes: usize, ops: Vec<CMatrix>) -> Result<Self> {
        if dim_o == 0 || classes == 0 {
            return Err(Error::Shape("dimO and class count must be positive".into()));
        }
        if ops.len() != dim_o * classes {
            return Err(Error::Shape(format!(
                "expected {} operators, got {}",
                dim_o * classes,
                ops.len()
            )));
        }
        let m = ops[0].nrows();
        if m == 0 || ops.iter().any(|k| k.nrows() != m || k.ncols() != m) {
            return Err(Error::Shape("Kraus operators must share one square shape".into()));
        }
        Ok(Self {
            m,
            dim_o,
            classes,
            ops,
        })
    }

    /// Builds from a closure over `(symbol, class)`.
    pub fn from_fn(
        dim_o: usize,
        classes: usize,
        mut f: impl FnMut(usize, usize) -> CMatrix,
    ) -> Result<Self> {
        let mut ops = Vec::with_capacity(dim_o * classes);
        for c in 0..classes {
            for y in 0..dim_o {
                ops.push(f(y, c));
            }
        }
        Self::new(dim_o, classes, ops)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim_o(&self) -> usize {
        self.dim_o
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Locality radius `k` when the class count is odd.
    pub fn locality(&self) -> Option<usize> {
        (self.classes % 2 == 1).then_some(self.classes / 2)
    }

    #[inline]
    pub fn op(&self, y: usize, c: usize) -> &CMatrix {
        &self.ops[c * self.dim_o + y]
    }

    pub fn op_mut(&mut self, y: usize, c: usize) -> &mut CMatrix {
        &mut self.ops[c * self.dim_o + y]
    }

    /// Operators in stacking order.
    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    /// `‖Σ_{y,c} K†K − I‖_F`.
    pub fn completeness_residual(&self) -> f64 {
        let mut acc = linalg::zeros(self.m);
        let mut tmp = linalg::zeros(self.m);
        let id = linalg::identity(self.m);
        for k in &self.ops {
            linalg::adjoint_sandwich_acc(&mut acc, k, &id, &mut tmp);
        }
        (acc - id).norm()
    }
}

/// A stacked Kraus matrix `κ` with `κ†κ = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelPoint(CMatrix);

impl StiefelPoint {
    /// Rejects points off the manifold by more than [`STIEFEL_TOL`].
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() < mat.ncols() {
            return Err(Error::Shape(format!(
                "Stiefel point must be tall, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let r = linalg::orthonormality_residual(&mat);
        if !(r <= STIEFEL_TOL) {
            return Err(Error::Input(format!("κ†κ − I residual {r:e} exceeds tolerance")));
        }
        Ok(Self(mat))
    }

    pub(crate) fn from_unchecked(mat: CMatrix) -> Self {
        Self(mat)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    /// `‖κ†κ − I‖_F`.
    pub fn residual(&self) -> f64 {
        linalg::orthonormality_residual(&self.0)
    }
}

/// Stacks the bundle's operators vertically in class-major order.
pub fn stack_bundle(bundle: &KrausBundle) -> StiefelPoint {
    let m = bundle.m;
    let mut mat = CMatrix::zeros(bundle.ops.len() * m, m);
    for (b, k) in bundle.ops.iter().enumerate() {
        mat.view_mut((b * m, 0), (m, m)).copy_from(k);
    }
    StiefelPoint(mat)
}

/// Inverse of [`stack_bundle`].
pub fn split_point(point: &StiefelPoint, dim_o: usize, classes: usize, m: usize) -> Result<KrausBundle> {
    split_matrix(point.matrix(), dim_o, classes, m)
}

pub(crate) fn split_matrix(mat: &CMatrix, dim_o: usize, classes: usize, m: usize) -> Result<KrausBundle> {
    if mat.ncols() != m || mat.nrows() != dim_o * classes * m {
        return Err(Error::Shape(format!(
            "cannot split {}x{} into {dim_o}·{classes} blocks of {m}x{m}",
            mat.nrows(),
            mat.ncols()
        )));
    }
    let ops = (0..dim_o * classes)
        .map(|b| mat.view((b * m, 0), (m, m)).into_owned())
        .collect();
    KrausBundle::new(dim_o, classes, ops)
}

/// Parameter count of a split model: `m²·j`.
pub fn param_count(m: usize, j: usize) -> usize {
    m * m * j
}
