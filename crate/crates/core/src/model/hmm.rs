use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::{check_symbol, SequenceModel, MIN_PROB};

const STOCHASTIC_TOL: f64 = 1e-12;

/// State-emitting (Moore) hidden Markov model: `x ← T x`, then emit from
/// column `x` of `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmModel {
    /// `n×n`, column-stochastic.
    pub(crate) t: DMatrix<f64>,
    /// `s×n`, column-stochastic.
    pub(crate) c: DMatrix<f64>,
    pub(crate) x0: DVector<f64>,
}

fn check_columns(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if m.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::Input(format!("{name} has negative or non-finite entries")));
    }
    for (j, col) in m.column_iter().enumerate() {
        let s: f64 = col.sum();
        if (s - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::Input(format!("{name} column {j} sums to {s}")));
        }
    }
    Ok(())
}

impl HmmModel {
    pub fn new(t: DMatrix<f64>, c: DMatrix<f64>, x0: DVector<f64>) -> Result<Self> {
        let n = t.nrows();
        if n == 0 || t.ncols() != n || c.ncols() != n || x0.len() != n || c.nrows() == 0 {
            return Err(Error::Shape(format!(
                "T {}x{}, C {}x{}, x0 {} are inconsistent",
                t.nrows(),
                t.ncols(),
                c.nrows(),
                c.ncols(),
                x0.len()
            )));
        }
        check_columns("T", &t)?;
        check_columns("C", &c)?;
        check_columns("x0", &DMatrix::from_column_slice(n, 1, x0.as_slice()))?;
        Ok(Self { t, c, x0 })
    }

    pub fn n(&self) -> usize {
        self.t.nrows()
    }

    pub fn s(&self) -> usize {
        self.c.nrows()
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.t
    }

    pub fn emission(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn x0(&self) -> &DVector<f64> {
        &self.x0
    }

    /// Entries of `T` and `C`.
    pub fn param_count(&self) -> usize {
        self.n() * self.n() + self.s() * self.n()
    }

    /// `ln P(seq)` by the scaled forward recursion `x ← diag(C_y) T x`.
    pub fn forward_loglik(&self, seq: &[usize]) -> Result<f64> {
        let mut x = self.x0.clone();
        let mut ll = 0.0;
        for &y in seq {
            check_symbol(y, self.s())?;
            let mut next = &self.t * &x;
            for (h, v) in next.iter_mut().enumerate() {
                *v *= self.c[(y, h)];
            }
            let norm = next.sum();
            if !(norm >= MIN_PROB) {
                return Err(Error::Underflow { prob: norm });
            }
            next /= norm;
            ll += norm.ln();
            x = next;
        }
        Ok(ll)
    }
}

impl SequenceModel for HmmModel {
    fn dim_o(&self) -> usize {
        self.s()
    }

    fn loglik(&self, seq: &[usize]) -> Result<f64> {
        self.forward_loglik(seq)
    }
}
