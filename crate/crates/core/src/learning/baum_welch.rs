//! Expectation-maximization for the Moore HMM `x_{t+1} = T x_t`, `y_{t+1} ~ C x_{t+1}`.
//!
//! Time 0 is the emission-free initial state, so `x0` is re-estimated from the
//! posterior over the state *before* the first transition.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{check_symbol, HmmModel, MIN_PROB};
use crate::random::Rng;

#[derive(Debug, Clone)]
pub struct BaumWelchFit {
    pub model: HmmModel,
    /// Training log-likelihood of the model entering each iteration, plus
    /// the final model's: `iters + 1` entries.
    pub loglik_history: Vec<f64>,
}

/// Sufficient statistics from one E-step.
struct Counts {
    x0: DVector<f64>,
    trans: DMatrix<f64>,
    emit: DMatrix<f64>,
    loglik: f64,
}

fn random_stochastic(rng: &mut Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut m = DMatrix::from_fn(rows, cols, |_, _| 0.0);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = 0.5 + rng.uniform();
        }
        let s = m.column(c).sum();
        m.column_mut(c).unscale_mut(s);
    }
    m
}

fn e_step(model: &HmmModel, data: &[Vec<usize>]) -> Result<Counts> {
    let n = model.n();
    let (t, c) = (&model.t, &model.c);
    let mut counts = Counts {
        x0: DVector::zeros(n),
        trans: DMatrix::zeros(n, n),
        emit: DMatrix::zeros(model.s(), n),
        loglik: 0.0,
    };
    for seq in data {
        let len = seq.len();
        // alpha[0] = x0, alpha[t] ∝ diag(C_{y_t}) T alpha[t-1]
        let mut alpha = Vec::with_capacity(len + 1);
        let mut scale = Vec::with_capacity(len);
        alpha.push(model.x0.clone());
        for (i, &y) in seq.iter().enumerate() {
            check_symbol(y, model.s())?;
            let mut a = t * &alpha[i];
            for (h, v) in a.iter_mut().enumerate() {
                *v *= c[(y, h)];
            }
            let s = a.sum();
            if !(s >= MIN_PROB) {
                return Err(Error::Underflow { prob: s });
            }
            a /= s;
            scale.push(s);
            counts.loglik += s.ln();
            alpha.push(a);
        }
        // beta[len] = 1, beta[t-1](h) = Σ_h' T(h',h) C(y_t,h') beta[t](h') / s_t
        let mut beta = DVector::from_element(n, 1.0);
        for i in (1..=len).rev() {
            let y = seq[i - 1];
            let mut cb = beta.clone();
            for (h, v) in cb.iter_mut().enumerate() {
                *v *= c[(y, h)];
            }
            let gamma = alpha[i].component_mul(&beta);
            for h in 0..n {
                counts.emit[(y, h)] += gamma[h];
            }
            // xi(h', h) = alpha[i-1](h) T(h',h) C(y,h') beta[i](h') / s
            for h in 0..n {
                for hp in 0..n {
                    counts.trans[(hp, h)] += alpha[i - 1][h] * t[(hp, h)] * cb[hp] / scale[i - 1];
                }
            }
            beta = t.tr_mul(&cb) / scale[i - 1];
        }
        counts.x0 += alpha[0].component_mul(&beta);
    }
    Ok(counts)
}

fn normalize_columns(m: &mut DMatrix<f64>, fallback: &DMatrix<f64>) {
    for j in 0..m.ncols() {
        let s = m.column(j).sum();
        if s > 0.0 {
            m.column_mut(j).unscale_mut(s);
        } else {
            m.column_mut(j).copy_from(&fallback.column(j));
        }
    }
}

/// Fits an `n`-state, `s`-symbol HMM with `iters` EM iterations from a seeded
/// random start.
pub fn baum_welch_train(data: &[Vec<usize>], n: usize, s: usize, iters: usize, seed: u64) -> Result<BaumWelchFit> {
    if data.is_empty() || data.iter().all(Vec::is_empty) {
        return Err(Error::EmptyDataset);
    }
    if n == 0 || s == 0 {
        return Err(Error::Config("n and s must be at least 1".into()));
    }
    let mut rng = Rng::seed(seed);
    let t = random_stochastic(&mut rng, n, n);
    let c = random_stochastic(&mut rng, s, n);
    let x0 = DVector::from_element(n, 1.0 / n as f64);
    let mut model = HmmModel::new(t, c, x0)?;

    let mut history = Vec::with_capacity(iters + 1);
    for _ in 0..iters {
        let Counts {
            x0,
            mut trans,
            mut emit,
            loglik,
        } = e_step(&model, data)?;
        history.push(loglik);
        normalize_columns(&mut trans, &model.t);
        normalize_columns(&mut emit, &model.c);
        let x0 = x0 / data.len() as f64;
        let x0 = &x0 / x0.sum();
        model = HmmModel {
            t: trans,
            c: emit,
            x0,
        };
    }
    history.push(e_step(&model, data)?.loglik);
    Ok(BaumWelchFit {
        model,
        loglik_history: history,
    })
}
