//! Batch negative log-likelihood and its Wirtinger gradient with respect to
//! the stacked Kraus matrix `κ*`.
//!
//! The forward pass keeps the normalized ensembles `ρ̂_t` and step traces
//! `s_t`. The backward pass carries scaled effects `Ê_t = Φ_{y_t}†(Ê_{t+1}) / s_t`
//! starting from `Ê_T = I` in every slot, which keeps `Tr(Ê_t ρ̂_t) = 1`. Then
//!
//! ```text
//! ∂(−ln P)/∂K_y^c* = −Σ_{t: y_t = y} Σ_i Ê_{t+1}^(i) K_y^c ρ̂_t^(src(i,c)) / s_t
//! ```

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::model::{check_symbol, KrausModel, MIN_PROB};

/// `∂𝓛/∂κ*`, shaped like `κ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBlock(pub CMatrix);

impl GradientBlock {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(CMatrix::zeros(rows, cols))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// `Re⟨G, d⟩ = Re Tr(G† d)`.
    pub fn inner_re(&self, d: &CMatrix) -> f64 {
        self.0.zip_fold(d, 0.0, |acc, g, x| acc + (g.conj() * x).re)
    }
}

fn check_batch(batch: &[Vec<usize>]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}

/// Mean over the batch of `−ln P(seq)`.
pub fn batch_loss<M: KrausModel>(model: &M, batch: &[Vec<usize>]) -> Result<f64> {
    check_batch(batch)?;
    let mut total = 0.0;
    for seq in batch {
        total -= model.loglik(seq)?;
    }
    Ok(total / batch.len() as f64)
}

/// Gradient of [`batch_loss`] with respect to `κ*`.
pub fn grad_kappa<M: KrausModel>(model: &M, batch: &[Vec<usize>]) -> Result<GradientBlock> {
    loss_and_grad(model, batch).map(|(_, g)| g)
}

/// Loss and gradient from one forward/backward sweep per sequence.
pub fn loss_and_grad<M: KrausModel>(model: &M, batch: &[Vec<usize>]) -> Result<(f64, GradientBlock)> {
    check_batch(batch)?;
    let mut ws = Workspace::new(model);
    let mut loss = 0.0;
    for seq in batch {
        loss -= ws.accumulate(model, seq)?;
    }
    let scale = 1.0 / batch.len() as f64;
    Ok((loss * scale, ws.into_gradient(model, scale)))
}

/// Per-operator gradient accumulators plus forward/backward buffers.
struct Workspace {
    m: usize,
    grads: Vec<CMatrix>,
    states: Vec<Vec<CMatrix>>,
    traces: Vec<f64>,
    effect: Vec<CMatrix>,
    effect_prev: Vec<CMatrix>,
    tmp: CMatrix,
    tmp2: CMatrix,
}

impl Workspace {
    fn new<M: KrausModel>(model: &M) -> Self {
        let ch = model.channel();
        let m = ch.bundle.m();
        let slots = ch.n_slots();
        Self {
            m,
            grads: vec![CMatrix::zeros(m, m); ch.bundle.ops().len()],
            states: Vec::new(),
            traces: Vec::new(),
            effect: vec![CMatrix::zeros(m, m); slots],
            effect_prev: vec![CMatrix::zeros(m, m); slots],
            tmp: CMatrix::zeros(m, m),
            tmp2: CMatrix::zeros(m, m),
        }
    }

    /// Adds `∂(−ln P)/∂K*` for one sequence; returns `ln P`.
    fn accumulate<M: KrausModel>(&mut self, model: &M, seq: &[usize]) -> Result<f64> {
        let ch = model.channel();
        let dim_o = ch.bundle.dim_o();
        let len = seq.len();
        let slots = ch.n_slots();
        let m = self.m;

        // Forward: states[t] is ρ̂_t for t in 0..=len.
        if self.states.len() < len + 1 {
            self.states
                .resize_with(len + 1, || vec![CMatrix::zeros(m, m); slots]);
        }
        self.traces.clear();
        for (dst, src) in self.states[0].iter_mut().zip(model.initial()) {
            dst.copy_from(src);
        }
        let mut ll = 0.0;
        for (t, &y) in seq.iter().enumerate() {
            check_symbol(y, dim_o)?;
            let (head, tail) = self.states.split_at_mut(t + 1);
            let next = &mut tail[0];
            let s = ch.apply(y, &head[t], next, &mut self.tmp);
            if !(s >= MIN_PROB) {
                return Err(Error::Underflow { prob: s });
            }
            let inv = C64::new(1.0 / s, 0.0);
            for x in next.iter_mut() {
                *x *= inv;
            }
            self.traces.push(s);
            ll += s.ln();
        }

        // Backward.
        let id = linalg::identity(m);
        for e in self.effect.iter_mut() {
            e.copy_from(&id);
        }
        for t in (0..len).rev() {
            let y = seq[t];
            let s = self.traces[t];
            let coef = C64::new(-1.0 / s, 0.0);
            let rho = &self.states[t];
            for c in 0..ch.bundle.classes() {
                let k = ch.bundle.op(y, c);
                let g = &mut self.grads[c * dim_o + y];
                for i in 0..slots {
                    let Some(src) = ch.source(i, c) else { continue };
                    // g += coef · E[i] · K · ρ[src]
                    linalg::mul_into(self.tmp.as_mut_slice(), k.as_slice(), rho[src].as_slice(), m);
                    linalg::mul_into(
                        self.tmp2.as_mut_slice(),
                        self.effect[i].as_slice(),
                        self.tmp.as_slice(),
                        m,
                    );
                    g.zip_apply(&self.tmp2, |a, b| *a += coef * b);
                }
            }
            if t > 0 {
                ch.apply_adjoint(y, &self.effect, &mut self.effect_prev, &mut self.tmp);
                let inv = C64::new(1.0 / s, 0.0);
                for e in self.effect_prev.iter_mut() {
                    *e *= inv;
                }
                std::mem::swap(&mut self.effect, &mut self.effect_prev);
            }
        }
        Ok(ll)
    }

    fn into_gradient<M: KrausModel>(self, model: &M, scale: f64) -> GradientBlock {
        let m = self.m;
        let ch = model.channel();
        let mut g = CMatrix::zeros(ch.bundle.ops().len() * m, m);
        let sc = C64::new(scale, 0.0);
        for (b, blk) in self.grads.iter().enumerate() {
            g.view_mut((b * m, 0), (m, m)).copy_from(&(blk * sc));
        }
        GradientBlock(g)
    }
}
