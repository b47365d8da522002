//! Independent reference implementations used by the integration tests.
//! Nothing here calls the library's numerical kernels; models are only read
//! through their public accessors.
#![allow(dead_code)]

use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use shqmm_core::learning::{init_ensemble, EnsembleInit};
use shqmm_core::random::{haar_stiefel, Rng};
use shqmm_core::{
    split_point, Boundary, CMatrix, ConditionalDensityEnsemble, DensityMatrix, HmmModel, HqmmModel,
    KrausBundle, ShqmmModel, C64,
};

// ---------- double-double arithmetic ----------

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let x = self.hi.sqrt();
        // one Newton step in double-double
        let xx = Dd::new(x) * Dd::new(x);
        let corr = (self - xx).hi / (2.0 * x);
        let (s, e) = quick_two_sum(x, corr);
        Dd { hi: s, lo: e }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let e = e + self.lo + b.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + self.hi * b.lo + self.lo * b.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::new(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::new(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub const ZERO: Cdd = Cdd {
        re: Dd::ZERO,
        im: Dd::ZERO,
    };
    pub const ONE: Cdd = Cdd {
        re: Dd::ONE,
        im: Dd::ZERO,
    };

    pub fn from_c64(z: C64) -> Self {
        Cdd {
            re: Dd::new(z.re),
            im: Dd::new(z.im),
        }
    }

    pub fn real(x: f64) -> Self {
        Cdd {
            re: Dd::new(x),
            im: Dd::ZERO,
        }
    }

    pub fn to_c64(self) -> C64 {
        C64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn conj(self) -> Self {
        Cdd {
            re: self.re,
            im: -self.im,
        }
    }

    pub fn norm_sqr(self) -> Dd {
        self.re * self.re + self.im * self.im
    }
}

impl Add for Cdd {
    type Output = Cdd;
    fn add(self, b: Cdd) -> Cdd {
        Cdd {
            re: self.re + b.re,
            im: self.im + b.im,
        }
    }
}

impl Sub for Cdd {
    type Output = Cdd;
    fn sub(self, b: Cdd) -> Cdd {
        Cdd {
            re: self.re - b.re,
            im: self.im - b.im,
        }
    }
}

impl Mul for Cdd {
    type Output = Cdd;
    fn mul(self, b: Cdd) -> Cdd {
        Cdd {
            re: self.re * b.re - self.im * b.im,
            im: self.re * b.im + self.im * b.re,
        }
    }
}

impl Div for Cdd {
    type Output = Cdd;
    fn div(self, b: Cdd) -> Cdd {
        let d = b.norm_sqr();
        let n = self * b.conj();
        Cdd {
            re: n.re / d,
            im: n.im / d,
        }
    }
}

/// Row-major dense matrix of double-double complex numbers.
#[derive(Debug, Clone)]
pub struct DdMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Cdd>,
}

impl DdMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DdMat {
            rows,
            cols,
            data: vec![Cdd::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Cdd::ONE;
        }
        m
    }

    pub fn from_cmatrix(a: &CMatrix) -> Self {
        let mut m = Self::zeros(a.nrows(), a.ncols());
        for r in 0..a.nrows() {
            for c in 0..a.ncols() {
                m.data[r * a.ncols() + c] = Cdd::from_c64(a[(r, c)]);
            }
        }
        m
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |r, c| self.at(r, c).to_c64())
    }

    pub fn at(&self, r: usize, c: usize) -> Cdd {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Cdd) {
        self.data[r * self.cols + c] = v;
    }

    pub fn mul(&self, b: &DdMat) -> DdMat {
        assert_eq!(self.cols, b.rows);
        let mut out = DdMat::zeros(self.rows, b.cols);
        for i in 0..self.rows {
            for j in 0..b.cols {
                let mut acc = Cdd::ZERO;
                for k in 0..self.cols {
                    acc = acc + self.at(i, k) * b.at(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn adjoint(&self) -> DdMat {
        let mut out = DdMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.at(i, j).conj());
            }
        }
        out
    }

    pub fn add(&self, b: &DdMat) -> DdMat {
        let data = self.data.iter().zip(&b.data).map(|(&x, &y)| x + y).collect();
        DdMat { data, ..*self }
    }

    pub fn sub(&self, b: &DdMat) -> DdMat {
        let data = self.data.iter().zip(&b.data).map(|(&x, &y)| x - y).collect();
        DdMat { data, ..*self }
    }

    pub fn scale(&self, s: Cdd) -> DdMat {
        let data = self.data.iter().map(|&x| x * s).collect();
        DdMat { data, ..*self }
    }

    pub fn trace(&self) -> Cdd {
        (0..self.rows).fold(Cdd::ZERO, |acc, i| acc + self.at(i, i))
    }

    /// Horizontal concatenation `[self, b]`.
    pub fn hcat(&self, b: &DdMat) -> DdMat {
        assert_eq!(self.rows, b.rows);
        let mut out = DdMat::zeros(self.rows, self.cols + b.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.at(r, c));
            }
            for c in 0..b.cols {
                out.set(r, self.cols + c, b.at(r, c));
            }
        }
        out
    }

    /// Solves `self · X = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &DdMat) -> DdMat {
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| {
                    let nx = a.at(x, col).norm_sqr().hi;
                    let ny = a.at(y, col).norm_sqr().hi;
                    nx.partial_cmp(&ny).unwrap()
                })
                .unwrap();
            if piv != col {
                for c in 0..n {
                    let t = a.at(col, c);
                    a.set(col, c, a.at(piv, c));
                    a.set(piv, c, t);
                }
                for c in 0..b.cols {
                    let t = b.at(col, c);
                    b.set(col, c, b.at(piv, c));
                    b.set(piv, c, t);
                }
            }
            let p = a.at(col, col);
            for r in col + 1..n {
                let f = a.at(r, col) / p;
                for c in col..n {
                    a.set(r, c, a.at(r, c) - f * a.at(col, c));
                }
                for c in 0..b.cols {
                    b.set(r, c, b.at(r, c) - f * b.at(col, c));
                }
            }
        }
        let mut x = DdMat::zeros(n, b.cols);
        for c in 0..b.cols {
            for r in (0..n).rev() {
                let mut acc = b.at(r, c);
                for k in r + 1..n {
                    acc = acc - a.at(r, k) * x.at(k, c);
                }
                x.set(r, c, acc / a.at(r, r));
            }
        }
        x
    }
}

/// `κ − τU(I + τ/2·V†U)⁻¹V†κ` with `U = [G, κ]`, `V = [κ, −G]`, entirely in
/// double-double.
pub fn cayley_dd(kappa: &CMatrix, grad: &CMatrix, tau: f64) -> CMatrix {
    let k = DdMat::from_cmatrix(kappa);
    let g = DdMat::from_cmatrix(grad);
    let neg_g = g.scale(Cdd::real(-1.0));
    let u = g.hcat(&k);
    let v = k.hcat(&neg_g);
    let vh = v.adjoint();
    let inner = DdMat::identity(2 * kappa.ncols()).add(&vh.mul(&u).scale(Cdd::real(0.5 * tau)));
    let x = inner.solve(&vh.mul(&k));
    k.sub(&u.mul(&x).scale(Cdd::real(tau))).to_cmatrix()
}

// ---------- eigenvalues ----------

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(mut a: DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Eigenvalues of a Hermitian matrix through the real embedding
/// `[[A, −B], [B, A]]`, whose spectrum is each eigenvalue twice.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let n = h.nrows();
    let emb = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = h[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let ev = jacobi_eigenvalues(emb);
    ev.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

/// Spectral norm of `κ₁†κ₂ − I`, product formed in double-double.
pub fn stiefel_distance_oracle(a: &CMatrix, b: &CMatrix) -> f64 {
    let prod = DdMat::from_cmatrix(a).adjoint().mul(&DdMat::from_cmatrix(b));
    let diff = prod.sub(&DdMat::identity(a.ncols()));
    let gram = diff.adjoint().mul(&diff).to_cmatrix();
    let top = *hermitian_eigenvalues(&gram).last().unwrap();
    top.max(0.0).sqrt()
}

// ---------- literal model evolutions ----------

/// Literal k-local evolution: `ρ′^(i) = Σ_{j′=−k..k} K_y^{j′+k} ρ^(i−j′) K_y^{j′+k}†`.
pub fn literal_step(
    bundle: &KrausBundle,
    k: usize,
    boundary: Boundary,
    members: &[CMatrix],
    y: usize,
) -> Vec<CMatrix> {
    let n = members.len() as i64;
    let m = bundle.m();
    let mut out = vec![CMatrix::zeros(m, m); members.len()];
    for i in 0..n {
        for jp in -(k as i64)..=(k as i64) {
            let raw = i - jp;
            let src = match boundary {
                Boundary::Periodic => raw.rem_euclid(n),
                Boundary::Open if (0..n).contains(&raw) => raw,
                Boundary::Open => continue,
            };
            let op = bundle.op(y, (jp + k as i64) as usize);
            out[i as usize] += op * &members[src as usize] * op.adjoint();
        }
    }
    out
}

/// The 1-local system written out with its three named operators: `A` reads
/// the next slot, `K` the same slot, `R` the previous slot (periodic wrap).
pub fn three_term_step(bundle: &KrausBundle, members: &[CMatrix], y: usize) -> Vec<CMatrix> {
    let n = members.len();
    let a = bundle.op(y, 0);
    let kk = bundle.op(y, 1);
    let r = bundle.op(y, 2);
    (0..n)
        .map(|i| {
            let next = &members[(i + 1) % n];
            let same = &members[i];
            let prev = &members[(i + n - 1) % n];
            kk * same * kk.adjoint() + r * prev * r.adjoint() + a * next * a.adjoint()
        })
        .collect()
}

/// Unnormalized `Tr(ρ_T)` for a periodic or open SHQMM, in double-double.
pub fn unscaled_probability_dd(model: &ShqmmModel, seq: &[usize]) -> Dd {
    let bundle = model.bundle();
    let k = model.k() as i64;
    let mut state: Vec<DdMat> = model.ensemble0().members().iter().map(DdMat::from_cmatrix).collect();
    let n = state.len() as i64;
    let m = bundle.m();
    for &y in seq {
        let mut next = vec![DdMat::zeros(m, m); state.len()];
        for i in 0..n {
            for jp in -k..=k {
                let raw = i - jp;
                let src = match model.boundary() {
                    Boundary::Periodic => raw.rem_euclid(n),
                    Boundary::Open if (0..n).contains(&raw) => raw,
                    Boundary::Open => continue,
                };
                let op = DdMat::from_cmatrix(bundle.op(y, (jp + k) as usize));
                let term = op.mul(&state[src as usize]).mul(&op.adjoint());
                next[i as usize] = next[i as usize].add(&term);
            }
        }
        state = next;
    }
    state.iter().fold(Dd::ZERO, |acc, s| acc + s.trace().re)
}

/// Probability of `y` and the normalized posterior, term by term from the
/// HQMM operator-sum definition.
pub fn literal_hqmm_filter(bundle: &KrausBundle, rho: &CMatrix, y: usize) -> (CMatrix, f64) {
    let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
    for w in 0..bundle.classes() {
        let k = bundle.op(y, w);
        out += k * rho * k.adjoint();
    }
    let p = out.trace().re;
    (out / C64::new(p, 0.0), p)
}

/// Brute-force HMM likelihood over every hidden path `h_0..h_ℓ`.
pub fn hmm_path_sum(model: &HmmModel, seq: &[usize]) -> f64 {
    let n = model.n();
    let t = model.transition();
    let c = model.emission();
    let len = seq.len();
    let total_paths = n.pow(len as u32 + 1);
    let mut total = 0.0;
    for code in 0..total_paths {
        let mut path = Vec::with_capacity(len + 1);
        let mut x = code;
        for _ in 0..=len {
            path.push(x % n);
            x /= n;
        }
        let mut p = model.x0()[path[0]];
        for step in 1..=len {
            p *= t[(path[step], path[step - 1])] * c[(seq[step - 1], path[step])];
        }
        total += p;
    }
    total
}

/// Stationary distribution of a column-stochastic matrix by power iteration.
pub fn stationary(t: &DMatrix<f64>) -> DVector<f64> {
    let n = t.nrows();
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..10_000 {
        let next = t * &x;
        let diff = (&next - &x).abs().sum();
        x = next;
        if diff < 1e-15 {
            break;
        }
    }
    x
}

// ---------- random fixtures ----------

pub fn random_bundle(m: usize, dim_o: usize, classes: usize, seed: u64) -> KrausBundle {
    let mut rng = Rng::seed(seed);
    let point = haar_stiefel(&mut rng, dim_o * classes * m, m);
    split_point(&point, dim_o, classes, m).unwrap()
}

pub fn random_ensemble(m: usize, n_max: usize, seed: u64) -> ConditionalDensityEnsemble {
    init_ensemble(m, n_max, EnsembleInit::RandomPsd, seed).unwrap()
}

pub fn random_shqmm(m: usize, dim_o: usize, n_max: usize, k: usize, boundary: Boundary, seed: u64) -> ShqmmModel {
    let bundle = random_bundle(m, dim_o, 2 * k + 1, seed);
    let ens = random_ensemble(m, n_max, seed.wrapping_add(7919));
    ShqmmModel::new(bundle, ens, k, boundary).unwrap()
}

pub fn random_hqmm(m: usize, dim_o: usize, w: usize, seed: u64) -> HqmmModel {
    let bundle = random_bundle(m, dim_o, w, seed);
    let rho = random_ensemble(m, 1, seed.wrapping_add(7919)).into_members().remove(0);
    HqmmModel::new(bundle, DensityMatrix::new(rho).unwrap()).unwrap()
}

fn random_stochastic(rng: &mut Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut mat = DMatrix::from_fn(rows, cols, |_, _| 0.05 + rng.uniform());
    for mut col in mat.column_iter_mut() {
        let s = col.sum();
        col /= s;
    }
    mat
}

pub fn random_hmm(n: usize, s: usize, seed: u64) -> HmmModel {
    let mut rng = Rng::seed(seed);
    let t = random_stochastic(&mut rng, n, n);
    let c = random_stochastic(&mut rng, s, n);
    let x0 = random_stochastic(&mut rng, n, 1).column(0).into_owned();
    HmmModel::new(t, c, x0).unwrap()
}

pub fn random_sequences(seed: u64, count: usize, len: usize, dim_o: usize) -> Vec<Vec<usize>> {
    let mut rng = Rng::seed(seed);
    (0..count)
        .map(|_| (0..len).map(|_| rng.below(dim_o)).collect())
        .collect()
}

/// Every sequence of length `len` over `dim_o` symbols.
pub fn all_sequences(dim_o: usize, len: usize) -> Vec<Vec<usize>> {
    (0..dim_o.pow(len as u32))
        .map(|mut code| {
            (0..len)
                .map(|_| {
                    let y = code % dim_o;
                    code /= dim_o;
                    y
                })
                .collect()
        })
        .collect()
}

/// Tangent direction `Z − κ·sym(κ†Z)` at `κ`.
pub fn tangent(kappa: &CMatrix, z: &CMatrix) -> CMatrix {
    let kz = kappa.adjoint() * z;
    let sym = (&kz + kz.adjoint()) * C64::new(0.5, 0.0);
    z - kappa * sym
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
