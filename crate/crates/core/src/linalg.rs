//! Small dense complex kernels used on the filtering hot path.
//!
//! All matrices are square `n×n` in nalgebra's column-major layout; entry
//! `(r, c)` lives at `c * n + r`.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub fn zeros(n: usize) -> CMatrix {
    CMatrix::zeros(n, n)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// `out = a * b`
#[inline]
pub fn mul_into(out: &mut [C64], a: &[C64], b: &[C64], n: usize) {
    for c in 0..n {
        let col = &mut out[c * n..(c + 1) * n];
        col.fill(C64::new(0.0, 0.0));
        for l in 0..n {
            let blc = b[c * n + l];
            if blc.re == 0.0 && blc.im == 0.0 {
                continue;
            }
            let acol = &a[l * n..(l + 1) * n];
            for r in 0..n {
                col[r] += acol[r] * blc;
            }
        }
    }
}

/// `out += a * b†`
#[inline]
pub fn mul_adj_acc(out: &mut [C64], a: &[C64], b: &[C64], n: usize) {
    for c in 0..n {
        let col = &mut out[c * n..(c + 1) * n];
        for l in 0..n {
            // (b†)[l, c] = conj(b[c, l])
            let bcl = b[l * n + c].conj();
            if bcl.re == 0.0 && bcl.im == 0.0 {
                continue;
            }
            let acol = &a[l * n..(l + 1) * n];
            for r in 0..n {
                col[r] += acol[r] * bcl;
            }
        }
    }
}

/// `out = a† * b`
#[inline]
pub fn adj_mul_into(out: &mut [C64], a: &[C64], b: &[C64], n: usize) {
    for c in 0..n {
        let bcol = &b[c * n..(c + 1) * n];
        for r in 0..n {
            let acol = &a[r * n..(r + 1) * n];
            let mut s = C64::new(0.0, 0.0);
            for l in 0..n {
                s += acol[l].conj() * bcol[l];
            }
            out[c * n + r] = s;
        }
    }
}

/// `out += k * rho * k†`, using `tmp` as scratch.
#[inline]
pub fn sandwich_acc(out: &mut CMatrix, k: &CMatrix, rho: &CMatrix, tmp: &mut CMatrix) {
    let n = k.nrows();
    mul_into(tmp.as_mut_slice(), k.as_slice(), rho.as_slice(), n);
    mul_adj_acc(out.as_mut_slice(), tmp.as_slice(), k.as_slice(), n);
}

/// `out += k† * e * k`, using `tmp` as scratch.
#[inline]
pub fn adjoint_sandwich_acc(out: &mut CMatrix, k: &CMatrix, e: &CMatrix, tmp: &mut CMatrix) {
    let n = k.nrows();
    adj_mul_into(tmp.as_mut_slice(), k.as_slice(), e.as_slice(), n);
    // out += tmp * k
    let (o, t, ks) = (out.as_mut_slice(), tmp.as_slice(), k.as_slice());
    for c in 0..n {
        for l in 0..n {
            let klc = ks[c * n + l];
            if klc.re == 0.0 && klc.im == 0.0 {
                continue;
            }
            for r in 0..n {
                o[c * n + r] += t[l * n + r] * klc;
            }
        }
    }
}

/// Real part of the trace.
#[inline]
pub fn trace_re(a: &CMatrix) -> f64 {
    (0..a.nrows()).map(|i| a[(i, i)].re).sum()
}

/// `Re Tr(a * b)` without forming the product.
#[inline]
pub fn trace_prod_re(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let (a, b) = (a.as_slice(), b.as_slice());
    let mut s = 0.0;
    for i in 0..n {
        for l in 0..n {
            // a[i, l] * b[l, i]
            let x = a[l * n + i];
            let y = b[i * n + l];
            s += x.re * y.re - x.im * y.im;
        }
    }
    s
}

/// Max entrywise `|a - a†|`.
pub fn hermitian_residual(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            r = r.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    r
}

/// Frobenius norm of `a†a − I`.
pub fn orthonormality_residual(a: &CMatrix) -> f64 {
    let g = a.adjoint() * a;
    (g - identity(a.ncols())).norm()
}

/// Eigenvalues of the Hermitian part of a square matrix, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let h = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Largest singular value.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    a.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

pub fn all_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
