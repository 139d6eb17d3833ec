//! Dense Hermitian eigendecomposition.
//!
//! The matrix is reduced to Hermitian tridiagonal form with Householder
//! reflectors, the complex off-diagonal is made real by a diagonal phase
//! similarity, and the resulting real symmetric tridiagonal matrix is
//! diagonalized with implicit-shift QL (the EISPACK `tql2` iteration).

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::fock::HermitianOperator;
use crate::linalg::CMatrix;
use crate::tol::HERM_TOL;
use crate::{Error, Result, C64};

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    values: Vec<f64>,
    vectors: CMatrix,
}

impl EigenDecomposition {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvectors stored as columns.
    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, j: usize) -> Vec<C64> {
        self.vectors.column(j)
    }

    /// `V diag(values) V^dag`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        let v = &self.vectors;
        CMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| v[(i, k)] * self.values[k] * v[(j, k)].conj()).sum()
        })
    }

    /// `||V^dag V - I||_F`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.vectors.adjoint().matmul(&self.vectors);
        (&gram - &CMatrix::identity(self.dim())).frobenius_norm()
    }
}

/// Eigendecomposition of a validated Hermitian operator.
pub fn hermitian_eig(h: &HermitianOperator) -> Result<EigenDecomposition> {
    eig_unchecked(h.matrix())
}

/// Eigendecomposition of a raw matrix, rejecting non-Hermitian input.
pub fn hermitian_eig_matrix(h: &CMatrix) -> Result<EigenDecomposition> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch {
            expected: h.rows(),
            found: h.cols(),
        });
    }
    let residual = h.hermitian_residual();
    if residual > HERM_TOL * h.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    eig_unchecked(h)
}

pub(crate) fn eig_unchecked(h: &CMatrix) -> Result<EigenDecomposition> {
    let n = h.rows();
    if n == 0 {
        return Ok(EigenDecomposition {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        });
    }

    // Work on the Hermitian part so tiny asymmetries cannot leak in.
    let mut a: Vec<C64> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            a.push((h[(i, j)] + h[(j, i)].conj()) * 0.5);
        }
    }
    let mut q = CMatrix::identity(n);
    tridiagonalize(&mut a, n, &mut q);

    let mut diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut off = vec![0.0; n];
    let mut phase = vec![C64::new(1.0, 0.0); n];
    for i in 0..n - 1 {
        let e = a[(i + 1) * n + i];
        let m = e.norm();
        off[i] = m;
        phase[i + 1] = if m > 0.0 { phase[i] * (e / m) } else { phase[i] };
    }

    // zt holds Z column-major: zt[c * n + r] = Z[r][c].
    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }
    tql2(&mut diag, &mut off, &mut zt, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]).then(x.cmp(&y)));

    // V = Q D Z.
    for i in 0..n {
        for k in 0..n {
            q[(i, k)] *= phase[k];
        }
    }
    let mut vectors = CMatrix::zeros(n, n);
    for i in 0..n {
        let qrow = q.row(i);
        for (c, &col) in order.iter().enumerate() {
            let z = &zt[col * n..(col + 1) * n];
            let mut acc = C64::new(0.0, 0.0);
            for (qa, &zb) in qrow.iter().zip(z) {
                acc += qa * zb;
            }
            vectors[(i, c)] = acc;
        }
    }
    fix_phases(&mut vectors);

    Ok(EigenDecomposition {
        values: order.iter().map(|&i| diag[i]).collect(),
        vectors,
    })
}

/// Householder reduction of the row-major Hermitian matrix `a` to
/// tridiagonal form; the reflectors are accumulated into `q`.
fn tridiagonalize(a: &mut [C64], n: usize, q: &mut CMatrix) {
    if n < 3 {
        return;
    }
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut p = vec![C64::new(0.0, 0.0); n];
    for k in 0..n - 2 {
        let lo = k + 1;
        let len = n - lo;
        let mut xnorm2 = 0.0;
        for i in lo..n {
            xnorm2 += a[i * n + k].norm_sqr();
        }
        let tail2 = xnorm2 - a[lo * n + k].norm_sqr();
        if tail2 <= f64::MIN_POSITIVE {
            continue;
        }
        let xnorm = xnorm2.sqrt();
        let x0 = a[lo * n + k];
        let x0n = x0.norm();
        let ph = if x0n > 0.0 { x0 / x0n } else { C64::new(1.0, 0.0) };

        // w = (x + ph |x| e1) / ||.||
        let w = &mut w[..len];
        for (t, i) in (lo..n).enumerate() {
            w[t] = a[i * n + k];
        }
        w[0] += ph * xnorm;
        let unorm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in w.iter_mut() {
            *z /= unorm;
        }

        // p = B w, K = w^dag p, q = p - K w; B <- B - 2 (w q^dag + q w^dag).
        let p = &mut p[..len];
        for (t, i) in (lo..n).enumerate() {
            let row = &a[i * n + lo..i * n + n];
            let mut acc = C64::new(0.0, 0.0);
            for (b, wj) in row.iter().zip(w.iter()) {
                acc += b * wj;
            }
            p[t] = acc;
        }
        let kk: f64 = w.iter().zip(p.iter()).map(|(wi, pi)| (wi.conj() * pi).re).sum();
        for (pi, wi) in p.iter_mut().zip(w.iter()) {
            *pi -= wi * kk;
        }
        for (t, i) in (lo..n).enumerate() {
            let wi2 = w[t] * 2.0;
            let qi2 = p[t] * 2.0;
            let row = &mut a[i * n + lo..i * n + n];
            for ((b, wj), qj) in row.iter_mut().zip(w.iter()).zip(p.iter()) {
                *b -= wi2 * qj.conj() + qi2 * wj.conj();
            }
        }

        let newsub = -ph * xnorm;
        a[lo * n + k] = newsub;
        a[k * n + lo] = newsub.conj();
        for i in lo + 1..n {
            a[i * n + k] = C64::new(0.0, 0.0);
            a[k * n + i] = C64::new(0.0, 0.0);
        }

        // Q <- Q P on columns lo..n.
        for i in 0..n {
            let row = &mut q.row_mut(i)[lo..];
            let mut t = C64::new(0.0, 0.0);
            for (qv, wj) in row.iter().zip(w.iter()) {
                t += qv * wj;
            }
            let t2 = t * 2.0;
            for (qv, wj) in row.iter_mut().zip(w.iter()) {
                *qv -= t2 * wj.conj();
            }
        }
    }
}

/// Implicit QL on a symmetric tridiagonal matrix. `off[i]` couples `i` and
/// `i + 1`; `zt` is the column-major accumulator for the eigenvectors.
fn tql2(d: &mut [f64], e: &mut [f64], zt: &mut [f64], n: usize) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    const MAX_ITER: usize = 100;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_ITER {
                    return Err(Error::EigenNoConvergence(MAX_ITER));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (left, right) = zt.split_at_mut((i + 1) * n);
                    let zi = &mut left[i * n..];
                    let zi1 = &mut right[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let hh = *b;
                        *b = s * *a + c * hh;
                        *a = c * *a - s * hh;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Real symmetric tridiagonal eigenproblem. `off[i]` couples `i` and `i + 1`.
/// Returns unsorted eigenvalues and the eigenvectors column-major.
pub(crate) fn tridiagonal_eig(mut diag: Vec<f64>, off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }
    if n > 0 {
        tql2(&mut diag, &mut e, &mut zt, n)?;
    }
    Ok((diag, zt))
}

/// Rotates each column so its largest-magnitude entry is real and positive.
fn fix_phases(v: &mut CMatrix) {
    let n = v.rows();
    for c in 0..v.cols() {
        let mut best = 0;
        let mut best_mag = -1.0;
        for r in 0..n {
            let m = v[(r, c)].norm_sqr();
            if m > best_mag * (1.0 + 1e-12) {
                best_mag = m;
                best = r;
            }
        }
        let z = v[(best, c)];
        let mag = z.norm();
        if mag > 0.0 {
            let rot = z.conj() / mag;
            for r in 0..n {
                v[(r, c)] *= rot;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let e = hermitian_eig_matrix(&CMatrix::identity(5)).unwrap();
        assert!(e.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn pauli_x() {
        let m = CMatrix::from_row_major(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let e = hermitian_eig_matrix(&m).unwrap();
        assert!((e.values()[0] + 1.0).abs() < 1e-15);
        assert!((e.values()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_major(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        match hermitian_eig_matrix(&m) {
            Err(Error::NotHermitian { residual }) => assert!((residual - 2f64.sqrt()).abs() < 1e-15),
            other => panic!("expected NotHermitian, got {other:?}"),
        }
    }

    #[test]
    fn complex_tridiagonal_input() {
        // Already tridiagonal with complex couplings: exercises the phase step.
        let m = CMatrix::from_row_major(
            3,
            3,
            vec![
                c(1.0, 0.0),
                c(0.0, 1.0),
                c(0.0, 0.0),
                c(0.0, -1.0),
                c(2.0, 0.0),
                c(1.0, 1.0),
                c(0.0, 0.0),
                c(1.0, -1.0),
                c(3.0, 0.0),
            ],
        );
        let e = hermitian_eig_matrix(&m).unwrap();
        let err = (&e.reconstruct() - &m).frobenius_norm();
        assert!(err < 1e-13, "reconstruction error {err}");
        assert!(e.orthonormality_error() < 1e-13);
    }

    #[test]
    fn degenerate_spectrum_is_orthonormal() {
        let m = CMatrix::diagonal(&[2.0, 2.0, 2.0, -1.0]);
        let e = hermitian_eig_matrix(&m).unwrap();
        assert_eq!(e.values(), &[-1.0, 2.0, 2.0, 2.0]);
        assert!(e.orthonormality_error() < 1e-14);
    }
}
