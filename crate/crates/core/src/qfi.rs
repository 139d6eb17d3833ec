//! Quantum Fisher information on the variance scale, its maximum over
//! quadratures, metrological power and the pure-state nonclassicality.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::eigen::EigenDecomposition;
use crate::fock::{
    amplitude_moments, p_quadrature, x_quadrature, DensityMatrix, HermitianOperator, PureState, QuadratureMoments,
};
use crate::linalg::{inner, norm_sqr, normalize};
use crate::roof::EnsembleDecomposition;
use crate::tol::{CLASSICAL_SNAP, SUPP_EPS};
use crate::{Error, Result, C64};

/// Eigenvalues above `SUPP_EPS * p_max` and their eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    pub probs: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

impl Support {
    pub fn from_eig(eig: &EigenDecomposition) -> Self {
        let values = eig.values();
        let pmax = values.iter().copied().fold(0.0, f64::max);
        let cut = SUPP_EPS * pmax;
        let mut probs = Vec::new();
        let mut vectors = Vec::new();
        for j in (0..values.len()).rev() {
            if values[j] > cut {
                probs.push(values[j]);
                vectors.push(eig.vector(j));
            }
        }
        Self { probs, vectors }
    }

    /// Uses the eigendecomposition unless the state is pure to within the
    /// support cutoff, in which case the support is read off one column.
    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        match Self::rank_one(rho) {
            Some(s) => Ok(s),
            None => Ok(Self::from_eig(&rho.eig()?)),
        }
    }

    /// With `1 - Tr rho^2 <= SUPP_EPS` every eigenvalue but the largest is
    /// below `SUPP_EPS * p_max`, so the support is `rho e_j` for the largest
    /// diagonal entry `j`, normalized.
    fn rank_one(rho: &DensityMatrix) -> Option<Self> {
        let tr = rho.trace();
        if 1.0 - rho.purity() / (tr * tr) > SUPP_EPS {
            return None;
        }
        let m = rho.matrix();
        let n = m.rows();
        let j = (0..n).max_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re))?;
        let mut v: Vec<C64> = (0..n).map(|i| m[(i, j)]).collect();
        if normalize(&mut v) == 0.0 {
            return None;
        }
        // Largest component real and positive, as for eigenvectors.
        let mut best = 0;
        for (i, z) in v.iter().enumerate() {
            if z.norm_sqr() > v[best].norm_sqr() * (1.0 + 1e-12) {
                best = i;
            }
        }
        let rot = v[best].conj() / v[best].norm();
        for z in v.iter_mut() {
            *z *= rot;
        }
        Some(Self {
            probs: alloc::vec![tr],
            vectors: alloc::vec![v],
        })
    }

    pub fn rank(&self) -> usize {
        self.probs.len()
    }
}

/// Symmetric bilinear extension of the eigenbasis QFI formula:
/// `sum_j p_j Re<A phi_j|B phi_j> - sum_jk w_jk Re(A_jk conj(B_jk))`
/// with `w_jk = 2 p_j p_k / (p_j + p_k)`. `a[j]` holds `A phi_j`.
pub fn qfi_bilinear(support: &Support, a: &[Vec<C64>], b: &[Vec<C64>]) -> f64 {
    let p = &support.probs;
    let phi = &support.vectors;
    let r = p.len();
    let mut first = 0.0;
    for j in 0..r {
        first += p[j] * inner(&a[j], &b[j]).re;
    }
    let mut second = 0.0;
    for j in 0..r {
        for k in 0..r {
            let w = 2.0 * p[j] * p[k] / (p[j] + p[k]);
            let ajk = inner(&phi[j], &a[k]);
            let bjk = if core::ptr::eq(a, b) {
                ajk
            } else {
                inner(&phi[j], &b[k])
            };
            second += w * (ajk * bjk.conj()).re;
        }
    }
    first - second
}

/// QFI of the generator whose action on support vectors is `g_phi`.
pub fn qfi_from_support(support: &Support, g_phi: &[Vec<C64>]) -> f64 {
    let f = qfi_bilinear(support, g_phi, g_phi);
    f.max(0.0)
}

/// `F = sum_j p_j ||G phi_j||^2 - sum_jk |<phi_j|G|phi_k>|^2 2 p_j p_k / (p_j + p_k)`.
pub fn qfi_generator(rho: &DensityMatrix, g: &HermitianOperator) -> Result<f64> {
    if g.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: g.dim(),
        });
    }
    let support = Support::from_density(rho)?;
    let g_phi: Vec<Vec<C64>> = support.vectors.iter().map(|v| g.apply(v)).collect();
    Ok(qfi_from_support(&support, &g_phi))
}

/// `F(mu) = F_xx sin^2 mu + F_pp cos^2 mu + 2 F_xp sin mu cos mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureForm {
    pub fxx: f64,
    pub fpp: f64,
    pub fxp: f64,
}

impl QuadratureForm {
    pub fn value_at(&self, mu: f64) -> f64 {
        let (s, c) = mu.sin_cos();
        self.fxx * s * s + self.fpp * c * c + 2.0 * self.fxp * s * c
    }

    fn half_gap(&self) -> (f64, f64, f64) {
        let mean = 0.5 * (self.fxx + self.fpp);
        let u = 0.5 * (self.fpp - self.fxx);
        (mean, u, u.hypot(self.fxp))
    }

    pub fn max_value(&self) -> f64 {
        let (mean, _, amp) = self.half_gap();
        mean + amp
    }

    /// Maximizing angle in `[0, pi)`; `0` when the form is isotropic.
    pub fn argmax(&self) -> f64 {
        let (mean, u, amp) = self.half_gap();
        if amp <= 1e-12 * mean.abs().max(1.0) {
            return 0.0;
        }
        wrap_pi(0.5 * self.fxp.atan2(u))
    }
}

pub(crate) fn wrap_pi(mu: f64) -> f64 {
    let mut m = mu % PI;
    if m < 0.0 {
        m += PI;
    }
    if m >= PI {
        0.0
    } else {
        m
    }
}

/// Maximum QFI over quadratures with the maximizing angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiResult {
    pub value: f64,
    pub mu_star: f64,
    pub support_rank: usize,
}

pub fn quadrature_form(rho: &DensityMatrix) -> Result<(QuadratureForm, usize)> {
    let basis = rho.basis()?;
    rho.check_truncation()?;
    let support = Support::from_density(rho)?;
    let x = x_quadrature(basis);
    let p = p_quadrature(basis);
    let xs: Vec<Vec<C64>> = support.vectors.iter().map(|v| x.apply(v)).collect();
    let ps: Vec<Vec<C64>> = support.vectors.iter().map(|v| p.apply(v)).collect();
    let form = QuadratureForm {
        fxx: qfi_bilinear(&support, &xs, &xs),
        fpp: qfi_bilinear(&support, &ps, &ps),
        fxp: qfi_bilinear(&support, &xs, &ps),
    };
    Ok((form, support.rank()))
}

pub fn max_quadrature_qfi(rho: &DensityMatrix) -> Result<QfiResult> {
    let (form, support_rank) = quadrature_form(rho)?;
    Ok(QfiResult {
        value: form.max_value().max(0.0),
        mu_star: form.argmax(),
        support_rank,
    })
}

/// Snaps excesses at rounding level to exactly zero.
pub(crate) fn clamp_power(fx: f64) -> f64 {
    let excess = fx - 0.5;
    if excess <= CLASSICAL_SNAP {
        0.0
    } else {
        excess
    }
}

/// `W = max(F_X - 1/2, 0)`.
pub fn metrological_power(rho: &DensityMatrix) -> Result<f64> {
    Ok(clamp_power(max_quadrature_qfi(rho)?.value))
}

/// Closed-form nonclassicality of a pure state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureMeasure {
    /// `nbar - |alpha|^2 + |xi - alpha^2|`.
    pub n: f64,
    /// `nbar - |alpha|^2`.
    pub q: f64,
    pub mu_star: f64,
    pub moments: QuadratureMoments,
}

impl PureMeasure {
    pub fn from_moments(m: QuadratureMoments) -> Self {
        let q = m.energy_term().max(0.0);
        let s = m.squeezing();
        let mu_star = if s.norm() <= 1e-12 * m.nbar.max(1.0) {
            0.0
        } else {
            wrap_pi(0.5 * (PI - s.arg()))
        };
        Self {
            n: (q + s.norm()).max(0.0),
            q,
            mu_star,
            moments: m,
        }
    }
}

pub fn pure_nonclassicality(psi: &PureState) -> Result<PureMeasure> {
    Ok(PureMeasure::from_moments(psi.moments()?))
}

/// Ensemble-averaged measures of a decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleObjective {
    /// `sum p_j (nbar_j - |alpha_j|^2) + |sum p_j (xi_j - alpha_j^2)|`.
    pub n_obj: f64,
    /// `sum p_j (nbar_j - |alpha_j|^2 + |xi_j - alpha_j^2|)`.
    pub v1_obj: f64,
}

pub fn ensemble_objective(ens: &EnsembleDecomposition) -> EnsembleObjective {
    let mut energy = 0.0;
    let mut squeeze = C64::new(0.0, 0.0);
    let mut v1 = 0.0;
    for (p, psi) in ens.weights().iter().zip(ens.members()) {
        let m = amplitude_moments(psi.amplitudes());
        let q = m.energy_term();
        let s = m.squeezing();
        energy += p * q;
        squeeze += s * *p;
        v1 += p * (q + s.norm());
    }
    EnsembleObjective {
        n_obj: energy + squeeze.norm(),
        v1_obj: v1,
    }
}

/// Variance of `G` in a normalized vector.
pub(crate) fn vector_variance(v: &[C64], gv: &[C64]) -> f64 {
    let mean = inner(v, gv).re;
    (norm_sqr(gv) - mean * mean).max(0.0)
}
