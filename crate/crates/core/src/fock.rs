//! Truncated Fock space: bases, states, ladder and quadrature operators,
//! two-mode composition and state moments.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::eigen::{eig_unchecked, EigenDecomposition};
use crate::linalg::{inner, norm_sqr, CMatrix};
use crate::tol::{HERM_TOL, MS_TOL, NORM_TOL, PSD_TOL, TAIL_TOL, TRACE_TOL};
use crate::{Error, Result, C64};

/// Fock states `|0>, ..., |dim-1>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TruncatedBasis {
    dim: usize,
}

impl TruncatedBasis {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidBasis(dim));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Factor dimensions of a one- or two-mode Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeDims {
    One(usize),
    Two(usize, usize),
}

impl ModeDims {
    pub fn total(&self) -> usize {
        match *self {
            ModeDims::One(d) => d,
            ModeDims::Two(a, b) => a * b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    A,
    B,
}

/// Single-mode `<n>`, `<a>` and `<a^2>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureMoments {
    pub nbar: f64,
    pub alpha: C64,
    pub xi: C64,
}

impl QuadratureMoments {
    /// `nbar - |alpha|^2`, the mean quadrature excess variance.
    pub fn energy_term(&self) -> f64 {
        self.nbar - self.alpha.norm_sqr()
    }

    /// `xi - alpha^2`.
    pub fn squeezing(&self) -> C64 {
        self.xi - self.alpha * self.alpha
    }

    /// `Var X_mu = nbar - |alpha|^2 + 1/2 - Re[e^{2 i mu} (xi - alpha^2)]`.
    pub fn quadrature_variance(&self, mu: f64) -> f64 {
        let rot = C64::from_polar(1.0, 2.0 * mu);
        self.energy_term() + 0.5 - (rot * self.squeezing()).re
    }

    /// Checks `|alpha|^2 <= nbar` and `|xi| <= sqrt(nbar (nbar + 1))`.
    pub fn satisfies_bounds(&self, slack: f64) -> bool {
        self.alpha.norm_sqr() <= self.nbar + slack && self.xi.norm() <= (self.nbar * (self.nbar + 1.0)).sqrt() + slack
    }
}

/// Suggests a dimension for a state whose top-level population is too large.
fn suggest_from_populations(pops: &[f64]) -> usize {
    let total: f64 = pops.iter().sum();
    let total = if total > 0.0 { total } else { 1.0 };
    let mean: f64 = pops.iter().enumerate().map(|(n, p)| n as f64 * p).sum::<f64>() / total;
    let second: f64 = pops.iter().enumerate().map(|(n, p)| (n * n) as f64 * p).sum::<f64>() / total;
    let sd = (second - mean * mean).max(0.0).sqrt();
    let d = pops.len();
    let heuristic = (mean + 10.0 * sd + 10.0).ceil() as usize;
    heuristic.max(d + d / 2 + 1)
}

fn check_tail(pops: &[f64]) -> Result<()> {
    let tail = *pops.last().unwrap_or(&0.0);
    if tail > TAIL_TOL {
        return Err(Error::TruncationInadequate {
            dim: pops.len(),
            tail,
            suggested: suggest_from_populations(pops),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    basis: TruncatedBasis,
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Validates normalization and truncation adequacy.
    pub fn new(basis: TruncatedBasis, amplitudes: Vec<C64>) -> Result<Self> {
        let norm = Self::check_len(basis, &amplitudes)?;
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        let s = Self::new_unchecked(basis, amplitudes);
        s.check_truncation()?;
        Ok(s)
    }

    /// Rescales to unit norm, then checks truncation adequacy.
    pub fn from_unnormalized(basis: TruncatedBasis, mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = Self::check_len(basis, &amplitudes)?;
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        for z in amplitudes.iter_mut() {
            *z /= norm;
        }
        let s = Self::new_unchecked(basis, amplitudes);
        s.check_truncation()?;
        Ok(s)
    }

    pub(crate) fn new_unchecked(basis: TruncatedBasis, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), basis.dim());
        Self { basis, amplitudes }
    }

    fn check_len(basis: TruncatedBasis, amplitudes: &[C64]) -> Result<f64> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: amplitudes.len(),
            });
        }
        Ok(norm_sqr(amplitudes).sqrt())
    }

    fn check_truncation(&self) -> Result<()> {
        check_tail(&self.populations())
    }

    pub fn fock(basis: TruncatedBasis, n: usize) -> Result<Self> {
        if n >= basis.dim() {
            return Err(Error::TruncationInadequate {
                dim: basis.dim(),
                tail: 1.0,
                suggested: n + 3,
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); basis.dim()];
        amps[n] = C64::new(1.0, 0.0);
        Self::new(basis, amps)
    }

    pub fn basis(&self) -> TruncatedBasis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Population of the top basis state.
    pub fn tail_mass(&self) -> f64 {
        self.amplitudes.last().map_or(0.0, |z| z.norm_sqr())
    }

    /// Zero-pads the amplitude vector to a larger basis.
    pub fn padded(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        let mut amps = self.amplitudes.clone();
        amps.resize(dim, C64::new(0.0, 0.0));
        Ok(Self::new_unchecked(TruncatedBasis::new(dim)?, amps))
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            dims: ModeDims::One(self.dim()),
            matrix: CMatrix::outer(&self.amplitudes),
        }
    }

    pub fn expectation(&self, op: &HermitianOperator) -> Result<f64> {
        op.check_dim(self.dim())?;
        Ok(op.matrix.sandwich(&self.amplitudes, &self.amplitudes).re)
    }

    /// `<G^2> - <G>^2`.
    pub fn variance(&self, op: &HermitianOperator) -> Result<f64> {
        op.check_dim(self.dim())?;
        let g = op.matrix.mat_vec(&self.amplitudes);
        let mean = inner(&self.amplitudes, &g).re;
        Ok((norm_sqr(&g) - mean * mean).max(0.0))
    }

    pub fn overlap(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    pub fn moments(&self) -> Result<QuadratureMoments> {
        moments_of_pure(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: ModeDims,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates shape, Hermiticity, unit trace and positivity.
    pub fn new(dims: ModeDims, matrix: CMatrix) -> Result<Self> {
        Self::check_dims(dims, &matrix)?;
        let residual = matrix.hermitian_residual();
        if residual > HERM_TOL * matrix.frobenius_norm().max(1.0) {
            return Err(Error::NotHermitian { residual });
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::TraceNotOne { trace });
        }
        let rho = Self { dims, matrix };
        let eig = rho.eig()?;
        let min_eigenvalue = eig.values().first().copied().unwrap_or(0.0);
        if min_eigenvalue < -PSD_TOL {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(rho)
    }

    pub(crate) fn new_unchecked(dims: ModeDims, matrix: CMatrix) -> Self {
        debug_assert_eq!(dims.total(), matrix.rows());
        Self { dims, matrix }
    }

    fn check_dims(dims: ModeDims, matrix: &CMatrix) -> Result<()> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        let min_factor = match dims {
            ModeDims::One(d) => d,
            ModeDims::Two(a, b) => a.min(b),
        };
        if min_factor < 2 {
            return Err(Error::InvalidBasis(min_factor));
        }
        if dims.total() != matrix.rows() {
            return Err(Error::DimensionMismatch {
                expected: dims.total(),
                found: matrix.rows(),
            });
        }
        Ok(())
    }

    /// Single-mode diagonal state from populations.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        Self::new(ModeDims::One(populations.len()), CMatrix::diagonal(populations))
    }

    pub fn dims(&self) -> ModeDims {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.total()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_single_mode(&self) -> bool {
        matches!(self.dims, ModeDims::One(_))
    }

    pub fn basis(&self) -> Result<TruncatedBasis> {
        match self.dims {
            ModeDims::One(d) => TruncatedBasis::new(d),
            ModeDims::Two(..) => Err(Error::Config(
                "a single-mode basis was requested for a two-mode state".into(),
            )),
        }
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        // Tr(rho rho) = sum |rho_ij|^2 for Hermitian rho.
        self.matrix.frobenius_norm().powi(2)
    }

    pub fn eig(&self) -> Result<EigenDecomposition> {
        eig_unchecked(&self.matrix)
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// Top-level population of each mode.
    pub fn tail_mass(&self) -> f64 {
        match self.dims {
            ModeDims::One(d) => self.matrix[(d - 1, d - 1)].re,
            ModeDims::Two(..) => {
                let a = partial_trace(self, Mode::A).map(|r| r.tail_mass()).unwrap_or(0.0);
                let b = partial_trace(self, Mode::B).map(|r| r.tail_mass()).unwrap_or(0.0);
                a.max(b)
            }
        }
    }

    pub fn check_truncation(&self) -> Result<()> {
        match self.dims {
            ModeDims::One(_) => check_tail(&self.populations()),
            ModeDims::Two(..) => {
                check_tail(&partial_trace(self, Mode::A)?.populations())?;
                check_tail(&partial_trace(self, Mode::B)?.populations())
            }
        }
    }

    /// Zero-pads a single-mode state to a larger basis.
    pub fn padded(&self, dim: usize) -> Result<Self> {
        let d = match self.dims {
            ModeDims::One(d) => d,
            ModeDims::Two(..) => return Err(Error::Config("cannot pad a two-mode state".into())),
        };
        if dim < d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: dim,
            });
        }
        let m = CMatrix::from_fn(dim, dim, |i, j| {
            if i < d && j < d {
                self.matrix[(i, j)]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Ok(Self::new_unchecked(ModeDims::One(dim), m))
    }

    /// `self (x) other` as a two-mode state.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        match (self.dims, other.dims) {
            (ModeDims::One(a), ModeDims::One(b)) => Ok(Self::new_unchecked(
                ModeDims::Two(a, b),
                tensor_product(&self.matrix, &other.matrix),
            )),
            _ => Err(Error::Config("tensor product needs two single-mode states".into())),
        }
    }

    pub fn expectation(&self, op: &HermitianOperator) -> Result<f64> {
        op.check_dim(self.dim())?;
        Ok(trace_of_product(&self.matrix, &op.matrix).re)
    }

    pub fn moments(&self) -> Result<QuadratureMoments> {
        moments_of_density(self)
    }
}

/// `Tr(A B)` without forming the product.
pub(crate) fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.rows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        let residual = matrix.hermitian_residual();
        if residual > HERM_TOL * matrix.frobenius_norm().max(1.0) {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self { matrix })
    }

    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.matrix.mat_vec(v)
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

/// `a` with `a|n> = sqrt(n) |n-1>`.
pub fn annihilation(basis: TruncatedBasis) -> CMatrix {
    let d = basis.dim();
    let mut a = CMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn creation(basis: TruncatedBasis) -> CMatrix {
    annihilation(basis).adjoint()
}

pub fn number_operator(basis: TruncatedBasis) -> HermitianOperator {
    let diag: Vec<f64> = (0..basis.dim()).map(|n| n as f64).collect();
    HermitianOperator::new_unchecked(CMatrix::diagonal(&diag))
}

/// `X_mu = i (e^{-i mu} a^dag - e^{i mu} a) / sqrt 2`.
pub fn quadrature(basis: TruncatedBasis, mu: f64) -> HermitianOperator {
    let d = basis.dim();
    let i = C64::new(0.0, 1.0);
    let e_minus = C64::from_polar(1.0, -mu);
    let e_plus = C64::from_polar(1.0, mu);
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let mut x = CMatrix::zeros(d, d);
    for n in 1..d {
        let r = (n as f64).sqrt();
        // a^dag: (n, n-1); a: (n-1, n)
        x[(n, n - 1)] = i * e_minus * r * s;
        x[(n - 1, n)] = -i * e_plus * r * s;
    }
    HermitianOperator::new_unchecked(x)
}

/// `x = (a + a^dag) / sqrt 2`.
pub fn x_quadrature(basis: TruncatedBasis) -> HermitianOperator {
    quadrature(basis, core::f64::consts::FRAC_PI_2)
}

/// `p = i (a^dag - a) / sqrt 2`.
pub fn p_quadrature(basis: TruncatedBasis) -> HermitianOperator {
    quadrature(basis, 0.0)
}

pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kron(b)
}

/// Reduces a two-mode state to the mode named by `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: Mode) -> Result<DensityMatrix> {
    let (da, db) = match rho.dims {
        ModeDims::Two(a, b) => (a, b),
        ModeDims::One(d) => {
            return Err(Error::Config(format!(
                "partial trace needs a two-mode state, got a single mode of dim {d}"
            )))
        }
    };
    let m = &rho.matrix;
    if m.rows() != da * db {
        return Err(Error::DimensionMismatch {
            expected: da * db,
            found: m.rows(),
        });
    }
    let out = match keep {
        Mode::A => CMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()),
        Mode::B => CMatrix::from_fn(db, db, |i, j| (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()),
    };
    let d = out.rows();
    Ok(DensityMatrix::new_unchecked(ModeDims::One(d), out))
}

pub fn moments_of_pure(psi: &PureState) -> Result<QuadratureMoments> {
    psi.check_truncation()?;
    Ok(amplitude_moments(psi.amplitudes()))
}

/// Moments of an amplitude vector, without any truncation check.
pub(crate) fn amplitude_moments(c: &[C64]) -> QuadratureMoments {
    let mut nbar = 0.0;
    let mut alpha = C64::new(0.0, 0.0);
    let mut xi = C64::new(0.0, 0.0);
    for n in 0..c.len() {
        let nf = n as f64;
        nbar += nf * c[n].norm_sqr();
        if n >= 1 {
            alpha += c[n - 1].conj() * c[n] * nf.sqrt();
        }
        if n >= 2 {
            xi += c[n - 2].conj() * c[n] * (nf * (nf - 1.0)).sqrt();
        }
    }
    QuadratureMoments { nbar, alpha, xi }
}

/// Moments `Tr(rho a^dag a)`, `Tr(rho a)`, `Tr(rho a^2)` of a single-mode state.
pub fn moments_of_density(rho: &DensityMatrix) -> Result<QuadratureMoments> {
    if !rho.is_single_mode() {
        return Err(Error::Config("moments are defined for single-mode states".into()));
    }
    rho.check_truncation()?;
    let m = &rho.matrix;
    let d = rho.dim();
    let mut nbar = 0.0;
    let mut alpha = C64::new(0.0, 0.0);
    let mut xi = C64::new(0.0, 0.0);
    for n in 0..d {
        let nf = n as f64;
        nbar += nf * m[(n, n)].re;
        if n >= 1 {
            alpha += m[(n, n - 1)] * nf.sqrt();
        }
        if n >= 2 {
            xi += m[(n, n - 2)] * (nf * (nf - 1.0)).sqrt();
        }
    }
    let out = QuadratureMoments { nbar, alpha, xi };
    debug_assert!(out.satisfies_bounds(MS_TOL.max(1e-6)));
    Ok(out)
}
