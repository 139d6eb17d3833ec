//! Convex-roof upper bounds on the nonclassicality of mixed states.
//!
//! Every decomposition of `rho` into `m` pure states has the form
//! `sqrt(p_j) |psi_j> = sum_k U_jk sqrt(lambda_k) |phi_k>`, with `U` an
//! `m x r` isometry and `(lambda_k, phi_k)` the support eigenpairs. The
//! ensemble-averaged objective depends on `U` only through the rows
//! `y_j = U_j diag(sqrt lambda)`, so the search runs over those rows with
//! two-row unitary rotations. Any ensemble found is feasible, hence the
//! reported value is an upper bound.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::eigen::EigenDecomposition;
use crate::fock::{annihilation, quadrature, DensityMatrix, ModeDims, PureState, TruncatedBasis};
use crate::linalg::{inner, norm_sqr, CMatrix};
use crate::qfi::{ensemble_objective, metrological_power, qfi_generator, vector_variance, PureMeasure, Support};
use crate::tol::{MAX_FLAGS, NORM_TOL};
use crate::{Error, Result, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Rows of an ensemble whose weight falls below this are discarded.
pub const MIN_WEIGHT: f64 = 1e-14;

/// Weighted pure states with `sum_j p_j |psi_j><psi_j| = rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleDecomposition {
    weights: Vec<f64>,
    members: Vec<PureState>,
}

impl EnsembleDecomposition {
    pub fn new(weights: Vec<f64>, members: Vec<PureState>) -> Result<Self> {
        if weights.len() != members.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                found: members.len(),
            });
        }
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty ensemble".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidWeights("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidWeights(alloc::format!("weights sum to {total}")));
        }
        let d = members[0].dim();
        if let Some(bad) = members.iter().find(|m| m.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.dim(),
            });
        }
        Ok(Self { weights, members })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn members(&self) -> &[PureState] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn density(&self) -> DensityMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for (w, psi) in self.weights.iter().zip(&self.members) {
            let c = psi.amplitudes();
            for i in 0..d {
                if c[i] == ZERO {
                    continue;
                }
                let ci = c[i] * *w;
                for j in 0..d {
                    m[(i, j)] += ci * c[j].conj();
                }
            }
        }
        DensityMatrix::new_unchecked(ModeDims::One(d), m)
    }

    /// `||sum_j p_j |psi_j><psi_j| - rho||_F`.
    pub fn reconstruction_error(&self, rho: &DensityMatrix) -> f64 {
        (&self.density().matrix().clone() - rho.matrix()).frobenius_norm()
    }
}

/// An `m x r` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    matrix: CMatrix,
}

impl Isometry {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.rows() < matrix.cols() || matrix.cols() == 0 {
            return Err(Error::InvalidParameter(alloc::format!(
                "isometry needs rows >= cols >= 1, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let err = (&matrix.adjoint().matmul(&matrix) - &CMatrix::identity(matrix.cols())).frobenius_norm();
        if err > 1e-10 {
            return Err(Error::InvalidParameter(alloc::format!(
                "columns are not orthonormal: ||U^dag U - I||_F = {err:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// `[I_r; 0]`.
    pub fn padded_identity(m: usize, r: usize) -> Result<Self> {
        Self::new(CMatrix::from_fn(
            m,
            r,
            |i, j| {
                if i == j {
                    C64::new(1.0, 0.0)
                } else {
                    ZERO
                }
            },
        ))
    }

    /// Gaussian matrix orthonormalized column by column.
    pub fn random<R: Rng + ?Sized>(m: usize, r: usize, rng: &mut R) -> Result<Self> {
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(r);
        while cols.len() < r {
            let mut v: Vec<C64> = (0..m)
                .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            for _ in 0..2 {
                for c in &cols {
                    let proj = inner(c, &v);
                    for (vi, ci) in v.iter_mut().zip(c) {
                        *vi -= proj * ci;
                    }
                }
            }
            let n = norm_sqr(&v).sqrt();
            if n > 1e-8 {
                cols.push(v.into_iter().map(|z| z / n).collect());
            }
        }
        Self::new(CMatrix::from_fn(m, r, |i, j| cols[j][i]))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }
}

/// Builds the ensemble `sqrt(p_j)|psi_j> = sum_k U_jk sqrt(lambda_k)|phi_k>`
/// over the support of the decomposed state.
pub fn ensemble_from_isometry(eig: &EigenDecomposition, u: &Isometry) -> Result<EnsembleDecomposition> {
    let support = Support::from_eig(eig);
    if u.cols() != support.rank() {
        return Err(Error::RankMismatch {
            expected: support.rank(),
            found: u.cols(),
        });
    }
    let lam: Vec<f64> = support.probs.iter().map(|p| p.sqrt()).collect();
    let rows: Vec<Vec<C64>> = (0..u.rows())
        .map(|j| (0..u.cols()).map(|k| u.matrix()[(j, k)] * lam[k]).collect())
        .collect();
    build_ensemble(&support, &rows, eig.dim())
}

fn build_ensemble(support: &Support, rows: &[Vec<C64>], dim: usize) -> Result<EnsembleDecomposition> {
    let basis = TruncatedBasis::new(dim)?;
    let mut weights = Vec::new();
    let mut members = Vec::new();
    for y in rows {
        let p = norm_sqr(y);
        if p < MIN_WEIGHT {
            continue;
        }
        let mut amps = vec![ZERO; dim];
        for (yk, phi) in y.iter().zip(&support.vectors) {
            for (a, f) in amps.iter_mut().zip(phi) {
                *a += yk * f;
            }
        }
        let n = norm_sqr(&amps).sqrt();
        for a in amps.iter_mut() {
            *a /= n;
        }
        weights.push(p);
        members.push(PureState::new_unchecked(basis, amps));
    }
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    EnsembleDecomposition::new(weights, members)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoofOptions {
    /// Starts per ensemble size; start 0 is the eigen-ensemble.
    pub restarts: usize,
    /// Largest ensemble size; `None` means support rank + 2.
    pub m_max: Option<usize>,
    pub seed: u64,
    /// Improvements below this count as stalled proposals.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for RoofOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            m_max: None,
            seed: 0,
            tol: 1e-8,
            max_sweeps: 500,
        }
    }
}

/// Best value found for one ensemble size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeSensitivity {
    pub m: usize,
    pub best: f64,
    pub converged_runs: usize,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoofResult {
    pub n_upper: f64,
    pub w_lower: f64,
    pub best_ensemble: EnsembleDecomposition,
    /// Total number of local searches.
    pub restarts_used: usize,
    /// Whether the search that produced `n_upper` met the stall criterion.
    pub converged: bool,
    pub support_rank: usize,
    pub best_m: usize,
    pub best_restart: usize,
    pub per_m: Vec<SizeSensitivity>,
}

/// The objective in support coordinates.
struct Problem {
    r: usize,
    /// `<phi_k| a |phi_l>`, row-major.
    a: Vec<C64>,
    nbar: f64,
    xi: C64,
}

impl Problem {
    fn new(support: &Support, basis: TruncatedBasis) -> Self {
        let r = support.rank();
        let am = annihilation(basis);
        let a_phi: Vec<Vec<C64>> = support.vectors.iter().map(|v| am.mat_vec(v)).collect();
        let a2_phi: Vec<Vec<C64>> = a_phi.iter().map(|v| am.mat_vec(v)).collect();
        let mut a = vec![ZERO; r * r];
        let mut nbar = 0.0;
        let mut xi = ZERO;
        for k in 0..r {
            for l in 0..r {
                a[k * r + l] = inner(&support.vectors[k], &a_phi[l]);
            }
            nbar += support.probs[k] * norm_sqr(&a_phi[k]);
            xi += inner(&support.vectors[k], &a2_phi[k]) * support.probs[k];
        }
        Self { r, a, nbar, xi }
    }

    /// `u^dag A v`.
    fn form(&self, u: &[C64], v: &[C64]) -> C64 {
        let r = self.r;
        let mut acc = ZERO;
        for k in 0..r {
            if u[k] == ZERO {
                continue;
            }
            let row = &self.a[k * r..(k + 1) * r];
            let mut s = ZERO;
            for (al, vl) in row.iter().zip(v) {
                s += al * vl;
            }
            acc += u[k].conj() * s;
        }
        acc
    }
}

/// Smoothing schedule for `|xi - sum beta^2/p|`; the last stage is exact.
const SMOOTHING: [f64; 4] = [1e-1, 1e-2, 1e-3, 0.0];

/// `|z|` for `eps = 0`, otherwise `hypot(|z|, eps) - eps`.
#[inline]
fn smooth_abs(z: C64, eps: f64) -> f64 {
    if eps == 0.0 {
        z.norm()
    } else {
        z.norm().hypot(eps) - eps
    }
}

/// `(|beta|^2 / p, beta^2 / p)` of one row, zero for discarded rows.
#[inline]
fn row_terms(p: f64, beta: C64) -> (f64, C64) {
    if p < MIN_WEIGHT {
        (0.0, ZERO)
    } else {
        (beta.norm_sqr() / p, beta * beta / p)
    }
}

struct Search<'a> {
    prob: &'a Problem,
    y: Vec<Vec<C64>>,
    p: Vec<f64>,
    beta: Vec<C64>,
    s1: f64,
    s2: C64,
    eps: f64,
}

impl<'a> Search<'a> {
    fn new(prob: &'a Problem, y: Vec<Vec<C64>>) -> Self {
        let mut s = Self {
            prob,
            p: vec![0.0; y.len()],
            beta: vec![ZERO; y.len()],
            y,
            s1: 0.0,
            s2: ZERO,
            eps: 0.0,
        };
        s.refresh();
        s
    }

    fn refresh(&mut self) {
        self.s1 = 0.0;
        self.s2 = ZERO;
        for j in 0..self.y.len() {
            self.p[j] = norm_sqr(&self.y[j]);
            self.beta[j] = self.prob.form(&self.y[j], &self.y[j]);
            let (t1, t2) = row_terms(self.p[j], self.beta[j]);
            self.s1 += t1;
            self.s2 += t2;
        }
    }

    fn value(&self) -> f64 {
        self.prob.nbar - self.s1 + smooth_abs(self.prob.xi - self.s2, self.eps)
    }

    /// Objective along the rotation of rows `i`, `j` with phase `phi`.
    fn line(&self, i: usize, j: usize, phi: f64) -> Line {
        let (u, v) = (&self.y[i], &self.y[j]);
        let (ti, si) = row_terms(self.p[i], self.beta[i]);
        let (tj, sj) = row_terms(self.p[j], self.beta[j]);
        Line {
            w: C64::from_polar(1.0, -phi),
            a_uu: self.beta[i],
            a_vv: self.beta[j],
            a_uv: self.prob.form(u, v),
            a_vu: self.prob.form(v, u),
            g_uv: inner(u, v),
            p_u: self.p[i],
            p_v: self.p[j],
            rest1: self.s1 - ti - tj,
            rest2: self.s2 - si - sj,
            nbar: self.prob.nbar,
            xi: self.prob.xi,
            eps: self.eps,
        }
    }

    fn rotate(&mut self, i: usize, j: usize, phi: f64, theta: f64) {
        let (s, c) = theta.sin_cos();
        let w = C64::from_polar(1.0, -phi);
        let r = self.prob.r;
        for k in 0..r {
            let (u, v) = (self.y[i][k], self.y[j][k]);
            self.y[i][k] = u * c - w * v * s;
            self.y[j][k] = w.conj() * u * s + v * c;
        }
        for idx in [i, j] {
            let (t1, t2) = row_terms(self.p[idx], self.beta[idx]);
            self.s1 -= t1;
            self.s2 -= t2;
            self.p[idx] = norm_sqr(&self.y[idx]);
            self.beta[idx] = self.prob.form(&self.y[idx], &self.y[idx]);
            let (t1, t2) = row_terms(self.p[idx], self.beta[idx]);
            self.s1 += t1;
            self.s2 += t2;
        }
    }

    /// Best rotation angle for one coordinate: grid then Brent refinement.
    fn propose(&self, i: usize, j: usize, phi: f64) -> (f64, f64) {
        let line = self.line(i, j, phi);
        const GRID: usize = 16;
        let h = PI / GRID as f64;
        let mut best = (0.0, line.eval(0.0));
        for g in 1..GRID {
            let t = g as f64 * h;
            let f = line.eval(t);
            if f < best.1 {
                best = (t, f);
            }
        }
        let (t, f) = brent_min(|t| line.eval(t), best.0 - h, best.0 + h, 1e-12, 60);
        if f < best.1 {
            (t, f)
        } else {
            best
        }
    }
}

struct Line {
    w: C64,
    a_uu: C64,
    a_vv: C64,
    a_uv: C64,
    a_vu: C64,
    g_uv: C64,
    p_u: f64,
    p_v: f64,
    rest1: f64,
    rest2: C64,
    nbar: f64,
    xi: C64,
    eps: f64,
}

impl Line {
    fn eval(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let (c2, s2, cs) = (c * c, s * s, c * s);
        let w = self.w;
        let wb = w.conj();
        let cross = 2.0 * cs * (w * self.g_uv).re;
        let pi = c2 * self.p_u + s2 * self.p_v - cross;
        let pj = s2 * self.p_u + c2 * self.p_v + cross;
        let bi = self.a_uu * c2 + self.a_vv * s2 - (w * self.a_uv + wb * self.a_vu) * cs;
        let bj = self.a_uu * s2 + self.a_vv * c2 + (w * self.a_uv + wb * self.a_vu) * cs;
        let (ti, si) = row_terms(pi, bi);
        let (tj, sj) = row_terms(pj, bj);
        self.nbar - (self.rest1 + ti + tj) + smooth_abs(self.xi - (self.rest2 + si + sj), self.eps)
    }
}

/// Brent's derivative-free minimization on `[a, b]`.
fn brent_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    const CGOLD: f64 = 0.381_966_011_250_105_1;
    let mut x = a + CGOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-14;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

struct RunOutcome {
    value: f64,
    rows: Vec<Vec<C64>>,
    converged: bool,
}

fn local_search(prob: &Problem, y0: Vec<Vec<C64>>, opts: &RoofOptions, rng: &mut ChaCha8Rng) -> RunOutcome {
    let m = y0.len();
    let mut s = Search::new(prob, y0);
    let mut coords = Vec::with_capacity(m * (m - 1));
    for i in 0..m {
        for j in i + 1..m {
            coords.push((i, j, 0.0));
            coords.push((i, j, FRAC_PI_2));
        }
    }
    if coords.is_empty() {
        return RunOutcome {
            value: s.value(),
            rows: s.y,
            converged: true,
        };
    }
    let patience = coords.len().max(50);
    let mut converged = false;

    let step = |s: &mut Search, i: usize, j: usize, phi: f64, current: &mut f64, stalled: &mut usize| {
        let (theta, f) = s.propose(i, j, phi);
        let gain = *current - f;
        if gain > 0.0 {
            s.rotate(i, j, phi, theta);
            *current = s.value();
        }
        if gain < opts.tol {
            *stalled += 1;
        } else {
            *stalled = 0;
        }
    };

    for eps in SMOOTHING {
        s.eps = eps;
        let mut stalled = 0usize;
        let mut current = s.value();
        converged = false;
        'sweeps: for _ in 0..opts.max_sweeps {
            for &(i, j, phi) in &coords {
                step(&mut s, i, j, phi, &mut current, &mut stalled);
                if stalled >= patience {
                    // Random-phase polish before declaring convergence.
                    let before = stalled;
                    for _ in 0..coords.len() {
                        let i = rng.random_range(0..m);
                        let mut j = rng.random_range(0..m - 1);
                        if j >= i {
                            j += 1;
                        }
                        let phi = rng.random_range(0.0..2.0 * PI);
                        step(&mut s, i, j, phi, &mut current, &mut stalled);
                    }
                    if stalled >= before + coords.len() {
                        converged = true;
                        break 'sweeps;
                    }
                }
            }
            s.refresh();
            current = s.value();
        }
    }
    s.refresh();
    RunOutcome {
        value: s.value(),
        rows: s.y,
        converged,
    }
}

/// Multi-start search for the smallest ensemble-averaged nonclassicality.
/// Value, ensemble size, restart, rows and convergence of a local search.
type BestRun = (f64, usize, usize, Vec<Vec<C64>>, bool);

pub fn minimize_nonclassicality(rho: &DensityMatrix, opts: &RoofOptions) -> Result<RoofResult> {
    let basis = rho.basis()?;
    rho.check_truncation()?;
    if opts.restarts == 0 {
        return Err(Error::Config("at least one start is required".into()));
    }
    let support = Support::from_density(rho)?;
    let r = support.rank();
    let w_lower = metrological_power(rho)?;

    if r == 1 {
        let psi = PureState::new_unchecked(basis, support.vectors[0].clone());
        let value = PureMeasure::from_moments(crate::fock::amplitude_moments(psi.amplitudes())).n;
        let ens = EnsembleDecomposition::new(vec![1.0], vec![psi])?;
        return Ok(RoofResult {
            n_upper: value,
            w_lower,
            best_ensemble: ens,
            restarts_used: 1,
            converged: true,
            support_rank: 1,
            best_m: 1,
            best_restart: 0,
            per_m: vec![SizeSensitivity {
                m: 1,
                best: value,
                converged_runs: 1,
                runs: 1,
            }],
        });
    }

    let m_max = opts.m_max.unwrap_or(r + 2);
    if m_max < r {
        return Err(Error::Config(alloc::format!(
            "ensemble size {m_max} is below the support rank {r}"
        )));
    }
    let prob = Problem::new(&support, basis);
    let lam: Vec<f64> = support.probs.iter().map(|p| p.sqrt()).collect();

    let mut best: Option<BestRun> = None;
    let mut per_m = Vec::new();
    let mut runs = 0usize;
    for m in r..=m_max {
        let mut size = SizeSensitivity {
            m,
            best: f64::INFINITY,
            converged_runs: 0,
            runs: 0,
        };
        for restart in 0..opts.restarts {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(((m as u64) << 32) | restart as u64);
            let u = if restart == 0 {
                Isometry::padded_identity(m, r)?
            } else {
                Isometry::random(m, r, &mut rng)?
            };
            let y0: Vec<Vec<C64>> = (0..m)
                .map(|j| (0..r).map(|k| u.matrix()[(j, k)] * lam[k]).collect())
                .collect();
            let out = local_search(&prob, y0, opts, &mut rng);
            runs += 1;
            size.runs += 1;
            if out.converged {
                size.converged_runs += 1;
            }
            size.best = size.best.min(out.value);
            if best.as_ref().is_none_or(|b| out.value < b.0) {
                best = Some((out.value, m, restart, out.rows, out.converged));
            }
        }
        per_m.push(size);
    }
    let (_, best_m, best_restart, rows, converged) = best.expect("at least one run");
    let ens = build_ensemble(&support, &rows, basis.dim())?;
    let obj = ensemble_objective(&ens);
    debug_assert!(obj.n_obj <= obj.v1_obj + 1e-12);
    Ok(RoofResult {
        n_upper: obj.n_obj,
        w_lower,
        best_ensemble: ens,
        restarts_used: runs,
        converged,
        support_rank: r,
        best_m,
        best_restart,
        per_m,
    })
}

/// Quadrature QFI of the flagged state `sum_j p_j |psi_j><psi_j| (x) |j><j|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedQfi {
    /// From the eigendecomposition of the block-diagonal joint state.
    pub embedded: f64,
    /// `sum_j p_j Var_{psi_j}(X_mu)`.
    pub direct: f64,
}

pub fn extended_state_qfi(ens: &EnsembleDecomposition, mu: f64) -> Result<ExtendedQfi> {
    let len = ens.len();
    if len > MAX_FLAGS {
        return Err(Error::EnsembleTooLarge { len, cap: MAX_FLAGS });
    }
    let d = ens.dim();
    let basis = TruncatedBasis::new(d)?;
    let x = quadrature(basis, mu);

    let direct = ens
        .weights()
        .iter()
        .zip(ens.members())
        .map(|(p, psi)| p * vector_variance(psi.amplitudes(), &x.apply(psi.amplitudes())))
        .sum();

    let flags = len.max(2);
    let n = d * flags;
    let mut joint = CMatrix::zeros(n, n);
    for (j, (p, psi)) in ens.weights().iter().zip(ens.members()).enumerate() {
        let c = psi.amplitudes();
        for a in 0..d {
            for b in 0..d {
                joint[(a * flags + j, b * flags + j)] = c[a] * c[b].conj() * *p;
            }
        }
    }
    let rho_e = DensityMatrix::new_unchecked(ModeDims::Two(d, flags), joint);
    let g = crate::fock::HermitianOperator::new_unchecked(x.matrix().kron(&CMatrix::identity(flags)));
    let embedded = qfi_generator(&rho_e, &g)?;
    Ok(ExtendedQfi { embedded, direct })
}
