//! State families, coherent-state superpositions, mixtures, the beam
//! splitter and the pure-loss channel.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)]
use num_traits::Float;

use crate::eigen::tridiagonal_eig;
use crate::fock::{DensityMatrix, ModeDims, PureState, TruncatedBasis};
use crate::linalg::CMatrix;
use crate::tol::{AUTO_TAIL, MAX_SUPERPOSITION, MIN_ODD_CAT_ALPHA, NORM_TOL, SEP_TOL, TAIL_TOL};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(&self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn symbol(&self) -> char {
        match self {
            Parity::Even => '+',
            Parity::Odd => '-',
        }
    }
}

/// Named single-mode pure states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpec {
    Fock(usize),
    Coherent(C64),
    SqueezedVacuum {
        r: f64,
        phi: f64,
    },
    Cat {
        alpha: C64,
        parity: Parity,
    },
    /// `(|0> + |n>) / sqrt 2`.
    FockSuperposition(usize),
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

impl StateSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StateSpec::Fock(_) => Ok(()),
            StateSpec::FockSuperposition(n) => {
                if n == 0 {
                    Err(invalid("fock superposition needs n >= 1"))
                } else {
                    Ok(())
                }
            }
            StateSpec::Coherent(a) => {
                if a.re.is_finite() && a.im.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("coherent amplitude must be finite"))
                }
            }
            StateSpec::SqueezedVacuum { r, phi } => {
                if !(r >= 0.0) || !r.is_finite() {
                    Err(invalid(format!("squeezing r must be finite and >= 0, got {r}")))
                } else if !phi.is_finite() {
                    Err(invalid("squeezing phase must be finite"))
                } else {
                    Ok(())
                }
            }
            StateSpec::Cat { alpha, parity } => {
                if !(alpha.re.is_finite() && alpha.im.is_finite()) {
                    return Err(invalid("cat amplitude must be finite"));
                }
                if parity == Parity::Odd && alpha.norm() < MIN_ODD_CAT_ALPHA {
                    return Err(invalid(format!(
                        "odd cat needs |alpha| >= {MIN_ODD_CAT_ALPHA}, got {}",
                        alpha.norm()
                    )));
                }
                Ok(())
            }
        }
    }

    /// Exact mean photon number of the untruncated state.
    pub fn mean_photon_number(&self) -> f64 {
        match *self {
            StateSpec::Fock(n) => n as f64,
            StateSpec::FockSuperposition(n) => n as f64 / 2.0,
            StateSpec::Coherent(a) => a.norm_sqr(),
            StateSpec::SqueezedVacuum { r, .. } => r.sinh().powi(2),
            StateSpec::Cat { alpha, parity } => {
                let (np, nm) = cat_norms(alpha.norm_sqr());
                match parity {
                    Parity::Even => alpha.norm_sqr() * nm / np,
                    Parity::Odd => alpha.norm_sqr() * np / nm,
                }
            }
        }
    }
}

/// `(N_+, N_-)` with `N_pm = 2 pm 2 exp(-2|alpha|^2)`.
pub(crate) fn cat_norms(abs2: f64) -> (f64, f64) {
    let e = (-2.0 * abs2).exp();
    (2.0 + 2.0 * e, -2.0 * (-2.0 * abs2).exp_m1())
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            StateSpec::Fock(n) => write!(f, "fock:{n}"),
            StateSpec::FockSuperposition(n) => write!(f, "fsup:{n}"),
            StateSpec::Coherent(a) => write!(f, "coherent:{}", format_complex(a)),
            StateSpec::SqueezedVacuum { r, phi } => write!(f, "sqvac:{r}:{phi}"),
            StateSpec::Cat { alpha, parity } => {
                write!(f, "cat:{}:{}", parity.symbol(), format_complex(alpha))
            }
        }
    }
}

/// Formats a complex number in the grammar accepted by [`parse_complex`].
pub fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.re == 0.0 {
        format!("{}i", z.im)
    } else if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

fn parse_err(token: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        token: token.to_string(),
        reason: reason.into(),
    }
}

fn parse_f64(token: &str) -> Result<f64> {
    let v: f64 = token
        .trim()
        .parse()
        .map_err(|_| parse_err(token, "expected a real number"))?;
    if !v.is_finite() {
        return Err(parse_err(token, "value must be finite"));
    }
    Ok(v)
}

/// Parses `a`, `a+bi`, `a-bi`, `bi`, `i`, `-i` with optional exponents.
pub fn parse_complex(token: &str) -> Result<C64> {
    let s = token.trim();
    if s.is_empty() {
        return Err(parse_err(token, "empty complex number"));
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return Ok(C64::new(
            parse_f64(s).map_err(|_| parse_err(token, "expected a complex number"))?,
            0.0,
        ));
    };
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        let ch = bytes[k];
        if (ch == b'+' || ch == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let imag = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => parse_f64(t).map_err(|_| parse_err(token, "malformed imaginary part")),
        }
    };
    match split {
        Some(k) => {
            let re = parse_f64(&body[..k]).map_err(|_| parse_err(token, "malformed real part"))?;
            Ok(C64::new(re, imag(&body[k..])?))
        }
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let need = |n: usize| -> Result<()> {
            if parts.len() != n {
                Err(parse_err(s, format!("expected {} fields separated by ':'", n)))
            } else {
                Ok(())
            }
        };
        let parse_usize = |t: &str| -> Result<usize> {
            t.trim()
                .parse()
                .map_err(|_| parse_err(t, "expected a non-negative integer"))
        };
        let spec = match parts[0].trim().to_ascii_lowercase().as_str() {
            "fock" => {
                need(2)?;
                StateSpec::Fock(parse_usize(parts[1])?)
            }
            "fsup" => {
                need(2)?;
                StateSpec::FockSuperposition(parse_usize(parts[1])?)
            }
            "coherent" | "coh" => {
                need(2)?;
                StateSpec::Coherent(parse_complex(parts[1])?)
            }
            "sqvac" | "squeezed" => {
                if parts.len() != 2 && parts.len() != 3 {
                    return Err(parse_err(s, "expected sqvac:<r>[:<phi>]"));
                }
                let phi = if parts.len() == 3 { parse_f64(parts[2])? } else { 0.0 };
                StateSpec::SqueezedVacuum {
                    r: parse_f64(parts[1])?,
                    phi,
                }
            }
            "cat" => {
                need(3)?;
                let parity = match parts[1].trim() {
                    "+" | "even" => Parity::Even,
                    "-" | "odd" => Parity::Odd,
                    other => return Err(parse_err(other, "cat parity must be '+' or '-'")),
                };
                StateSpec::Cat {
                    alpha: parse_complex(parts[2])?,
                    parity,
                }
            }
            other => return Err(parse_err(other, "unknown state family")),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Poisson tail `sum_{n >= k} e^{-lambda} lambda^n / n!`.
fn poisson_tail(lambda: f64, k: usize) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let mut log_p = -lambda;
    for n in 1..=k {
        log_p += lambda.ln() - (n as f64).ln();
    }
    let mut p = log_p.exp();
    let mut sum = 0.0;
    let mut n = k;
    loop {
        sum += p;
        n += 1;
        p *= lambda / n as f64;
        if n as f64 > lambda && p < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Squeezed-vacuum populations `|c_{2n}|^2` beyond index `k`, by recursion.
fn squeezed_tail(r: f64, k: usize) -> f64 {
    let t2 = r.tanh().powi(2);
    let mut p = 1.0 / r.cosh();
    let mut n = 0usize;
    let mut head = 0.0;
    while 2 * n < k {
        head += p;
        n += 1;
        p *= t2 * (2 * n - 1) as f64 / (2 * n) as f64;
    }
    (1.0 - head).max(0.0).max(p)
}

/// Smallest truncation satisfying the adequacy rule for `spec`.
pub fn suggest_dim(spec: &StateSpec) -> usize {
    match *spec {
        StateSpec::Fock(n) | StateSpec::FockSuperposition(n) => n + 3,
        StateSpec::Coherent(a) | StateSpec::Cat { alpha: a, .. } => coherent_dim(a.norm()),
        StateSpec::SqueezedVacuum { r, .. } => {
            let mut d = ((10.0 * r.sinh().powi(2) + 20.0).ceil() as usize).max(2);
            while squeezed_tail(r, d - 1) > AUTO_TAIL {
                d += 2;
            }
            d
        }
    }
}

pub(crate) fn coherent_dim(abs: f64) -> usize {
    let lambda = abs * abs;
    let mut d = ((lambda + 6.0 * abs + 10.0).ceil() as usize).max(2);
    while poisson_tail(lambda, d - 1) > AUTO_TAIL {
        d += 1;
    }
    d
}

/// Coherent-state Fock amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)`.
pub(crate) fn coherent_amplitudes(alpha: C64, dim: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(dim);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..dim {
        out.push(c);
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    out
}

/// Builds a state whose exact amplitudes have unit norm, checking both the
/// mass lost to truncation and the top-level population.
fn finish_truncated(basis: TruncatedBasis, mut amps: Vec<C64>, suggested: usize) -> Result<PureState> {
    let kept: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    let missing = (1.0 - kept).max(0.0);
    let top = amps.last().map_or(0.0, |z| z.norm_sqr());
    if missing > TAIL_TOL || top > TAIL_TOL {
        return Err(Error::TruncationInadequate {
            dim: basis.dim(),
            tail: missing.max(top),
            suggested: suggested.max(basis.dim() + 1),
        });
    }
    let norm = kept.sqrt();
    for z in amps.iter_mut() {
        *z /= norm;
    }
    PureState::new(basis, amps)
}

pub fn prepare_pure(spec: &StateSpec, basis: TruncatedBasis) -> Result<PureState> {
    spec.validate()?;
    let d = basis.dim();
    let zero = C64::new(0.0, 0.0);
    let suggested = suggest_dim(spec);
    match *spec {
        StateSpec::Fock(n) => {
            if n + 1 >= d {
                return Err(Error::TruncationInadequate {
                    dim: d,
                    tail: 1.0,
                    suggested,
                });
            }
            PureState::fock(basis, n)
        }
        StateSpec::FockSuperposition(n) => {
            if n + 1 >= d {
                return Err(Error::TruncationInadequate {
                    dim: d,
                    tail: 0.5,
                    suggested,
                });
            }
            let mut amps = vec![zero; d];
            amps[0] = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
            amps[n] = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
            PureState::new(basis, amps)
        }
        StateSpec::Coherent(alpha) => finish_truncated(basis, coherent_amplitudes(alpha, d), suggested),
        StateSpec::Cat { alpha, parity } => {
            let (np, nm) = cat_norms(alpha.norm_sqr());
            let norm = match parity {
                Parity::Even => np,
                Parity::Odd => nm,
            };
            let scale = 2.0 / norm.sqrt();
            let keep = match parity {
                Parity::Even => 0,
                Parity::Odd => 1,
            };
            let amps = coherent_amplitudes(alpha, d)
                .into_iter()
                .enumerate()
                .map(|(n, c)| if n % 2 == keep { c * scale } else { zero })
                .collect();
            finish_truncated(basis, amps, suggested)
        }
        StateSpec::SqueezedVacuum { r, phi } => {
            let eta = C64::from_polar(r.tanh(), phi);
            let mut amps = vec![zero; d];
            let mut c = C64::new(1.0 / r.cosh().sqrt(), 0.0);
            let mut n = 0usize;
            while 2 * n < d {
                amps[2 * n] = c;
                n += 1;
                c = c * eta * (((2 * n - 1) as f64) / ((2 * n) as f64)).sqrt();
            }
            finish_truncated(basis, amps, suggested)
        }
    }
}

/// `sum_j c_j |alpha_j>`, normalized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentSuperposition {
    coefficients: Vec<C64>,
    centers: Vec<C64>,
}

impl CoherentSuperposition {
    /// Rescales the coefficients so the state has unit norm.
    pub fn new(coefficients: Vec<C64>, centers: Vec<C64>) -> Result<Self> {
        let l = coefficients.len();
        if l != centers.len() {
            return Err(Error::DimensionMismatch {
                expected: l,
                found: centers.len(),
            });
        }
        if l == 0 || l > MAX_SUPERPOSITION {
            return Err(invalid(format!(
                "superposition size must be in 1..={MAX_SUPERPOSITION}, got {l}"
            )));
        }
        let finite = |z: &C64| z.re.is_finite() && z.im.is_finite();
        if !coefficients.iter().all(finite) || !centers.iter().all(finite) {
            return Err(invalid("superposition entries must be finite"));
        }
        for j in 0..l {
            for k in 0..j {
                let sep = (centers[j] - centers[k]).norm();
                if sep < SEP_TOL {
                    return Err(Error::DegenerateSuperposition(format!(
                        "centres {j} and {k} are {sep:.3e} apart (minimum {SEP_TOL})"
                    )));
                }
            }
        }
        let mut sup = Self { coefficients, centers };
        let n2 = sup.norm_sqr();
        if !(n2 > 1e-14) {
            return Err(Error::DegenerateSuperposition(format!(
                "Gram form vanishes (norm^2 = {n2:.3e})"
            )));
        }
        let s = 1.0 / n2.sqrt();
        for c in sup.coefficients.iter_mut() {
            *c *= s;
        }
        Ok(sup)
    }

    /// `sum_{jk} c_j^* c_k <alpha_j|alpha_k>`.
    pub fn norm_sqr(&self) -> f64 {
        let l = self.len();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..l {
            for k in 0..l {
                acc += self.coefficients[j].conj() * self.coefficients[k] * self.overlap(k, j);
            }
        }
        acc.re
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn centers(&self) -> &[C64] {
        &self.centers
    }

    /// `f_jk = <alpha_k|alpha_j>`.
    pub fn overlap(&self, j: usize, k: usize) -> C64 {
        let (a, b) = (self.centers[j], self.centers[k]);
        (C64::new(-(a.norm_sqr() + b.norm_sqr()) / 2.0, 0.0) + b.conj() * a).exp()
    }

    /// `d_jk = alpha_j - alpha_k`.
    pub fn distance(&self, j: usize, k: usize) -> C64 {
        self.centers[j] - self.centers[k]
    }

    pub fn suggest_dim(&self) -> usize {
        let amax = self.centers.iter().map(|a| a.norm()).fold(0.0, f64::max);
        coherent_dim(amax)
    }
}

pub fn prepare_superposition(sup: &CoherentSuperposition, basis: TruncatedBasis) -> Result<PureState> {
    let d = basis.dim();
    let mut amps = vec![C64::new(0.0, 0.0); d];
    for (c, a) in sup.coefficients.iter().zip(&sup.centers) {
        for (slot, z) in amps.iter_mut().zip(coherent_amplitudes(*a, d)) {
            *slot += c * z;
        }
    }
    finish_truncated(basis, amps, sup.suggest_dim())
}

impl From<&PureState> for DensityMatrix {
    fn from(psi: &PureState) -> Self {
        psi.to_density()
    }
}

/// Convex combination of states with matching dimensions.
pub fn mix(components: &[(f64, DensityMatrix)]) -> Result<DensityMatrix> {
    let Some((_, first)) = components.first() else {
        return Err(Error::InvalidWeights("no components".into()));
    };
    let dims = first.dims();
    let mut total = 0.0;
    for (w, rho) in components {
        if !(*w > 0.0) || !w.is_finite() {
            return Err(Error::InvalidWeights(format!("weight {w} is not positive")));
        }
        if rho.dims() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims.total(),
                found: rho.dim(),
            });
        }
        total += w;
    }
    if (total - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {total}")));
    }
    let n = dims.total();
    let mut acc = CMatrix::zeros(n, n);
    for (w, rho) in components {
        acc = &acc + &rho.matrix().scale_real(*w);
    }
    Ok(DensityMatrix::new_unchecked(dims, acc))
}

/// Mixture of pure states.
pub fn mix_pure(components: &[(f64, PureState)]) -> Result<DensityMatrix> {
    let dens: Vec<(f64, DensityMatrix)> = components.iter().map(|(w, p)| (*w, p.to_density())).collect();
    mix(&dens)
}

/// `(1 - p)|0><0| + p|1><1|`.
pub fn rho_p(p: f64, basis: TruncatedBasis) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("p must lie in [0, 1], got {p}")));
    }
    let mut pops = vec![0.0; basis.dim()];
    pops[0] = 1.0 - p;
    pops[1] = p;
    let rho = DensityMatrix::new_unchecked(ModeDims::One(basis.dim()), CMatrix::diagonal(&pops));
    rho.check_truncation()?;
    Ok(rho)
}

/// One total-photon-number block of the beam-splitter generator
/// `K = a^dag b + b^dag a` on `|k, N-k>`, `k = k_lo..=k_hi`.
#[derive(Debug, Clone)]
struct Block {
    k_lo: usize,
    total: usize,
    values: Vec<f64>,
    /// Eigenvectors column-major.
    vectors: Vec<f64>,
}

impl Block {
    fn size(&self) -> usize {
        self.values.len()
    }

    /// Row-major `exp(-i theta K)` restricted to the block.
    fn exponential(&self, theta: f64) -> Vec<C64> {
        let s = self.size();
        let phases: Vec<C64> = self.values.iter().map(|&l| C64::from_polar(1.0, -theta * l)).collect();
        let mut u = vec![C64::new(0.0, 0.0); s * s];
        for (c, ph) in phases.iter().enumerate() {
            let z = &self.vectors[c * s..(c + 1) * s];
            for i in 0..s {
                let zi = z[i] * ph;
                for j in 0..s {
                    u[i * s + j] += zi * z[j];
                }
            }
        }
        u
    }
}

/// Two-mode beam splitter `exp(-i arcsin(sqrt tau) (a^dag b + b^dag a))`
/// with cached per-block eigendecompositions.
#[derive(Debug, Clone)]
pub struct BeamSplitter {
    da: usize,
    db: usize,
    blocks: Vec<Block>,
}

impl BeamSplitter {
    pub fn new(da: usize, db: usize) -> Result<Self> {
        if da < 2 || db < 2 {
            return Err(Error::InvalidBasis(da.min(db)));
        }
        let mut blocks = Vec::with_capacity(da + db - 1);
        for total in 0..(da + db - 1) {
            let k_lo = total.saturating_sub(db - 1);
            let k_hi = total.min(da - 1);
            let diag = vec![0.0; k_hi - k_lo + 1];
            let off: Vec<f64> = (k_lo..k_hi).map(|k| (((k + 1) * (total - k)) as f64).sqrt()).collect();
            let (values, vectors) = tridiagonal_eig(diag, &off)?;
            blocks.push(Block {
                k_lo,
                total,
                values,
                vectors,
            });
        }
        Ok(Self { da, db, blocks })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.da, self.db)
    }

    /// Total photon numbers whose blocks are untouched by truncation.
    pub fn complete_blocks(&self) -> usize {
        self.da.min(self.db)
    }

    fn theta(tau: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(invalid(format!("transmission must lie in [0, 1], got {tau}")));
        }
        Ok(tau.sqrt().asin())
    }

    pub fn unitary(&self, tau: f64) -> Result<CMatrix> {
        let theta = Self::theta(tau)?;
        let n = self.da * self.db;
        let mut u = CMatrix::zeros(n, n);
        for b in &self.blocks {
            let ub = b.exponential(theta);
            let s = b.size();
            for i in 0..s {
                let ri = self.index(b, i);
                for j in 0..s {
                    u[(ri, self.index(b, j))] = ub[i * s + j];
                }
            }
        }
        Ok(u)
    }

    /// Applies the unitary to each vector in `vs`.
    pub fn apply_many(&self, tau: f64, vs: &[Vec<C64>]) -> Result<Vec<Vec<C64>>> {
        let theta = Self::theta(tau)?;
        let n = self.da * self.db;
        let mut out: Vec<Vec<C64>> = vs.iter().map(|_| vec![C64::new(0.0, 0.0); n]).collect();
        for v in vs {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
        }
        for b in &self.blocks {
            let ub = b.exponential(theta);
            let s = b.size();
            let idx: Vec<usize> = (0..s).map(|i| self.index(b, i)).collect();
            for (v, o) in vs.iter().zip(out.iter_mut()) {
                for i in 0..s {
                    let mut acc = C64::new(0.0, 0.0);
                    for j in 0..s {
                        acc += ub[i * s + j] * v[idx[j]];
                    }
                    o[idx[i]] = acc;
                }
            }
        }
        Ok(out)
    }

    fn index(&self, b: &Block, i: usize) -> usize {
        let k = b.k_lo + i;
        k * self.db + (b.total - k)
    }

    fn block(&self, total: usize) -> &Block {
        &self.blocks[total]
    }
}

pub fn beamsplitter_unitary(tau: f64, dims: (usize, usize)) -> Result<CMatrix> {
    BeamSplitter::new(dims.0, dims.1)?.unitary(tau)
}

/// Pure loss with transmissivity `eta`: a beam splitter of transmission
/// `1 - eta` onto a vacuum ancilla, followed by tracing out the ancilla.
pub fn loss_channel(rho: &DensityMatrix, eta: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid(format!("transmissivity must lie in [0, 1], got {eta}")));
    }
    let d = match rho.dims() {
        ModeDims::One(d) => d,
        ModeDims::Two(..) => return Err(Error::Config("loss acts on single-mode states".into())),
    };
    let bs = BeamSplitter::new(d, d)?;
    let theta = BeamSplitter::theta(1.0 - eta)?;
    // v[n][k] = <n - k, k| U |n, 0>.
    let mut v: Vec<Vec<C64>> = Vec::with_capacity(d);
    for n in 0..d {
        let b = bs.block(n);
        debug_assert_eq!(b.k_lo, 0);
        let ub = b.exponential(theta);
        let s = b.size();
        // Block index i corresponds to mode-A count k_lo + i = i.
        v.push((0..=n).map(|k| ub[(n - k) * s + n]).collect());
    }
    let m = rho.matrix();
    let out = CMatrix::from_fn(d, d, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..d - i.max(j) {
            acc += v[i + k][k] * m[(i + k, j + k)] * v[j + k][k].conj();
        }
        acc
    });
    Ok(DensityMatrix::new_unchecked(ModeDims::One(d), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{number_operator, partial_trace, Mode};
    use approx::assert_abs_diff_eq;

    fn b(d: usize) -> TruncatedBasis {
        TruncatedBasis::new(d).unwrap()
    }

    #[test]
    fn parses_grammar() {
        assert_eq!("fock:3".parse::<StateSpec>().unwrap(), StateSpec::Fock(3));
        assert_eq!(
            "coherent:1+0.5i".parse::<StateSpec>().unwrap(),
            StateSpec::Coherent(C64::new(1.0, 0.5))
        );
        assert_eq!(
            "sqvac:0.5:0".parse::<StateSpec>().unwrap(),
            StateSpec::SqueezedVacuum { r: 0.5, phi: 0.0 }
        );
        assert_eq!(
            "cat:+:1.0".parse::<StateSpec>().unwrap(),
            StateSpec::Cat {
                alpha: C64::new(1.0, 0.0),
                parity: Parity::Even
            }
        );
        assert_eq!("fsup:3".parse::<StateSpec>().unwrap(), StateSpec::FockSuperposition(3));
        assert!("cat:-:0".parse::<StateSpec>().is_err());
        assert!("sqvac:-1".parse::<StateSpec>().is_err());
        assert!(matches!("wigner:1".parse::<StateSpec>(), Err(Error::Parse { .. })));
    }

    #[test]
    fn complex_grammar() {
        let cases = [
            ("2", C64::new(2.0, 0.0)),
            ("-1.5", C64::new(-1.5, 0.0)),
            ("0.5i", C64::new(0.0, 0.5)),
            ("i", C64::new(0.0, 1.0)),
            ("-i", C64::new(0.0, -1.0)),
            ("1-i", C64::new(1.0, -1.0)),
            ("1e-3+2E+1i", C64::new(1e-3, 20.0)),
            ("-2.5e-1-3i", C64::new(-0.25, -3.0)),
        ];
        for (s, want) in cases {
            assert_eq!(parse_complex(s).unwrap(), want, "{s}");
        }
        for bad in ["", "1+", "abc", "1+xi", "nan"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["fock:4", "fsup:3", "coherent:1-0.5i", "sqvac:0.5:0.25", "cat:-:2"] {
            let spec: StateSpec = s.parse().unwrap();
            assert_eq!(spec.to_string().parse::<StateSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn coherent_amplitude_c2() {
        let psi = prepare_pure(&StateSpec::Coherent(C64::new(1.0, 0.0)), b(30)).unwrap();
        assert_abs_diff_eq!(psi.amplitudes()[2].re, 0.4288819424803534, epsilon = 1e-14);
    }

    #[test]
    fn squeezed_recursion_c2() {
        let spec = StateSpec::SqueezedVacuum { r: 0.5, phi: 0.0 };
        let psi = prepare_pure(&spec, b(40)).unwrap();
        assert_eq!(psi.amplitudes()[1], C64::new(0.0, 0.0));
        assert_abs_diff_eq!(psi.amplitudes()[2].re, 0.30771917645837044, epsilon = 1e-14);
        let m = psi.moments().unwrap();
        assert_abs_diff_eq!(m.nbar, 0.5f64.sinh().powi(2), epsilon = 1e-12);
        assert_abs_diff_eq!(m.xi.re, 0.5f64.sinh() * 0.5f64.cosh(), epsilon = 1e-12);
        assert_abs_diff_eq!(m.nbar, 0.2715403174076219, epsilon = 1e-8);
        assert_abs_diff_eq!(m.xi.re, 0.5876005968219007, epsilon = 1e-8);
    }

    #[test]
    fn cat_from_superposition_matches() {
        let spec = StateSpec::Cat {
            alpha: C64::new(1.0, 0.0),
            parity: Parity::Even,
        };
        let direct = prepare_pure(&spec, b(30)).unwrap();
        let sup = CoherentSuperposition::new(
            vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
            vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)],
        )
        .unwrap();
        let via = prepare_superposition(&sup, b(30)).unwrap();
        for (x, y) in direct.amplitudes().iter().zip(via.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
        let m = direct.moments().unwrap();
        assert_abs_diff_eq!(m.nbar, 0.7615941559557649, epsilon = 1e-12);
        assert_abs_diff_eq!(m.xi.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.nbar, spec.mean_photon_number(), epsilon = 1e-12);
    }

    #[test]
    fn single_component_superposition_is_coherent() {
        let sup = CoherentSuperposition::new(vec![C64::new(3.0, 0.0)], vec![C64::new(2.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(sup.coefficients()[0].re, 1.0, epsilon = 1e-15);
        let psi = prepare_superposition(&sup, b(sup.suggest_dim())).unwrap();
        let m = psi.moments().unwrap();
        assert_abs_diff_eq!(m.alpha.re, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn degenerate_superposition_rejected() {
        let r = CoherentSuperposition::new(
            vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)],
            vec![C64::new(1.0, 0.0), C64::new(1.0 + 1e-9, 0.0)],
        );
        assert!(matches!(r, Err(Error::DegenerateSuperposition(_))));
    }

    #[test]
    fn truncation_errors_suggest_dims() {
        let spec = StateSpec::Coherent(C64::new(3.0, 0.0));
        match prepare_pure(&spec, b(10)) {
            Err(Error::TruncationInadequate { suggested, .. }) => {
                assert_eq!(suggested, suggest_dim(&spec));
                assert!(prepare_pure(&spec, b(suggested)).is_ok());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn suggested_dims_are_adequate() {
        let specs = [
            StateSpec::Fock(5),
            StateSpec::FockSuperposition(4),
            StateSpec::Coherent(C64::new(0.0, 4.0)),
            StateSpec::SqueezedVacuum { r: 1.0, phi: 1.0 },
            StateSpec::SqueezedVacuum { r: 1.5, phi: 0.0 },
            StateSpec::Cat {
                alpha: C64::new(3.0, 0.0),
                parity: Parity::Odd,
            },
        ];
        for s in specs {
            let psi = prepare_pure(&s, b(suggest_dim(&s))).unwrap();
            assert!(psi.tail_mass() <= 1e-12, "{s}");
        }
    }

    #[test]
    fn small_odd_cat_is_normalized() {
        let spec = StateSpec::Cat {
            alpha: C64::new(2e-3, 0.0),
            parity: Parity::Odd,
        };
        let psi = prepare_pure(&spec, b(10)).unwrap();
        assert_abs_diff_eq!(psi.amplitudes()[1].norm(), 1.0, epsilon = 1e-5);
    }

    #[test]
    fn rho_p_diagonal() {
        let r = rho_p(0.75, b(4)).unwrap();
        assert_eq!(r.populations(), vec![0.25, 0.75, 0.0, 0.0]);
        assert!(rho_p(1.2, b(4)).is_err());
    }

    #[test]
    fn mix_validates_weights() {
        let a = PureState::fock(b(3), 0).unwrap();
        let one = mix_pure(&[(1.0, a.clone())]).unwrap();
        assert_abs_diff_eq!(one.purity(), 1.0, epsilon = 1e-15);
        assert!(matches!(
            mix_pure(&[(0.5, a.clone()), (0.4, a.clone())]),
            Err(Error::InvalidWeights(_))
        ));
        assert!(matches!(
            mix_pure(&[(1.5, a.clone()), (-0.5, a)]),
            Err(Error::InvalidWeights(_))
        ));
    }

    #[test]
    fn beamsplitter_identity_and_unitarity() {
        let u0 = beamsplitter_unitary(0.0, (5, 4)).unwrap();
        assert!(u0.max_abs_diff(&CMatrix::identity(20)) < 1e-14);
        let u = beamsplitter_unitary(0.3, (12, 12)).unwrap();
        let err = (&u.adjoint().matmul(&u) - &CMatrix::identity(144)).frobenius_norm();
        assert!(err < 1e-10);
        let na = number_operator(b(12)).matrix().kron(&CMatrix::identity(12));
        let nb = CMatrix::identity(12).kron(number_operator(b(12)).matrix());
        let ntot = &na + &nb;
        let comm = &u.matmul(&ntot) - &ntot.matmul(&u);
        assert!(comm.frobenius_norm() < 1e-10);
    }

    #[test]
    fn balanced_splitter_on_single_photon() {
        let u = beamsplitter_unitary(0.5, (3, 3)).unwrap();
        // |1,0> -> (|1,0> - i|0,1>) / sqrt 2
        let col = u.column(3);
        let s = core::f64::consts::FRAC_1_SQRT_2;
        assert!((col[3] - C64::new(s, 0.0)).norm() < 1e-14);
        assert!((col[1] - C64::new(0.0, -s)).norm() < 1e-14);
        assert!(beamsplitter_unitary(1.5, (3, 3)).is_err());
    }

    #[test]
    fn apply_matches_dense_unitary() {
        let bs = BeamSplitter::new(4, 6).unwrap();
        let u = bs.unitary(0.37).unwrap();
        let v: Vec<C64> = (0..24)
            .map(|k| C64::new((k as f64).sin(), (k as f64 * 0.3).cos()))
            .collect();
        let got = bs.apply_many(0.37, core::slice::from_ref(&v)).unwrap();
        let want = u.mat_vec(&v);
        for (x, y) in got[0].iter().zip(&want) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    fn kraus_oracle(rho: &DensityMatrix, eta: f64) -> CMatrix {
        let d = rho.dim();
        let mut out = CMatrix::zeros(d, d);
        let binom = |n: usize, k: usize| -> f64 { (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64) };
        for k in 0..d {
            let kr = CMatrix::from_fn(d, d, |i, n| {
                if n >= k && i == n - k {
                    C64::new(
                        binom(n, k).sqrt() * eta.powf((n - k) as f64 / 2.0) * (1.0 - eta).powf(k as f64 / 2.0),
                        0.0,
                    )
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            out = &out + &kr.matmul(rho.matrix()).matmul(&kr.adjoint());
        }
        out
    }

    #[test]
    fn loss_matches_kraus_form() {
        let spec = StateSpec::Cat {
            alpha: C64::new(1.2, 0.4),
            parity: Parity::Even,
        };
        let rho = prepare_pure(&spec, b(30)).unwrap().to_density();
        for eta in [0.0, 0.3, 0.9, 1.0] {
            let out = loss_channel(&rho, eta).unwrap();
            assert!(out.matrix().max_abs_diff(&kraus_oracle(&rho, eta)) < 1e-12);
            assert_abs_diff_eq!(out.trace(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn loss_matches_dense_construction() {
        let rho = prepare_pure(&StateSpec::Coherent(C64::new(0.5, -0.5)), b(14))
            .unwrap()
            .to_density();
        let mut vac = vec![C64::new(0.0, 0.0); 14];
        vac[0] = C64::new(1.0, 0.0);
        let ancilla = PureState::new(b(14), vac).unwrap().to_density();
        let joint = rho.tensor(&ancilla).unwrap();
        let u = beamsplitter_unitary(1.0 - 0.6, (14, 14)).unwrap();
        let evolved = u.matmul(joint.matrix()).matmul(&u.adjoint());
        let evolved = DensityMatrix::new_unchecked(joint.dims(), evolved);
        let reduced = partial_trace(&evolved, Mode::A).unwrap();
        let fast = loss_channel(&rho, 0.6).unwrap();
        assert!(reduced.matrix().max_abs_diff(fast.matrix()) < 1e-12);
    }

    #[test]
    fn loss_keeps_coherent_states_coherent() {
        let alpha = C64::new(1.0, 0.5);
        let d = 40;
        let rho = prepare_pure(&StateSpec::Coherent(alpha), b(d)).unwrap().to_density();
        let eta: f64 = 0.64;
        let out = loss_channel(&rho, eta).unwrap();
        let want = prepare_pure(&StateSpec::Coherent(alpha * eta.sqrt()), b(d))
            .unwrap()
            .to_density();
        assert!(out.matrix().max_abs_diff(want.matrix()) < 1e-8);
        assert_abs_diff_eq!(out.moments().unwrap().nbar, eta * 1.25, epsilon = 1e-8);
    }

    #[test]
    fn lossy_cat_is_mixed() {
        let spec = StateSpec::Cat {
            alpha: C64::new(2.0, 0.0),
            parity: Parity::Even,
        };
        let rho = prepare_pure(&spec, b(suggest_dim(&spec))).unwrap().to_density();
        let out = loss_channel(&rho, 0.9).unwrap();
        assert!(out.purity() < 1.0 - 1e-4);
        assert!(loss_channel(&rho, 1.0).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-10);
    }
}
