//! Mach-Zehnder interferometer fed with a signal state in mode A and a
//! coherent reference `|alpha_r>` in mode B.
//!
//! Two routes to the phase QFI are provided. The balanced route folds the
//! first 50/50 beam splitter into the generator `G = (a b^dag - a^dag b)/(2i)`
//! and works directly on `rho (x) |alpha_r><alpha_r|`. The general route
//! applies the beam splitter of transmission `tau` to the joint support
//! vectors and takes the QFI of `J_z = (n_a - n_b)/2`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::fock::{annihilation, creation, number_operator, DensityMatrix, HermitianOperator, TruncatedBasis};
use crate::linalg::CMatrix;
use crate::qfi::{max_quadrature_qfi, qfi_from_support, wrap_pi, Support};
use crate::states::{coherent_amplitudes, coherent_dim, prepare_pure, BeamSplitter, StateSpec};
use crate::tol::{AUTO_TAIL, TAIL_TOL};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MziConfig {
    /// Reference amplitude `|alpha_r| e^{-i phi}`.
    pub alpha_r: C64,
    /// Transmission of the first beam splitter.
    pub tau: f64,
    /// Number of repetitions `M`.
    pub reps: u64,
    /// Per-mode truncation; `None` picks adequate dimensions automatically.
    pub dims: Option<(usize, usize)>,
}

impl MziConfig {
    pub fn balanced(alpha_r: C64) -> Self {
        Self {
            alpha_r,
            tau: 0.5,
            reps: 1,
            dims: None,
        }
    }

    pub fn is_balanced(&self) -> bool {
        (self.tau - 0.5).abs() <= 1e-12
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionBounds {
    /// `1 / (M F)`.
    pub crb: f64,
    /// Phase variance the lower bound was evaluated at.
    pub delta2: f64,
    pub n_lower: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MziReport {
    pub f_exact: f64,
    /// Only defined for a balanced interferometer.
    pub f_predicted: Option<f64>,
    /// `nbar + |alpha_r|^2`.
    pub n_total_photons: f64,
    pub witness: f64,
    pub crb: f64,
    pub n_lower_bound: f64,
    /// Optimal quadrature angle of the signal.
    pub mu_star: f64,
    pub alpha_r: C64,
    pub tau: f64,
    /// Per-mode dimensions used for the exact QFI.
    pub dims: (usize, usize),
}

/// `J_z = (n_a - n_b)/2` and `G = (a b^dag - a^dag b)/(2i)` on `d_a x d_b`.
pub fn mzi_generators(dims: (usize, usize)) -> Result<(HermitianOperator, HermitianOperator)> {
    let ba = TruncatedBasis::new(dims.0)?;
    let bb = TruncatedBasis::new(dims.1)?;
    let ia = CMatrix::identity(dims.0);
    let ib = CMatrix::identity(dims.1);
    let na = number_operator(ba).matrix().kron(&ib);
    let nb = ia.kron(number_operator(bb).matrix());
    let jz = (&na - &nb).scale_real(0.5);
    let ab_dag = annihilation(ba).kron(&creation(bb));
    let a_dag_b = creation(ba).kron(&annihilation(bb));
    let g = (&ab_dag - &a_dag_b).scale(C64::new(0.0, -0.5));
    Ok((HermitianOperator::new(jz)?, HermitianOperator::new(g)?))
}

/// Applies `G` to a joint vector indexed `n_a * d_b + n_b`.
fn apply_g(v: &[C64], da: usize, db: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); da * db];
    // (a b^dag - a^dag b) / (2i) = -i/2 (a b^dag - a^dag b)
    let h = C64::new(0.0, -0.5);
    for na in 0..da {
        for nb in 0..db {
            let x = v[na * db + nb];
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            // a b^dag |na, nb> = sqrt(na (nb+1)) |na-1, nb+1>
            if na >= 1 && nb + 1 < db {
                out[(na - 1) * db + nb + 1] += h * x * ((na * (nb + 1)) as f64).sqrt();
            }
            // a^dag b |na, nb> = sqrt((na+1) nb) |na+1, nb-1>
            if nb >= 1 && na + 1 < da {
                out[(na + 1) * db + nb - 1] -= h * x * (((na + 1) * nb) as f64).sqrt();
            }
        }
    }
    out
}

fn apply_jz(v: &[C64], d: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); d * d];
    for na in 0..d {
        for nb in 0..d {
            out[na * d + nb] = v[na * d + nb] * (0.5 * (na as f64 - nb as f64));
        }
    }
    out
}

fn check_reference(alpha_r: C64) -> Result<()> {
    if alpha_r.norm() == 0.0 {
        return Err(Error::ZeroReference);
    }
    if !(alpha_r.re.is_finite() && alpha_r.im.is_finite()) {
        return Err(Error::InvalidParameter("reference amplitude must be finite".into()));
    }
    Ok(())
}

/// Signal support padded to `da`, tensored with the reference in `db`.
fn joint_support(signal: &Support, d_signal: usize, alpha_r: C64, da: usize, db: usize) -> Result<Support> {
    if da < d_signal {
        return Err(Error::DimensionMismatch {
            expected: d_signal,
            found: da,
        });
    }
    let reference = prepare_pure(&StateSpec::Coherent(alpha_r), TruncatedBasis::new(db)?)?;
    let r = reference.amplitudes();
    let vectors = signal
        .vectors
        .iter()
        .map(|phi| {
            let mut v = vec![C64::new(0.0, 0.0); da * db];
            for (na, &c) in phi.iter().enumerate() {
                for (nb, &z) in r.iter().enumerate() {
                    v[na * db + nb] = c * z;
                }
            }
            v
        })
        .collect();
    Ok(Support {
        probs: signal.probs.clone(),
        vectors,
    })
}

fn signal_support(rho: &DensityMatrix) -> Result<Support> {
    rho.basis()?;
    rho.check_truncation()?;
    Support::from_density(rho)
}

/// Balanced-interferometer QFI via the folded generator `G`.
pub fn mzi_qfi_balanced(
    rho: &DensityMatrix,
    alpha_r: C64,
    dims: Option<(usize, usize)>,
) -> Result<(f64, (usize, usize))> {
    check_reference(alpha_r)?;
    let signal = signal_support(rho)?;
    let (da, db) = dims.unwrap_or((rho.dim(), coherent_dim(alpha_r.norm())));
    let joint = joint_support(&signal, rho.dim(), alpha_r, da, db)?;
    let g_phi: Vec<Vec<C64>> = joint.vectors.iter().map(|v| apply_g(v, da, db)).collect();
    Ok((qfi_from_support(&joint, &g_phi), (da, db)))
}

/// Smallest common dimension holding all but `AUTO_TAIL` of the
/// total-photon-number distribution.
fn common_dim(rho: &DensityMatrix, alpha_r: C64, floor: usize) -> usize {
    let pops = rho.populations();
    let lambda = alpha_r.norm_sqr();
    let mut d = floor.max(2);
    loop {
        let q = coherent_amplitudes(C64::new(lambda.sqrt(), 0.0), d);
        let q: Vec<f64> = q.iter().map(|z| z.norm_sqr()).collect();
        let mut kept = 0.0;
        for (n, p) in pops.iter().enumerate().take(d) {
            kept += p * q[..d - n].iter().sum::<f64>();
        }
        let total: f64 = pops.iter().sum();
        if total - kept <= AUTO_TAIL {
            return d;
        }
        d += 2;
    }
}

/// QFI of `J_z` after a first beam splitter of transmission `tau`.
pub fn mzi_qfi_tau(
    rho: &DensityMatrix,
    alpha_r: C64,
    tau: f64,
    dims: Option<(usize, usize)>,
) -> Result<(f64, (usize, usize))> {
    check_reference(alpha_r)?;
    let signal = signal_support(rho)?;
    let d = match dims {
        Some((a, b)) => a.max(b),
        None => common_dim(rho, alpha_r, rho.dim().max(coherent_dim(alpha_r.norm()))),
    };
    let joint = joint_support(&signal, rho.dim(), alpha_r, d, d)?;
    // Mass in total-number blocks that the truncation cuts.
    let mut cut = 0.0;
    for (p, v) in joint.probs.iter().zip(&joint.vectors) {
        for na in 0..d {
            for nb in d - na..d {
                cut += p * v[na * d + nb].norm_sqr();
            }
        }
    }
    if cut > TAIL_TOL {
        return Err(Error::TruncationInadequate {
            dim: d,
            tail: cut,
            suggested: common_dim(rho, alpha_r, d + 2),
        });
    }
    let bs = BeamSplitter::new(d, d)?;
    let rotated = bs.apply_many(tau, &joint.vectors)?;
    let evolved = Support {
        probs: joint.probs.clone(),
        vectors: rotated,
    };
    let jz_phi: Vec<Vec<C64>> = evolved.vectors.iter().map(|v| apply_jz(v, d)).collect();
    Ok((qfi_from_support(&evolved, &jz_phi), (d, d)))
}

/// Exact interferometer QFI: the folded generator when balanced, otherwise
/// the explicit beam-splitter route.
pub fn mzi_qfi_exact(rho: &DensityMatrix, cfg: &MziConfig) -> Result<f64> {
    if !(0.0..=1.0).contains(&cfg.tau) {
        return Err(Error::InvalidParameter(alloc::format!(
            "transmission must lie in [0, 1], got {}",
            cfg.tau
        )));
    }
    if cfg.is_balanced() {
        Ok(mzi_qfi_balanced(rho, cfg.alpha_r, cfg.dims)?.0)
    } else {
        Ok(mzi_qfi_tau(rho, cfg.alpha_r, cfg.tau, cfg.dims)?.0)
    }
}

/// `F = nbar/4 + |alpha_r|^2/2 F_X(rho)` for a balanced interferometer.
pub fn mzi_qfi_predicted(rho: &DensityMatrix, cfg: &MziConfig) -> Result<f64> {
    if !cfg.is_balanced() {
        return Err(Error::Config(alloc::format!(
            "the prediction holds for a balanced interferometer, got tau = {}",
            cfg.tau
        )));
    }
    check_reference(cfg.alpha_r)?;
    let nbar = rho.moments()?.nbar;
    let fx = max_quadrature_qfi(rho)?.value;
    Ok(nbar / 4.0 + cfg.alpha_r.norm_sqr() / 2.0 * fx)
}

/// Reference amplitude `|alpha_r| e^{-i mu*}` that maximizes the QFI.
pub fn aligned_reference(rho: &DensityMatrix, amplitude: f64) -> Result<C64> {
    let mu = max_quadrature_qfi(rho)?.mu_star;
    Ok(C64::from_polar(amplitude.abs(), -mu))
}

/// `W = max((F - N/4) / (|alpha_r|^2/2), 0)` with `N = nbar + |alpha_r|^2`.
pub fn witness_from_qfi(f_mzi: f64, nbar: f64, alpha_r: C64) -> Result<f64> {
    check_reference(alpha_r)?;
    let a2 = alpha_r.norm_sqr();
    let n = nbar + a2;
    Ok(((f_mzi - n / 4.0) / (a2 / 2.0)).max(0.0))
}

/// Cramer-Rao bound `1/(M F)` and the lower bound on the nonclassicality
/// `(4 - N M D) / (2 M |alpha_r|^2 D)` at phase variance `D` (the bound
/// itself unless `delta2` is given).
pub fn precision_analysis(f: f64, nbar: f64, cfg: &MziConfig, delta2: Option<f64>) -> Result<PrecisionBounds> {
    check_reference(cfg.alpha_r)?;
    if !(f > 0.0) {
        return Err(Error::NonPositiveQfi(f));
    }
    if cfg.reps == 0 {
        return Err(Error::Config("repetition count must be at least 1".into()));
    }
    let m = cfg.reps as f64;
    let crb = 1.0 / (m * f);
    let d2 = delta2.unwrap_or(crb);
    if !(d2 > 0.0) || !d2.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!(
            "phase variance must be positive, got {d2}"
        )));
    }
    let a2 = cfg.alpha_r.norm_sqr();
    let n = nbar + a2;
    let n_lower = ((4.0 - n * m * d2) / (2.0 * m * a2 * d2)).max(0.0);
    Ok(PrecisionBounds {
        crb,
        delta2: d2,
        n_lower,
    })
}

pub fn mzi_report(rho: &DensityMatrix, cfg: &MziConfig) -> Result<MziReport> {
    check_reference(cfg.alpha_r)?;
    let nbar = rho.moments()?.nbar;
    let qx = max_quadrature_qfi(rho)?;
    let (f_exact, dims) = if cfg.is_balanced() {
        mzi_qfi_balanced(rho, cfg.alpha_r, cfg.dims)?
    } else {
        mzi_qfi_tau(rho, cfg.alpha_r, cfg.tau, cfg.dims)?
    };
    let f_predicted = if cfg.is_balanced() {
        Some(nbar / 4.0 + cfg.alpha_r.norm_sqr() / 2.0 * qx.value)
    } else {
        None
    };
    let witness = witness_from_qfi(f_exact, nbar, cfg.alpha_r)?;
    let bounds = precision_analysis(f_exact, nbar, cfg, None)?;
    Ok(MziReport {
        f_exact,
        f_predicted,
        n_total_photons: nbar + cfg.alpha_r.norm_sqr(),
        witness,
        crb: bounds.crb,
        n_lower_bound: bounds.n_lower,
        mu_star: qx.mu_star,
        alpha_r: cfg.alpha_r,
        tau: cfg.tau,
        dims,
    })
}

/// Exact QFI on a grid of first-splitter transmissions.
pub fn tau_scan(rho: &DensityMatrix, alpha_r: C64, taus: &[f64]) -> Result<Vec<(f64, f64)>> {
    taus.iter()
        .map(|&t| {
            let f = if (t - 0.5).abs() <= 1e-12 {
                mzi_qfi_balanced(rho, alpha_r, None)?.0
            } else {
                mzi_qfi_tau(rho, alpha_r, t, None)?.0
            };
            Ok((t, f))
        })
        .collect()
}

/// Balanced QFI as a function of the reference phase `phi`,
/// `alpha_r = |alpha_r| e^{-i phi}`, with the fit `A + B cos 2phi + C sin 2phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseScan {
    pub points: Vec<(f64, f64)>,
    pub fit: [f64; 3],
    /// Maximizer of the fitted curve in `[0, pi)`.
    pub phi_opt: f64,
    /// Maximum of the fitted curve.
    pub f_max: f64,
    /// `phi_opt - mu*`, wrapped to `(-pi/2, pi/2]`.
    pub offset: f64,
    /// Largest sampled value.
    pub sampled_max: f64,
}

pub fn phase_scan(rho: &DensityMatrix, amplitude: f64, n: usize) -> Result<PhaseScan> {
    if n < 3 {
        return Err(Error::Config("a phase scan needs at least 3 points".into()));
    }
    let mu_star = max_quadrature_qfi(rho)?.mu_star;
    let mut points = Vec::with_capacity(n);
    for k in 0..n {
        let phi = 2.0 * PI * k as f64 / n as f64;
        let f = mzi_qfi_balanced(rho, C64::from_polar(amplitude, -phi), None)?.0;
        points.push((phi, f));
    }
    let fit = fit_sinusoid(&points);
    let (a, b, c) = (fit[0], fit[1], fit[2]);
    let phi_opt = wrap_pi(0.5 * c.atan2(b));
    let mut offset = wrap_pi(phi_opt - mu_star);
    if offset > PI / 2.0 {
        offset -= PI;
    }
    Ok(PhaseScan {
        sampled_max: points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
        points,
        fit,
        phi_opt,
        f_max: a + b.hypot(c),
        offset,
    })
}

/// Least-squares `A + B cos 2phi + C sin 2phi`.
fn fit_sinusoid(points: &[(f64, f64)]) -> [f64; 3] {
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for &(phi, f) in points {
        let row = [1.0, (2.0 * phi).cos(), (2.0 * phi).sin()];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * f;
        }
    }
    solve3(ata, atb)
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|k| m[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / m[i][i];
    }
    x
}

/// One point of the squeezed-vacuum scan with `|alpha_r|^2 = nbar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisenbergPoint {
    pub nbar: f64,
    pub n_total: f64,
    pub f_exact: f64,
}

/// Squeezed vacuum with `sinh^2 r = nbar` against a phase-aligned reference
/// of equal mean photon number.
pub fn heisenberg_scan(nbars: &[f64]) -> Result<Vec<HeisenbergPoint>> {
    nbars
        .iter()
        .map(|&nbar| {
            if !(nbar > 0.0) {
                return Err(Error::InvalidParameter(alloc::format!(
                    "nbar must be positive, got {nbar}"
                )));
            }
            let spec = StateSpec::SqueezedVacuum {
                r: nbar.sqrt().asinh(),
                phi: 0.0,
            };
            let basis = TruncatedBasis::new(crate::states::suggest_dim(&spec))?;
            let rho = prepare_pure(&spec, basis)?.to_density();
            let alpha_r = aligned_reference(&rho, nbar.sqrt())?;
            let f = mzi_qfi_balanced(&rho, alpha_r, None)?.0;
            Ok(HeisenbergPoint {
                nbar,
                n_total: 2.0 * nbar,
                f_exact: f,
            })
        })
        .collect()
}

/// Least-squares slope of `log F` against `log N`.
pub fn log_log_slope(points: &[HeisenbergPoint]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.n_total.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.f_exact.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::PureState;
    use crate::qfi::metrological_power;
    use crate::states::{beamsplitter_unitary, rho_p};
    use approx::assert_abs_diff_eq;

    fn b(d: usize) -> TruncatedBasis {
        TruncatedBasis::new(d).unwrap()
    }

    #[test]
    fn generators_are_hermitian() {
        let (jz, g) = mzi_generators((4, 5)).unwrap();
        assert!(g.matrix().hermitian_residual() <= 1e-14);
        // |1>|0> sits at index 1 * 5 + 0.
        assert_abs_diff_eq!(jz.matrix()[(5, 5)].re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn folded_generator_matches_rotated_jz_on_complete_blocks() {
        let d = 12;
        let (jz, g) = mzi_generators((d, d)).unwrap();
        let u = beamsplitter_unitary(0.5, (d, d)).unwrap();
        let rotated = u.matmul(jz.matrix()).matmul(&u.adjoint());
        let mut worst: f64 = 0.0;
        for i in 0..d * d {
            for j in 0..d * d {
                let ni = i / d + i % d;
                let nj = j / d + j % d;
                if ni < d && nj < d {
                    worst = worst.max((rotated[(i, j)] - g.matrix()[(i, j)]).norm());
                }
            }
        }
        assert!(worst <= 1e-12, "mismatch {worst}");
    }

    #[test]
    fn apply_g_matches_dense_generator() {
        let (_, g) = mzi_generators((4, 6)).unwrap();
        let v: Vec<C64> = (0..24)
            .map(|k| C64::new((k as f64 * 0.7).sin(), (k as f64).cos()))
            .collect();
        let dense = g.apply(&v);
        let fast = apply_g(&v, 4, 6);
        for (x, y) in dense.iter().zip(&fast) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn vacuum_gives_shot_noise() {
        let rho = PureState::fock(b(3), 0).unwrap().to_density();
        let cfg = MziConfig::balanced(C64::new(2.0, 0.0));
        assert_abs_diff_eq!(mzi_qfi_exact(&rho, &cfg).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(mzi_qfi_predicted(&rho, &cfg).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn single_photon_examples() {
        let rho = PureState::fock(b(4), 1).unwrap().to_density();
        let cfg = MziConfig::balanced(C64::new(2.0, 0.0));
        let f = mzi_qfi_exact(&rho, &cfg).unwrap();
        assert_abs_diff_eq!(f, 3.25, epsilon = 1e-10);
        let f_tau = mzi_qfi_exact(&rho, &MziConfig { tau: 0.3, ..cfg }).unwrap();
        assert!(f_tau <= 3.25 + 1e-8);
        assert_abs_diff_eq!(witness_from_qfi(3.25, 1.0, cfg.alpha_r).unwrap(), 1.0, epsilon = 1e-15);
        let pb = precision_analysis(f, 1.0, &cfg, None).unwrap();
        assert_abs_diff_eq!(pb.n_lower, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn both_routes_agree_when_balanced() {
        let rho = rho_p(0.75, b(4)).unwrap();
        let alpha = C64::from_polar(1.5, -0.4);
        let g = mzi_qfi_balanced(&rho, alpha, None).unwrap().0;
        let t = mzi_qfi_tau(&rho, alpha, 0.5, None).unwrap().0;
        assert_abs_diff_eq!(g, t, epsilon = 1e-9);
    }

    #[test]
    fn squeezed_prediction() {
        let spec = StateSpec::SqueezedVacuum { r: 0.5, phi: 0.0 };
        let rho = prepare_pure(&spec, b(40)).unwrap().to_density();
        let alpha = aligned_reference(&rho, 2.0).unwrap();
        let cfg = MziConfig::balanced(alpha);
        let pred = mzi_qfi_predicted(&rho, &cfg).unwrap();
        assert_abs_diff_eq!(pred, 2.786166907810951, epsilon = 1e-9);
        let exact = mzi_qfi_exact(&rho, &cfg).unwrap();
        assert_abs_diff_eq!(exact, pred, epsilon = 1e-8);
    }

    #[test]
    fn witness_and_bounds_edge_cases() {
        let a = C64::new(2.0, 0.0);
        assert_eq!(witness_from_qfi(1.25, 1.0, a).unwrap(), 0.0);
        assert_eq!(witness_from_qfi(1.0, 1.0, a).unwrap(), 0.0);
        assert_eq!(
            witness_from_qfi(1.0, 1.0, C64::new(0.0, 0.0)),
            Err(Error::ZeroReference)
        );
        let cfg = MziConfig {
            reps: 100,
            ..MziConfig::balanced(a)
        };
        let pb = precision_analysis(3.25, 1.0, &cfg, None).unwrap();
        assert_abs_diff_eq!(pb.crb, 1.0 / 325.0, epsilon = 1e-15);
        assert_eq!(
            precision_analysis(0.0, 1.0, &cfg, None),
            Err(Error::NonPositiveQfi(0.0))
        );
        let classical = precision_analysis(1.25, 1.0, &MziConfig::balanced(a), None).unwrap();
        assert_eq!(classical.n_lower, 0.0);
        let unbalanced = MziConfig { tau: 0.3, ..cfg };
        assert!(matches!(
            mzi_qfi_predicted(&rho_p(0.5, b(4)).unwrap(), &unbalanced),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn phase_scan_recovers_alignment() {
        let rho = prepare_pure(&StateSpec::SqueezedVacuum { r: 0.4, phi: 1.0 }, b(40))
            .unwrap()
            .to_density();
        let scan = phase_scan(&rho, 1.0, 36).unwrap();
        assert!(scan.offset.abs() < 1e-8, "offset {}", scan.offset);
        let pred = mzi_qfi_predicted(&rho, &MziConfig::balanced(C64::new(1.0, 0.0))).unwrap();
        assert_abs_diff_eq!(scan.f_max, pred, epsilon = 1e-8);
        assert!(scan.sampled_max <= pred + 1e-9);
    }

    #[test]
    fn witness_round_trip_on_mixed_state() {
        let rho = rho_p(0.75, b(4)).unwrap();
        let alpha = aligned_reference(&rho, 1.0).unwrap();
        let f = mzi_qfi_exact(&rho, &MziConfig::balanced(alpha)).unwrap();
        let w = witness_from_qfi(f, 0.75, alpha).unwrap();
        assert_abs_diff_eq!(w, metrological_power(&rho).unwrap(), epsilon = 1e-9);
    }
}
