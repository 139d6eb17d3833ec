//! Nonclassicality of coherent-state superpositions `sum_j c_j |alpha_j>`
//! written through phase-space distances `d_jk = alpha_j - alpha_k` and
//! overlaps `f_jk = <alpha_k|alpha_j>`.
//!
//! Both terms are grouped by the number of distinct indices involved: pairs,
//! all-distinct triples and all-distinct quadruples.

use crate::states::CoherentSuperposition;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroReport {
    /// `nbar - |alpha|^2`.
    pub energy_term: f64,
    /// `|xi - alpha^2|`.
    pub squeezing_term: f64,
    /// Pair, triple and quadruple contributions to `nbar - |alpha|^2`.
    pub energy_parts: [C64; 3],
    /// Pair, triple and quadruple contributions to `xi - alpha^2`.
    pub squeezing_parts: [C64; 3],
    pub far_apart_value: f64,
    pub n_total: f64,
    /// Moments summed directly over coherent components.
    pub direct_energy: f64,
    pub direct_squeezing: f64,
}

pub fn macro_terms(sup: &CoherentSuperposition) -> MacroReport {
    let l = sup.len();
    let c = sup.coefficients();
    let f = |j: usize, k: usize| sup.overlap(j, k);
    let d = |j: usize, k: usize| sup.distance(j, k);
    let abs2 = |z: C64| z.norm_sqr();

    let mut e_pair = C64::new(0.0, 0.0);
    let mut s_pair = C64::new(0.0, 0.0);
    for j in 0..l {
        for k in 0..l {
            if j == k {
                continue;
            }
            let (cj, ck) = (c[j], c[k]);
            let djk = d(j, k);
            let fjk2 = abs2(f(j, k));
            e_pair += abs2(cj) * abs2(ck) * djk.norm_sqr() * (1.0 - fjk2) * 0.5;
            s_pair += djk
                * djk
                * (abs2(cj) * abs2(ck) * (1.0 + abs2(f(k, j))) + cj.conj() * ck * f(k, j) * abs2(cj) * 2.0)
                * 0.5;
        }
    }

    let mut e_triple = C64::new(0.0, 0.0);
    let mut s_triple = C64::new(0.0, 0.0);
    for j in 0..l {
        for k in 0..l {
            if k == j {
                continue;
            }
            for m in 0..l {
                if m == j || m == k {
                    continue;
                }
                // third index named `m` here plays the role of `l`
                let (cj, ck, cl) = (c[j], c[k], c[m]);
                let dlk = d(m, k);
                e_triple += cj.conj() * abs2(ck) * cl * d(j, k).conj() * dlk * (f(m, j) - f(m, k) * f(k, j));
                s_triple += cj.conj() * abs2(ck) * cl * dlk * dlk * (f(m, j) + f(m, k) * f(k, j))
                    + cj.conj() * cj.conj() * ck * cl * f(k, j) * f(m, j) * dlk * dlk * 0.5;
            }
        }
    }

    let mut e_quad = C64::new(0.0, 0.0);
    let mut s_quad = C64::new(0.0, 0.0);
    for j in 0..l {
        for k in 0..l {
            if k == j {
                continue;
            }
            for a in 0..l {
                if a == j || a == k {
                    continue;
                }
                for b in 0..l {
                    if b == j || b == k || b == a {
                        continue;
                    }
                    // (j, k, l, m) = (j, k, a, b)
                    let w = c[j].conj() * c[k].conj() * c[a] * c[b] * f(b, j) * f(a, k) * 0.5;
                    let dml = d(b, a);
                    e_quad += w * d(j, k).conj() * dml;
                    s_quad += w * dml * dml;
                }
            }
        }
    }

    let energy_parts = [e_pair, e_triple, e_quad];
    let squeezing_parts = [s_pair, s_triple, s_quad];
    let energy_term = (e_pair + e_triple + e_quad).re;
    let squeezing_term = (s_pair + s_triple + s_quad).norm();
    let (direct_energy, direct_squeezing) = direct_moments(sup);
    MacroReport {
        energy_term,
        squeezing_term,
        energy_parts,
        squeezing_parts,
        far_apart_value: far_apart_limit(sup),
        n_total: energy_term + squeezing_term,
        direct_energy,
        direct_squeezing,
    }
}

/// `(nbar - |alpha|^2, |xi - alpha^2|)` from
/// `<a^dag^p a^q> = sum_jk c_j^* c_k alpha_j^*p alpha_k^q f_kj`.
fn direct_moments(sup: &CoherentSuperposition) -> (f64, f64) {
    let c = sup.coefficients();
    let al = sup.centers();
    let mut nbar = C64::new(0.0, 0.0);
    let mut alpha = C64::new(0.0, 0.0);
    let mut xi = C64::new(0.0, 0.0);
    for j in 0..sup.len() {
        for k in 0..sup.len() {
            let w = c[j].conj() * c[k] * sup.overlap(k, j);
            nbar += w * al[j].conj() * al[k];
            alpha += w * al[k];
            xi += w * al[k] * al[k];
        }
    }
    (nbar.re - alpha.norm_sqr(), (xi - alpha * alpha).norm())
}

/// `sum_jk |c_j|^2 |c_k|^2 |d_jk|^2`.
pub fn far_apart_limit(sup: &CoherentSuperposition) -> f64 {
    let c = sup.coefficients();
    let mut acc = 0.0;
    for j in 0..sup.len() {
        for k in 0..sup.len() {
            acc += c[j].norm_sqr() * c[k].norm_sqr() * sup.distance(j, k).norm_sqr();
        }
    }
    acc
}
