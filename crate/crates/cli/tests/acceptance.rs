//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the summary is always printed.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nclass_cli::commands::table1_grid;
use nclass_core::{
    aligned_reference, far_apart_limit, loss_channel, macro_terms, metrological_power, minimize_nonclassicality,
    mix_pure, mzi_report, precision_analysis, prepare_pure, prepare_superposition, pure_nonclassicality, rho_p,
    suggest_dim, tau_scan, CoherentSuperposition, DensityMatrix, MziConfig, Parity, PureState, RoofOptions, StateSpec,
    TruncatedBasis, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("table reproduction", Some(Duration::from_secs(10)), table_reproduction),
        ("rho(p) curve", Some(Duration::from_secs(5)), rho_p_curve),
        (
            "interferometer identity",
            Some(Duration::from_secs(300)),
            interferometer_identity,
        ),
        ("balanced optimality", None, balanced_optimality),
        ("convex-roof soundness", Some(Duration::from_secs(300)), roof_soundness),
        ("macroscopicity sums", None, macroscopicity),
        ("extremality", None, extremality),
        ("lower-bound round trip", None, lower_bound_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut outcome = run();
        let elapsed = start.elapsed();
        if let (Ok(detail), Some(limit)) = (&outcome, limit) {
            if elapsed > *limit {
                outcome = Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}"));
            }
        }
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {} {name:<26} {tag}  {detail} [{elapsed:.2?}]", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pure(spec: StateSpec) -> PureState {
    prepare_pure(&spec, TruncatedBasis::new(suggest_dim(&spec)).unwrap()).unwrap()
}

fn cat(a: f64, parity: Parity) -> StateSpec {
    StateSpec::Cat {
        alpha: C64::new(a, 0.0),
        parity,
    }
}

fn squeezed(r: f64) -> StateSpec {
    StateSpec::SqueezedVacuum { r, phi: 0.0 }
}

/// Eight single-mode states probing the interferometer.
fn battery() -> Vec<(&'static str, DensityMatrix)> {
    let lossy_cat = loss_channel(&pure(cat(2.0, Parity::Even)).to_density(), 0.9).unwrap();
    vec![
        ("fock(1)", pure(StateSpec::Fock(1)).to_density()),
        ("fock(2)", pure(StateSpec::Fock(2)).to_density()),
        ("cat(1,+)", pure(cat(1.0, Parity::Even)).to_density()),
        ("cat(1,-)", pure(cat(1.0, Parity::Odd)).to_density()),
        ("squeezed(0.5)", pure(squeezed(0.5)).to_density()),
        ("rho_p(0.75)", rho_p(0.75, TruncatedBasis::new(4).unwrap()).unwrap()),
        ("loss(0.9) cat(2,+)", lossy_cat),
        (
            "coherent(1)",
            pure(StateSpec::Coherent(C64::new(1.0, 0.0))).to_density(),
        ),
    ]
}

/// `|alpha|^2 (N_+ + N_-) / N_pm` with `N_pm = 2 pm 2 exp(-2|alpha|^2)`.
fn cat_reference(a: f64, parity: Parity) -> f64 {
    let a2 = a * a;
    let np = 2.0 + 2.0 * (-2.0 * a2).exp();
    let nm = 2.0 - 2.0 * (-2.0 * a2).exp();
    a2 * (np + nm) / if parity == Parity::Even { np } else { nm }
}

fn closed_form(spec: &StateSpec) -> f64 {
    match *spec {
        StateSpec::Fock(n) => n as f64,
        StateSpec::FockSuperposition(n) => n as f64 / 2.0,
        StateSpec::SqueezedVacuum { r, .. } => {
            let nbar = r.sinh().powi(2);
            nbar + (nbar * (nbar + 1.0)).sqrt()
        }
        StateSpec::Cat { alpha, parity } => cat_reference(alpha.norm(), parity),
        StateSpec::Coherent(_) => 0.0,
    }
}

fn table_reproduction() -> Outcome {
    let mut specs: Vec<StateSpec> = (1..=6).map(StateSpec::Fock).collect();
    specs.extend((3..=6).map(StateSpec::FockSuperposition));
    specs.extend([0.25, 0.5, 1.0, 1.5].map(squeezed));
    for a in [0.5, 1.0, 2.0, 3.0] {
        specs.extend([Parity::Even, Parity::Odd].map(|p| cat(a, p)));
    }
    specs.extend(table1_grid());
    let mut worst = 0.0f64;
    let mut alt_gap = f64::INFINITY;
    for spec in &specs {
        let n = pure_nonclassicality(&pure(*spec))
            .map_err(|e| format!("{spec}: {e}"))?
            .n;
        let diff = (n - closed_form(spec)).abs();
        ensure(diff <= 1e-8, || {
            format!("{spec}: N = {n}, closed form {}", closed_form(spec))
        })?;
        worst = worst.max(diff);
        if let StateSpec::SqueezedVacuum { r, .. } = *spec {
            alt_gap = alt_gap.min((n - (r.exp() - 1.0) / 2.0).abs());
        }
    }
    Ok(format!(
        "{} states, max |N - closed form| = {worst:.1e}; squeezed N differs from (e^r-1)/2 by >= {alt_gap:.3}",
        specs.len()
    ))
}

fn rho_p_curve() -> Outcome {
    let basis = TruncatedBasis::new(4).unwrap();
    let mut worst = 0.0f64;
    for k in 0..=100 {
        let p = k as f64 / 100.0;
        let w = metrological_power(&rho_p(p, basis).unwrap()).map_err(|e| e.to_string())?;
        let expected = (p * (2.0 * p - 1.0)).max(0.0);
        let diff = (w - expected).abs();
        ensure(diff <= 1e-10, || format!("p = {p}: W = {w}, expected {expected}"))?;
        worst = worst.max(diff);
    }
    Ok(format!("101 points, max deviation {worst:.1e}"))
}

/// Battery states paired with phase-aligned references of `|alpha_r|^2 = 1, 4`.
fn battery_configs() -> Result<Vec<(String, DensityMatrix, MziConfig)>, String> {
    let mut out = Vec::new();
    for (name, rho) in battery() {
        for amp in [1.0, 2.0] {
            let alpha_r = aligned_reference(&rho, amp).map_err(|e| format!("{name}: {e}"))?;
            out.push((
                format!("{name} |alpha_r|={amp}"),
                rho.clone(),
                MziConfig::balanced(alpha_r),
            ));
        }
    }
    Ok(out)
}

fn interferometer_identity() -> Outcome {
    let mut worst = 0.0f64;
    let mut max_dim = 0;
    let configs = battery_configs()?;
    for (name, rho, cfg) in &configs {
        let rep = mzi_report(rho, cfg).map_err(|e| format!("{name}: {e}"))?;
        let pred = rep.f_predicted.ok_or_else(|| format!("{name}: no prediction"))?;
        let rel = (rep.f_exact - pred).abs() / rep.f_exact.max(1.0);
        ensure(rel <= 1e-5, || {
            format!("{name}: F_exact {} vs predicted {pred}", rep.f_exact)
        })?;
        ensure(rep.dims.0 <= 40 && rep.dims.1 <= 40, || {
            format!("{name}: dims {:?} exceed 40", rep.dims)
        })?;
        worst = worst.max(rel);
        max_dim = max_dim.max(rep.dims.0.max(rep.dims.1));
    }
    Ok(format!(
        "{} configurations, max relative deviation {worst:.1e}, per-mode dims <= {max_dim}",
        configs.len()
    ))
}

fn balanced_optimality() -> Outcome {
    let taus: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    let mut margin = f64::INFINITY;
    let configs = battery_configs()?;
    for (name, rho, cfg) in &configs {
        let scan = tau_scan(rho, cfg.alpha_r, &taus).map_err(|e| format!("{name}: {e}"))?;
        let f_half = scan[4].1;
        for &(tau, f) in &scan {
            ensure(f <= f_half + 1e-8, || {
                format!("{name}: F({tau}) = {f} > F(0.5) = {f_half}")
            })?;
            if (tau - 0.5).abs() > 1e-12 {
                margin = margin.min(f_half - f);
            }
        }
    }
    Ok(format!(
        "{} configurations on tau = 0.1..0.9, min F(0.5) - F(tau) = {margin:.3e}",
        configs.len()
    ))
}

fn roof_opts(seed: u64) -> RoofOptions {
    RoofOptions {
        restarts: 32,
        seed,
        ..RoofOptions::default()
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn mix_normalized(mut comps: Vec<(f64, PureState)>) -> Result<DensityMatrix, String> {
    let total: f64 = comps.iter().map(|(w, _)| w).sum();
    comps.iter_mut().for_each(|(w, _)| *w /= total);
    mix_pure(&comps).map_err(|e| e.to_string())
}

fn roof_soundness() -> Outcome {
    // pure states of the table
    let mut pure_gap = 0.0f64;
    for spec in table1_grid() {
        let res = minimize_nonclassicality(&pure(spec).to_density(), &roof_opts(0)).map_err(|e| e.to_string())?;
        let gap = (res.n_upper - closed_form(&spec)).abs();
        ensure(gap <= 1e-6, || {
            format!("{spec}: N_upper {} vs {}", res.n_upper, closed_form(&spec))
        })?;
        pure_gap = pure_gap.max(gap);
    }

    // coherent mixtures are classical
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let basis = TruncatedBasis::new(30).unwrap();
    let mut classical = 0.0f64;
    for i in 0..10 {
        let parts = 2 + i % 2;
        let comps: Vec<(f64, PureState)> = (0..parts)
            .map(|_| {
                let a = random_unit(&mut rng) * 1.5;
                let psi = prepare_pure(&StateSpec::Coherent(a), basis).unwrap();
                (rng.random_range(0.1..1.0), psi)
            })
            .collect();
        let rho = mix_normalized(comps)?;
        let res = minimize_nonclassicality(&rho, &roof_opts(i as u64)).map_err(|e| e.to_string())?;
        ensure(res.n_upper <= 1e-6, || {
            format!("coherent mixture {i}: N_upper = {}", res.n_upper)
        })?;
        classical = classical.max(res.n_upper);
    }

    // bracket on random mixed states
    let mut min_gap = f64::INFINITY;
    for i in 0..50 {
        let levels = rng.random_range(2..=5);
        let basis = TruncatedBasis::new(levels + 3).unwrap();
        let rank = rng.random_range(1..=3);
        let comps: Vec<(f64, PureState)> = (0..rank)
            .map(|_| {
                let mut amps: Vec<C64> = (0..levels).map(|_| random_unit(&mut rng)).collect();
                amps.resize(basis.dim(), C64::new(0.0, 0.0));
                (
                    rng.random_range(0.05..1.0),
                    PureState::from_unnormalized(basis, amps).unwrap(),
                )
            })
            .collect();
        let rho = mix_normalized(comps)?;
        let w = metrological_power(&rho).map_err(|e| e.to_string())?;
        let res = minimize_nonclassicality(&rho, &roof_opts(100 + i)).map_err(|e| e.to_string())?;
        ensure(w <= res.n_upper + 1e-9, || {
            format!("random state {i}: W = {w} > N_upper = {}", res.n_upper)
        })?;
        min_gap = min_gap.min(res.n_upper - w);
    }

    // loss cannot create metrological power
    let mut chain = 0usize;
    for spec in [
        cat(1.0, Parity::Even),
        cat(1.0, Parity::Odd),
        cat(2.0, Parity::Even),
        squeezed(0.5),
    ] {
        let psi = pure(spec);
        let n = pure_nonclassicality(&psi).map_err(|e| e.to_string())?.n;
        for eta in [0.7, 0.9] {
            let w = metrological_power(&loss_channel(&psi.to_density(), eta).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            ensure(w <= n + 1e-9, || format!("{spec} eta = {eta}: W = {w} > N = {n}"))?;
            chain += 1;
        }
    }

    Ok(format!(
        "pure max gap {pure_gap:.1e}; 10 coherent mixtures N_upper <= {classical:.1e}; \
         50 random W <= N_upper (min margin {min_gap:.1e}); {chain} loss checks"
    ))
}

fn macroscopicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let basis = TruncatedBasis::new(60).unwrap();
    let mut worst = 0.0f64;
    let mut made = 0;
    while made < 100 {
        let len = rng.random_range(1..=4);
        let centers: Vec<C64> = (0..len)
            .map(|_| {
                let r = 3.0 * rng.random_range(0.0f64..1.0).sqrt();
                C64::from_polar(r, rng.random_range(0.0..2.0 * PI))
            })
            .collect();
        let separated = (0..len).all(|j| (j + 1..len).all(|k| (centers[j] - centers[k]).norm() >= 0.3));
        let coefficients: Vec<C64> = (0..len).map(|_| random_unit(&mut rng)).collect();
        if !separated || coefficients.iter().any(|c| c.norm() < 0.1) {
            continue;
        }
        let sup = CoherentSuperposition::new(coefficients, centers).map_err(|e| e.to_string())?;
        if sup.norm_sqr() < 0.05 {
            continue;
        }
        made += 1;
        let rep = macro_terms(&sup);
        let m = prepare_superposition(&sup, basis)
            .and_then(|psi| psi.moments())
            .map_err(|e| e.to_string())?;
        let energy = (rep.energy_term - m.energy_term()).abs();
        let squeeze = (rep.squeezing_term - m.squeezing().norm()).abs();
        ensure(energy.max(squeeze) <= 1e-8, || {
            format!(
                "superposition {made}: sums ({}, {}) vs Fock ({}, {})",
                rep.energy_term,
                rep.squeezing_term,
                m.energy_term(),
                m.squeezing().norm()
            )
        })?;
        worst = worst.max(energy).max(squeeze);
    }
    let cat3 = CoherentSuperposition::new(
        vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
        vec![C64::new(3.0, 0.0), C64::new(-3.0, 0.0)],
    )
    .map_err(|e| e.to_string())?;
    let far = far_apart_limit(&cat3);
    let exact = macro_terms(&cat3).n_total;
    ensure((far - 18.0).abs() <= 1e-3 && (exact - 18.0).abs() <= 1e-3, || {
        format!("cat(3,+): far-apart {far}, exact {exact}")
    })?;
    Ok(format!(
        "100 superpositions, max deviation {worst:.1e}; cat(3,+) far-apart {far}, exact {exact:.7}"
    ))
}

/// Tilts `|c_n|^2 -> |c_n|^2 e^{-t n}` until the mean photon number is `nbar`.
fn tilt_to_mean(amps: &[C64], nbar: f64) -> Vec<C64> {
    let tilted = |t: f64| -> Vec<C64> {
        let v: Vec<C64> = amps
            .iter()
            .enumerate()
            .map(|(n, c)| c * (-0.5 * t * n as f64).exp())
            .collect();
        let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|c| c / norm).collect()
    };
    let mean = |v: &[C64]| -> f64 { v.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum() };
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean(&tilted(mid)) > nbar {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    tilted(0.5 * (lo + hi))
}

fn extremality() -> Outcome {
    let nbar: f64 = 2.0;
    let bound = nbar + (nbar * (nbar + 1.0)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut best = f64::NEG_INFINITY;
    for i in 0..500 {
        let levels = rng.random_range(4..=12);
        let mut amps: Vec<C64> = (0..levels).map(|_| random_unit(&mut rng)).collect();
        amps[levels - 1] += C64::new(0.2, 0.0);
        let mut v = tilt_to_mean(&amps, nbar);
        v.resize(levels + 2, C64::new(0.0, 0.0));
        let psi = PureState::new(TruncatedBasis::new(levels + 2).unwrap(), v).map_err(|e| e.to_string())?;
        let pm = pure_nonclassicality(&psi).map_err(|e| e.to_string())?;
        ensure((pm.moments.nbar - nbar).abs() <= 1e-9, || {
            format!("state {i}: nbar = {}", pm.moments.nbar)
        })?;
        ensure(pm.n <= bound + 1e-9, || format!("state {i}: N = {} > {bound}", pm.n))?;
        best = best.max(pm.n);
    }
    ensure(best < bound - 1e-6, || {
        format!("random state reached N = {best}, bound {bound}")
    })?;
    let r = nbar.sqrt().asinh();
    let mut sq_gap = 0.0f64;
    for phi in [0.0, 1.0, 2.5] {
        let n = pure_nonclassicality(&pure(StateSpec::SqueezedVacuum { r, phi }))
            .map_err(|e| e.to_string())?
            .n;
        sq_gap = sq_gap.max((n - bound).abs());
    }
    ensure(sq_gap <= 1e-8, || {
        format!("squeezed vacuum misses the bound by {sq_gap}")
    })?;
    Ok(format!(
        "500 states at nbar = 2: max N = {best:.6} < {bound:.6}; squeezed vacuum attains it within {sq_gap:.1e}"
    ))
}

fn lower_bound_round_trip() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_witness = 0.0f64;
    let configs = battery_configs()?;
    let mut roof_cache: Vec<(String, f64)> = Vec::new();
    for (name, rho, cfg) in &configs {
        let nbar = rho.moments().map_err(|e| e.to_string())?.nbar;
        let rep = mzi_report(rho, cfg).map_err(|e| format!("{name}: {e}"))?;
        let w = metrological_power(rho).map_err(|e| e.to_string())?;
        worst_witness = worst_witness.max((rep.witness - w).abs());
        ensure((rep.witness - w).abs() <= 1e-5, || {
            format!("{name}: witness {} vs W {w}", rep.witness)
        })?;
        for reps in [1, 10, 100] {
            let cfg = MziConfig { reps, ..*cfg };
            let b = precision_analysis(rep.f_exact, nbar, &cfg, None).map_err(|e| format!("{name}: {e}"))?;
            let diff = (b.n_lower - rep.witness).abs();
            ensure(diff <= 1e-6, || {
                format!("{name} M = {reps}: N_lower {} vs witness {}", b.n_lower, rep.witness)
            })?;
            worst = worst.max(diff);
        }
        let state = name.split(" |").next().unwrap_or(name).to_string();
        let n_upper = match roof_cache.iter().find(|(s, _)| *s == state) {
            Some((_, n)) => *n,
            None => {
                let n = minimize_nonclassicality(rho, &roof_opts(0))
                    .map_err(|e| e.to_string())?
                    .n_upper;
                roof_cache.push((state, n));
                n
            }
        };
        ensure(w <= n_upper + 1e-9, || format!("{name}: W = {w} > N_upper = {n_upper}"))?;
    }
    Ok(format!(
        "{} configurations x M in {{1,10,100}}: max |N_lower - W| = {worst:.1e}, witness vs W {worst_witness:.1e}, \
         N_lower <= W <= N_upper",
        configs.len()
    ))
}
