//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any of them fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use armchair_core::flatband::{
    build_compact_eigenfunction, expansion_coefficients, kirchhoff_residual, superpose,
    BoundaryDerivatives,
};
use armchair_core::geometry::{magnetic_phases, MagneticPhases};
use armchair_core::hill::{HillScan, HillSolver, Potential};
use armchair_core::lyapunov::ChannelParams;
use armchair_core::oracle::{
    FloquetSuite, MonodromySuite, TracesSuite, VerificationSuite, VerifyConfig,
};
use armchair_core::spectrum::{
    gaps_full, multiplicity_map, relation_mg_holds, theta_tilde, ChannelSpectrum, FullSpectrum,
    GapClass, SpectralContext,
};
use armchair_core::Result;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn cos_q() -> Potential {
    Potential::fourier(vec![0.0, 1.0], vec![]).unwrap()
}

fn scan(q: Potential, x_max: f64) -> Result<HillScan> {
    HillScan::new(HillSolver::new(q), x_max)
}

fn channel(scan: &HillScan, k: usize, n_around: usize, a: f64) -> Result<ChannelSpectrum> {
    SpectralContext::new(scan)?.channel(&ChannelParams::from_a(k, n_around, a)?)
}

fn full(scan: &HillScan, n_around: usize, a: f64) -> Result<FullSpectrum> {
    gaps_full(scan, n_around, MagneticPhases::new(a, 0.0))
}

fn gap(spec: &FullSpectrum, m: usize) -> Option<(f64, f64, bool)> {
    spec.gaps
        .iter()
        .find(|g| g.index == m)
        .map(|g| (g.lo.value, g.hi.value, g.empty))
}

fn band_skeleton() -> Result<Outcome> {
    let s = scan(Potential::zero(), 6.0 * PI)?;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for n_around in [2, 3, 5] {
        let f = full(&s, n_around, 0.0)?;
        ok &= f.gaps.iter().filter(|g| g.index >= 1).all(|g| g.empty);
        ok &= f.bands.len() == 1;
        worst = worst.max(f.bands[0].0.abs());
        worst = worst.max((f.gaps[0].hi.value).abs());
        for (n, mu) in f.flat_bands.iter().enumerate() {
            worst = worst.max((mu - (PI * (n + 1) as f64).powi(2)).abs());
        }
        let k0 = &f.channels[0];
        for g in k0.gaps.iter().filter(|g| g.index >= 1) {
            worst = worst.max((g.hi.value - g.lo.value).abs());
        }
    }
    Ok(outcome(
        ok && worst <= 1e-8,
        format!("max endpoint mismatch {worst:.2e}"),
    ))
}

fn resonance_gap() -> Result<Outcome> {
    let s = scan(Potential::zero(), 6.0)?;
    let spec = channel(&s, 0, 2, PI / 6.0)?;
    let g = spec.gaps[2];
    let lo = (1.0f64 / 6.0).acos().powi(2);
    let hi = (-1.0f64 / 6.0).acos().powi(2);
    let err = (g.lo.value - lo).abs().max((g.hi.value - hi).abs());
    Ok(outcome(
        err <= 1e-6 && g.class == GapClass::Resonance,
        format!(
            "G_2 = ({:.7}, {:.7}), class {}, error {err:.2e}",
            g.lo.value,
            g.hi.value,
            g.class.as_str()
        ),
    ))
}

fn asymptotics() -> Result<Outcome> {
    let a = PI / 6.0;
    let t = theta_tilde(0, a);
    let free = channel(&scan(Potential::zero(), 21.0 * PI)?, 0, 2, a)?;
    let mut free_err: f64 = 0.0;
    for n in 5..=20 {
        let g = free.gaps[4 * n];
        let c = PI * n as f64;
        free_err = free_err
            .max((g.lo.value.sqrt() - (c - t)).abs())
            .max((g.hi.value.sqrt() - (c + t)).abs());
    }
    let rough = channel(&scan(cos_q(), 26.0 * PI)?, 0, 2, a)?;
    let scaled: Vec<f64> = (10..=25)
        .map(|n| {
            let g = rough.gaps[4 * n];
            let c = PI * n as f64;
            n as f64
                * (g.lo.value.sqrt() - (c - t))
                    .abs()
                    .max((g.hi.value.sqrt() - (c + t)).abs())
        })
        .collect();
    // Least-squares slope of n |error| against n.
    let m = scaled.len() as f64;
    let xs: Vec<f64> = (10..=25).map(|n| n as f64).collect();
    let (xm, ym) = (xs.iter().sum::<f64>() / m, scaled.iter().sum::<f64>() / m);
    let slope = xs
        .iter()
        .zip(&scaled)
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum::<f64>()
        / xs.iter().map(|x| (x - xm).powi(2)).sum::<f64>();
    let bound = scaled.iter().fold(0.0f64, |a, &b| a.max(b));
    Ok(outcome(
        free_err <= 1e-6 && bound <= 1.0 && slope <= 0.0,
        format!("q=0 error {free_err:.2e}; q=cos max n|err| {bound:.2e}, slope {slope:.2e}"),
    ))
}

/// Central difference of `F` in `lambda`.
fn f_prime(solver: &HillSolver, lambda: f64) -> Result<f64> {
    let h = 1e-5 * lambda.abs().max(1.0);
    Ok((solver.values(lambda + h)?.f - solver.values(lambda - h)?.f) / (2.0 * h))
}

fn small_field() -> Result<Outcome> {
    let s = scan(cos_q(), 3.0 * PI)?;
    let solver = s.solver();
    let a = 1e-3;
    let eta = s.landmarks.eta[0];
    let e2 = channel(&s, 0, 2, a)?.gaps[2].hi.value;
    let e2_zero = channel(&s, 0, 2, 0.0)?.gaps[2].hi.value;
    let slope = (e2 - e2_zero) / a;
    let expected_slope = 1.0 / (3.0 * f_prime(solver, eta)?.abs());
    let slope_err = (slope / expected_slope - 1.0).abs();

    // The curvature term is resolved at a larger field, still well inside the quadratic regime.
    let b = 0.02;
    let g4 = channel(&s, 0, 2, b)?.gaps[4];
    let mut mass_err: f64 = 0.0;
    for (edge, shifted) in [
        (s.landmarks.edges[0].0, g4.lo.value),
        (s.landmarks.edges[0].1, g4.hi.value),
    ] {
        let mass = -solver.values(edge)?.f * f_prime(solver, edge)?;
        mass_err = mass_err.max(((shifted - edge) / (b * b) * 9.0 * mass - 1.0).abs());
    }
    Ok(outcome(
        slope_err <= 0.02 && mass_err <= 0.05,
        format!("slope relative error {slope_err:.2e}; curvature relative error {mass_err:.2e} at a = {b}"),
    ))
}

fn endpoint_set(spec: &FullSpectrum, limit: f64) -> Vec<f64> {
    let mut v: Vec<f64> = spec
        .channels
        .iter()
        .flat_map(|c| c.gaps.iter())
        .filter(|g| !g.empty)
        .flat_map(|g| [g.lo.value, g.hi.value])
        .filter(|x| x.is_finite() && *x < limit)
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

fn set_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn periodicity() -> Result<Outcome> {
    let n_around = 3;
    let s = scan(cos_q(), 5.0 * PI)?;
    let limit = s.lambda_max() - 20.0;
    let mut worst: f64 = 0.0;
    for a in [0.2, 0.45, 1.0] {
        let base = endpoint_set(&full(&s, n_around, a)?, limit);
        let shifted = endpoint_set(&full(&s, n_around, a + PI / n_around as f64)?, limit);
        let mirrored = endpoint_set(&full(&s, n_around, -a)?, limit);
        worst = worst
            .max(set_distance(&base, &shifted))
            .max(set_distance(&base, &mirrored));
    }
    Ok(outcome(
        worst <= 1e-8,
        format!("max endpoint mismatch {worst:.2e}"),
    ))
}

fn monotonicity() -> Result<Outcome> {
    let s = scan(cos_q(), 5.0 * PI)?;
    let limit = s.lambda_max();
    let tol = 1e-8;
    let grid: Vec<f64> = (0..=8).map(|i| PI / 4.0 * i as f64 / 8.0).collect();
    let specs: Vec<FullSpectrum> = grid
        .iter()
        .map(|&a| full(&s, 2, a))
        .collect::<Result<_>>()?;
    let mut violations = 0;
    let mut checked = 0;
    for i in 0..specs.len() {
        for j in i + 1..specs.len() {
            let (small, large) = (&specs[i], &specs[j]);
            for m in 1.. {
                let (Some(gs), Some(gl)) = (gap(small, m), gap(large, m)) else {
                    break;
                };
                if gs.1.max(gl.1) >= limit {
                    break;
                }
                let (inner, outer) = match m % 4 {
                    0 => (gs, gl),
                    1 | 3 => (gl, gs),
                    _ => continue,
                };
                checked += 1;
                if !inner.2 && (inner.0 < outer.0 - tol || inner.1 > outer.1 + tol || outer.2) {
                    violations += 1;
                }
            }
        }
    }
    Ok(outcome(
        violations == 0 && checked > 0,
        format!("{violations} violations in {checked} inclusions"),
    ))
}

fn random_smooth(seed: u64) -> Potential {
    let mut rng = StdRng::seed_from_u64(seed);
    let cos = (0..5)
        .map(|i| rng.random_range(-2.0..2.0) / (1 + i) as f64)
        .collect();
    let sin = (0..4)
        .map(|i| rng.random_range(-2.0..2.0) / (2 + i) as f64)
        .collect();
    Potential::fourier(cos, sin).unwrap()
}

fn monodromy() -> Result<Outcome> {
    let config = VerifyConfig::default();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for q in [Potential::zero(), random_smooth(11)] {
        let solver = HillSolver::new(q);
        for report in [
            MonodromySuite.run(&solver, &config)?,
            TracesSuite.run(&solver, &config)?,
        ] {
            ok &= report.passed();
            worst = report.checks.iter().map(|c| c.value).fold(worst, f64::max);
        }
    }
    Ok(outcome(
        ok && worst <= 1e-8,
        format!("max residual {worst:.2e} over {} samples", config.samples),
    ))
}

fn floquet_fd() -> Result<Outcome> {
    let config = VerifyConfig {
        phases: magnetic_phases(0.7, 2)?,
        fd_points: 200,
        fd_thetas: 16,
        ..VerifyConfig::default()
    };
    let report = FloquetSuite.run(&HillSolver::new(cos_q()), &config)?;
    let detail = report
        .checks
        .iter()
        .map(|c| format!("{} {:.2e}", c.name, c.value))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(outcome(report.passed(), detail))
}

fn flat_bands() -> Result<Outcome> {
    let mut residual: f64 = 0.0;
    let mut round_trip: f64 = 0.0;
    let mut degenerate_seen = false;
    for q in [Potential::zero(), cos_q()] {
        let s = scan(q, 3.0 * PI)?;
        for n_around in [2, 3] {
            for phases in [
                MagneticPhases::new(0.0, 0.0),
                magnetic_phases(0.7, n_around)?,
            ] {
                for ch in ChannelParams::all(n_around, phases)? {
                    for &mu in &s.landmarks.dirichlet[..2] {
                        let psi1 = build_compact_eigenfunction(s.solver(), &ch, mu, 1)?;
                        let psi2 = build_compact_eigenfunction(s.solver(), &ch, mu, 2)?;
                        degenerate_seen |= psi1.degenerate;
                        residual = residual
                            .max(kirchhoff_residual(&psi1.edge_data(), &ch))
                            .max(kirchhoff_residual(&psi2.edge_data(), &ch));
                        let coeffs: BTreeMap<i64, (Complex64, Complex64)> = (-2..=2)
                            .map(|n| {
                                (
                                    n,
                                    (
                                        Complex64::new(1.0 + n as f64, 0.5),
                                        Complex64::new(-0.3, 2.0 - n as f64),
                                    ),
                                )
                            })
                            .collect();
                        let shifted: Vec<_> = coeffs
                            .iter()
                            .flat_map(|(&n, _)| [psi1.translated(n), psi2.translated(n)])
                            .collect();
                        let terms: Vec<(Complex64, &_)> = coeffs
                            .values()
                            .zip(shifted.chunks(2))
                            .flat_map(|(&(c1, c2), p)| [(c1, &p[0]), (c2, &p[1])])
                            .collect();
                        let data = superpose(&terms);
                        residual = residual.max(kirchhoff_residual(&data, &ch));
                        let input = BoundaryDerivatives::from_edges(&data, psi1.degenerate);
                        let back = expansion_coefficients(&input, &ch, psi1.phi)?;
                        round_trip = round_trip.max(back.max_deviation(&coeffs));
                    }
                }
            }
        }
    }
    Ok(outcome(
        residual <= 1e-10 && round_trip <= 1e-10 && degenerate_seen,
        format!("Kirchhoff residual {residual:.2e}; round trip {round_trip:.2e}; degenerate case covered: {degenerate_seen}"),
    ))
}

fn delta_gaps() -> Result<Outcome> {
    let eps = 0.01;
    let q = Potential::delta_eps(eps)?;
    let s = scan(q.clone(), 4.0 * PI)?;
    let a_values = [0.0, 0.3, PI / 4.0];
    let specs: Vec<FullSpectrum> = a_values
        .iter()
        .map(|&a| full(&s, 2, a))
        .collect::<Result<_>>()?;
    let mut gap_err: f64 = 0.0;
    let mut found = true;
    for m in [2, 6, 10] {
        let base = gap(&specs[0], m);
        found &= base.is_some();
        for other in &specs[1..] {
            match (base, gap(other, m)) {
                (Some(b), Some(o)) => {
                    gap_err = gap_err.max((b.0 - o.0).abs()).max((b.1 - o.1).abs())
                }
                _ => found = false,
            }
        }
    }
    let solver = HillSolver::new(q);
    let mut fm_err: f64 = 0.0;
    for i in 1..=100 {
        let lambda = 4.0 * i as f64;
        let x = lambda.sqrt();
        let expected = (4.0 * eps * x).sin() / (2.0 * eps * x);
        fm_err = fm_err.max((solver.values(lambda)?.f_minus - expected).abs());
    }
    Ok(outcome(
        found && gap_err <= 1e-8 && fm_err <= 1e-12,
        format!("gap mismatch {gap_err:.2e}; F_- error {fm_err:.2e}"),
    ))
}

fn multiplicity() -> Result<Outcome> {
    let s = scan(cos_q(), 5.0 * PI)?;
    let spec = channel(&s, 0, 2, 0.0)?;
    let lmax = s.lambda_max();
    let map = multiplicity_map(&spec, lmax);
    let mut bad = 0;
    let mut samples = 0;
    let kappa = &spec.labeled.kappa;
    let top = spec.bands(lmax).last().map_or(lmax, |b| b.1);
    for (i, &(lo, hi)) in kappa.iter().enumerate().filter(|(_, k)| k.1 <= top) {
        let eta = s.landmarks.eta[i];
        for f in [0.05, 0.3, 0.7, 0.95] {
            for x in [lo + f * (eta - lo), eta + f * (hi - eta)] {
                samples += 1;
                bad += usize::from(map.at(x) != 4);
            }
        }
    }
    for (lo, hi) in spec.bands(lmax) {
        for i in 1..50 {
            let x = lo + (hi - lo) * i as f64 / 50.0;
            if kappa.iter().any(|&(a, b)| x >= a - 1e-9 && x <= b + 1e-9) {
                continue;
            }
            samples += 1;
            bad += usize::from(map.at(x) != 2);
        }
    }
    let mut mg_bad = 0;
    for a in [0.0, 0.3, 0.9] {
        for k in 0..3 {
            mg_bad += relation_mg_holds(&s, &channel(&s, k, 3, a)?, 1e-9)?.len();
        }
    }
    Ok(outcome(
        bad == 0 && mg_bad == 0,
        format!(
            "{bad} of {samples} multiplicity samples wrong; {mg_bad} endpoint relation failures"
        ),
    ))
}

type Criterion = (&'static str, fn() -> Result<Outcome>, Duration);

fn main() {
    let criteria: [Criterion; 11] = [
        (
            "closed-form band skeleton",
            band_skeleton,
            Duration::from_secs(5),
        ),
        ("resonance gap", resonance_gap, Duration::from_secs(5)),
        (
            "large-energy asymptotics",
            asymptotics,
            Duration::from_secs(30),
        ),
        (
            "small-field expansions",
            small_field,
            Duration::from_secs(30),
        ),
        (
            "field periodicity and symmetry",
            periodicity,
            Duration::from_secs(60),
        ),
        ("gap monotonicity", monotonicity, Duration::from_secs(60)),
        ("monodromy identities", monodromy, Duration::from_secs(30)),
        (
            "finite-difference Floquet oracle",
            floquet_fd,
            Duration::from_secs(120),
        ),
        ("flat bands", flat_bands, Duration::from_secs(10)),
        (
            "field-independent delta gaps",
            delta_gaps,
            Duration::from_secs(30),
        ),
        ("multiplicity map", multiplicity, Duration::from_secs(30)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed && elapsed <= *budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!passed);
        println!(
            "criterion {:>2} {}: {} ({detail}; {:.1} s of {} s)",
            i + 1,
            name,
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
