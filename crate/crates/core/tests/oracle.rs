use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use armchair_core::geometry::MagneticPhases;
use armchair_core::hill::{HillSolver, Potential};
use armchair_core::lyapunov::{lyapunov_from, ChannelParams};
use armchair_core::oracle::{
    assemble_monodromy, fd_convergence_ratios, floquet_exact, floquet_fd_at, floquet_matrix,
    identity_residuals_at, random_samples, theta_grid, Check, SuiteRegistry, SuiteReport,
    VerificationSuite, VerifyConfig,
};

fn rough_solver() -> HillSolver {
    HillSolver::new(Potential::fourier(vec![0.2, 1.5, -0.8], vec![0.6]).unwrap())
}

struct Always;

impl VerificationSuite for Always {
    fn name(&self) -> &'static str {
        "always"
    }

    fn run(&self, _: &HillSolver, _: &VerifyConfig) -> armchair_core::Result<SuiteReport> {
        Ok(SuiteReport {
            suite: "always",
            checks: vec![Check::at_most("zero", 0.0, 1.0)],
        })
    }
}

#[test]
fn registry_lookup_and_extension() {
    let mut r = SuiteRegistry::default();
    assert_eq!(r.names(), ["monodromy", "traces", "floquet"]);
    assert!(r.get("nonsense").is_err());
    assert!(r.select("nonsense").is_err());
    r.register("always", || Arc::new(Always));
    r.register("always", || Arc::new(Always));
    assert_eq!(r.names().len(), 4);
    let all = r.select("all").unwrap();
    assert_eq!(
        all.iter().map(|s| s.name()).collect::<Vec<_>>(),
        ["monodromy", "traces", "floquet", "always"]
    );
    let report = r
        .get("always")
        .unwrap()
        .run(&rough_solver(), &VerifyConfig::default())
        .unwrap();
    assert!(report.passed());
}

#[test]
fn identity_suites_pass_on_a_rough_potential() {
    let r = SuiteRegistry::default();
    let config = VerifyConfig {
        samples: 20,
        n_around: 3,
        ..VerifyConfig::default()
    };
    for name in ["monodromy", "traces"] {
        let report = r.get(name).unwrap().run(&rough_solver(), &config).unwrap();
        assert!(report.passed(), "{report:?}");
    }
}

#[test]
fn samples_are_reproducible_and_avoid_dirichlet_energies() {
    let solver = rough_solver();
    let config = VerifyConfig {
        samples: 30,
        n_around: 4,
        ..VerifyConfig::default()
    };
    let a = random_samples(&solver, &config).unwrap();
    assert_eq!(a, random_samples(&solver, &config).unwrap());
    for (lambda, ch) in &a {
        assert!(*lambda < config.lambda_max && ch.k < 4);
        assert!(solver.values(*lambda).unwrap().phi.abs() >= 1e-4);
    }
}

#[test]
fn floquet_matrix_is_hermitian() {
    let q = Potential::fourier(vec![0.0, 1.0], vec![0.5]).unwrap();
    let ch = ChannelParams::new(1, 3, MagneticPhases::new(0.4, -0.2)).unwrap();
    let m = floquet_matrix(&q, &ch, 1.1, 60).unwrap();
    let worst = m
        .indexed_iter()
        .map(|((i, j), v)| (v - m[(j, i)].conj()).norm())
        .fold(0.0, f64::max);
    assert!(worst < 1e-9 * m.iter().map(|v| v.norm()).fold(0.0, f64::max));
}

#[test]
fn floquet_eigenvalues_match_the_branches() {
    let solver = HillSolver::new(Potential::fourier(vec![0.0, 1.0], vec![]).unwrap());
    let ch = ChannelParams::from_a(1, 2, 0.3).unwrap();
    for theta in theta_grid(5) {
        let exact = floquet_exact(&solver, &ch, theta, 60.0).unwrap();
        assert!(!exact.is_empty());
        for &l in &exact {
            let hv = solver.values(l).unwrap();
            let branches = lyapunov_from(&hv, &ch).branches.as_complex();
            let hit =
                branches.iter().any(|f| (f - theta.cos()).norm() < 1e-7) || hv.phi.abs() < 1e-7;
            assert!(hit, "lambda = {l} at theta = {theta}");
        }
        let fd = floquet_fd_at(solver.potential(), &ch, theta, 300, 60.0)
            .unwrap()
            .eigenvalues;
        assert_eq!(fd.len(), exact.len());
        for (x, y) in fd.iter().zip(&exact) {
            assert!((x - y).abs() < 2e-3 * y.abs().max(1.0), "{x} vs {y}");
        }
    }
}

#[test]
fn second_order_convergence() {
    let solver = HillSolver::new(Potential::zero());
    let ch = ChannelParams::from_a(0, 2, 0.25).unwrap();
    let ratios = fd_convergence_ratios(&solver, &ch, PI / 3.0, 80, 5, 40.0).unwrap();
    assert_eq!(ratios.len(), 5);
    for r in ratios {
        assert!((3.5..=4.5).contains(&r), "ratio {r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn monodromy_identities(lambda in -2.0f64..300.0, n_around in 2usize..6, k in 0usize..6, a1 in -PI..PI, a2 in -PI..PI) {
        let solver = rough_solver();
        prop_assume!(solver.values(lambda).unwrap().phi.abs() > 1e-3);
        let ch = ChannelParams::new(k % n_around, n_around, MagneticPhases::new(a1, a2)).unwrap();
        let r = identity_residuals_at(&solver, &ch, lambda).unwrap();
        prop_assert!(r.max() < 1e-8, "{:?}", r);

        // Characteristic polynomial rebuilt from the two Lyapunov branches.
        let m = assemble_monodromy(&solver, &ch, lambda).unwrap();
        let f = lyapunov_from(&m.hill, &ch).branches.as_complex();
        for tau in [Complex64::new(0.5, 0.0), Complex64::new(-1.0, 2.0)] {
            let expected = (tau * tau - 2.0 * f[0] * tau + 1.0) * (tau * tau - 2.0 * f[1] * tau + 1.0);
            let got = m.char_poly(tau).unwrap();
            prop_assert!((got - expected).norm() <= 1e-8 * expected.norm().max(1.0));
        }
        let mut taus: Vec<Complex64> = m.eigenvalues().unwrap().to_vec();
        let product = taus.iter().fold(Complex64::new(1.0, 0.0), |p, t| p * t);
        prop_assert!((product - 1.0).norm() < 1e-8);
        taus.sort_by(|x, y| x.norm().total_cmp(&y.norm()));
        prop_assert!((taus[0].norm() * taus[3].norm() - 1.0).abs() < 1e-6);
    }
}
