//! Independent checks of the spectral computations: the period map assembled
//! numerically from the vertex conditions, and a finite-difference
//! discretisation of the periodic graph. Checks are bundled into named suites.

mod floquet;
mod monodromy;

use std::f64::consts::PI;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub use floquet::{
    floquet_exact, floquet_fd_at, floquet_fd_spectrum, floquet_matrix, theta_grid, FloquetSpectrum,
    MIN_POINTS,
};
pub use monodromy::{
    assemble_monodromy, identity_residuals_at, lyapunov_char_poly, monodromy_identity_residuals,
    symplectic_form, IdentityResiduals, MonodromyMatrix, MAX_CONDITION,
};

use crate::error::{Error, Result};
use crate::geometry::MagneticPhases;
use crate::hill::{HillScan, HillSolver};
use crate::lyapunov::ChannelParams;
use crate::spectrum::SpectralContext;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub n_around: usize,
    pub phases: MagneticPhases,
    /// Random `(lambda, k, a)` samples for the monodromy and trace suites.
    pub samples: usize,
    pub seed: u64,
    /// Upper end of the sampled energies.
    pub lambda_max: f64,
    pub identity_tol: f64,
    /// Intervals per edge for the band containment check.
    pub fd_points: usize,
    /// Coarse grid of the convergence check; the fine grid doubles it.
    pub fd_ratio_points: usize,
    pub fd_thetas: usize,
    /// FD eigenvalues are compared with the bands only up to here.
    pub fd_lambda_max: f64,
    pub fd_band_tol: f64,
    pub fd_ratio: (f64, f64),
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n_around: 2,
            phases: MagneticPhases::new(0.0, 0.0),
            samples: 50,
            seed: 7,
            lambda_max: 400.0,
            identity_tol: 1e-8,
            fd_points: 200,
            fd_ratio_points: 100,
            fd_thetas: 16,
            fd_lambda_max: 30.0,
            fd_band_tol: 5e-3,
            fd_ratio: (3.5, 4.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub trait VerificationSuite: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, solver: &HillSolver, config: &VerifyConfig) -> Result<SuiteReport>;
}

/// Random energies, channels and total phases avoiding the Dirichlet spectrum.
pub fn random_samples(
    solver: &HillSolver,
    config: &VerifyConfig,
) -> Result<Vec<(f64, ChannelParams)>> {
    let mut rng = StdRng::seed_from_u64(config.seed);
    let floor = solver.potential().spectral_floor();
    let mut out = Vec::with_capacity(config.samples);
    let mut tries = 0;
    while out.len() < config.samples {
        tries += 1;
        if tries > 100 * config.samples.max(1) {
            return Err(Error::InternalInconsistency(
                "could not draw samples away from the Dirichlet spectrum".into(),
            ));
        }
        let lambda = rng.random_range(floor..config.lambda_max);
        if solver.values(lambda)?.phi.abs() < 1e-4 {
            continue;
        }
        let k = rng.random_range(0..config.n_around);
        let a1 = rng.random_range(-PI..PI);
        let a2 = rng.random_range(-PI..PI);
        out.push((
            lambda,
            ChannelParams::new(k, config.n_around, MagneticPhases::new(a1, a2))?,
        ));
    }
    Ok(out)
}

fn sampled_residuals(solver: &HillSolver, config: &VerifyConfig) -> Result<IdentityResiduals> {
    let samples = random_samples(solver, config)?;
    let mut total = IdentityResiduals::default();
    for (lambda, ch) in samples {
        let r = monodromy_identity_residuals(solver, &ch, &[lambda])?;
        total = total.merge(r);
    }
    Ok(total)
}

/// Determinant, symplectic relation and eigenvalue pairing.
pub struct MonodromySuite;

impl VerificationSuite for MonodromySuite {
    fn name(&self) -> &'static str {
        "monodromy"
    }

    fn run(&self, solver: &HillSolver, config: &VerifyConfig) -> Result<SuiteReport> {
        let r = sampled_residuals(solver, config)?;
        let tol = config.identity_tol;
        Ok(SuiteReport {
            suite: self.name(),
            checks: vec![
                Check::at_most("det", r.det, tol),
                Check::at_most("symplectic", r.symplectic, tol),
                Check::at_most("pairing", r.pairing, tol),
            ],
        })
    }
}

/// Trace identities and the characteristic polynomial.
pub struct TracesSuite;

impl VerificationSuite for TracesSuite {
    fn name(&self) -> &'static str {
        "traces"
    }

    fn run(&self, solver: &HillSolver, config: &VerifyConfig) -> Result<SuiteReport> {
        let r = sampled_residuals(solver, config)?;
        let tol = config.identity_tol;
        let checks = r
            .entries()
            .into_iter()
            .filter(|(name, _)| name.starts_with("trace") || name.starts_with("char_poly"))
            .map(|(name, v)| Check::at_most(name, v, tol))
            .collect();
        Ok(SuiteReport {
            suite: self.name(),
            checks,
        })
    }
}

/// Worst distance from `x` to the union of `bands` and `points`.
fn distance_to_spectrum(x: f64, bands: &[(f64, f64)], points: &[f64]) -> f64 {
    let b = bands.iter().map(|&(lo, hi)| (lo - x).max(x - hi).max(0.0));
    let p = points.iter().map(|&p| (p - x).abs());
    b.chain(p).fold(f64::INFINITY, f64::min)
}

/// Error ratios `(l_m - l) / (l_{2m} - l)` for the lowest `count`
/// eigenvalues, against the exact Floquet eigenvalues.
pub fn fd_convergence_ratios(
    solver: &HillSolver,
    ch: &ChannelParams,
    theta: f64,
    m: usize,
    count: usize,
    lambda_max: f64,
) -> Result<Vec<f64>> {
    let q = solver.potential();
    let exact = floquet_exact(solver, ch, theta, lambda_max)?;
    let coarse = floquet_fd_at(q, ch, theta, m, lambda_max)?.eigenvalues;
    let fine = floquet_fd_at(q, ch, theta, 2 * m, lambda_max)?.eigenvalues;
    let n = count.min(exact.len()).min(coarse.len()).min(fine.len());
    Ok((0..n)
        .map(|i| (coarse[i] - exact[i]) / (fine[i] - exact[i]))
        .collect())
}

/// Finite-difference eigenvalues against the computed bands.
pub struct FloquetSuite;

impl VerificationSuite for FloquetSuite {
    fn name(&self) -> &'static str {
        "floquet"
    }

    fn run(&self, solver: &HillSolver, config: &VerifyConfig) -> Result<SuiteReport> {
        let x_max = config.fd_lambda_max.max(1.0).sqrt() + 2.0 * PI;
        let scan = HillScan::new(solver.clone(), x_max)?;
        let ctx = SpectralContext::new(&scan)?;
        let thetas = theta_grid(config.fd_thetas);
        let q = solver.potential();
        let flat = &scan.landmarks.dirichlet;
        let mu1 = flat
            .first()
            .copied()
            .filter(|&mu| mu <= config.fd_lambda_max);
        let mut worst: f64 = 0.0;
        let mut flat_miss: f64 = 0.0;
        let mut count = 0;
        for ch in ChannelParams::all(config.n_around, config.phases)? {
            let bands = ctx.channel(&ch)?.bands(scan.lambda_max());
            for spec in
                floquet_fd_spectrum(q, &ch, &thetas, config.fd_points, config.fd_lambda_max)?
            {
                for &l in &spec.eigenvalues {
                    worst = worst.max(distance_to_spectrum(l, &bands, flat));
                    count += 1;
                }
                if let Some(mu) = mu1 {
                    let d = spec
                        .eigenvalues
                        .iter()
                        .map(|l| (l - mu).abs())
                        .fold(f64::INFINITY, f64::min);
                    flat_miss = flat_miss.max(d);
                }
            }
        }
        // Convergence order is measured on the free operator.
        let free = HillSolver::new(crate::hill::Potential::zero());
        let ch0 = ChannelParams::new(0, config.n_around, config.phases)?;
        let ratios = fd_convergence_ratios(
            &free,
            &ch0,
            PI / 3.0,
            config.fd_ratio_points,
            5,
            config.fd_lambda_max,
        )?;
        let (lo, hi) = config.fd_ratio;
        let bad = ratios.iter().filter(|r| !(lo..=hi).contains(*r)).count();
        let ratio_spread = ratios.iter().map(|r| (r - 4.0).abs()).fold(0.0, f64::max);
        Ok(SuiteReport {
            suite: self.name(),
            checks: vec![
                Check::at_most(
                    format!("band_distance ({count} eigenvalues)"),
                    worst,
                    config.fd_band_tol,
                ),
                Check::at_most("flat_band_mu1", flat_miss, config.fd_band_tol),
                Check {
                    name: format!(
                        "convergence_ratio_free ({} of {} outside [{lo}, {hi}])",
                        bad,
                        ratios.len()
                    ),
                    value: ratio_spread,
                    tolerance: 0.5 * (hi - lo),
                    passed: bad == 0 && !ratios.is_empty(),
                },
            ],
        })
    }
}

type Factory = fn() -> Arc<dyn VerificationSuite>;

/// Verification suites by name.
pub struct SuiteRegistry {
    entries: Vec<(&'static str, Factory)>,
}

impl Default for SuiteRegistry {
    fn default() -> Self {
        let mut r = SuiteRegistry {
            entries: Vec::new(),
        };
        r.register("monodromy", || Arc::new(MonodromySuite));
        r.register("traces", || Arc::new(TracesSuite));
        r.register("floquet", || Arc::new(FloquetSuite));
        r
    }
}

impl SuiteRegistry {
    pub fn register(&mut self, name: &'static str, factory: Factory) {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, factory));
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn VerificationSuite>> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, f)| f())
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown suite '{name}' (known: {})",
                    self.names().join(", ")
                ))
            })
    }

    /// One suite by name, or every registered suite for `"all"`.
    pub fn select(&self, name: &str) -> Result<Vec<Arc<dyn VerificationSuite>>> {
        if name == "all" {
            Ok(self.entries.iter().map(|(_, f)| f()).collect())
        } else {
            Ok(vec![self.get(name)?])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_selects_by_name() {
        let r = SuiteRegistry::default();
        assert_eq!(r.names(), vec!["monodromy", "traces", "floquet"]);
        assert_eq!(r.select("all").unwrap().len(), 3);
        assert_eq!(r.get("traces").unwrap().name(), "traces");
        assert!(r.get("spectral").is_err());
    }

    #[test]
    fn distance_to_union() {
        let bands = [(0.0, 1.0), (2.0, 3.0)];
        assert_eq!(distance_to_spectrum(0.5, &bands, &[]), 0.0);
        assert!((distance_to_spectrum(1.4, &bands, &[1.5]) - 0.1).abs() < 1e-12);
    }
}
