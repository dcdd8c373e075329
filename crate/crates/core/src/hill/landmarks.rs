use rayon::prelude::*;

use super::{HillSolver, HillValues};
use crate::error::{Error, Result};
use crate::roots::{self, lambda_of, x_of, Boundary, Walker};

/// Default spacing of the scan grid in `x = sqrt(lambda)`.
pub const SCAN_DX: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub x: f64,
    pub values: HillValues,
}

/// `-F F'` at both ends of the Hill gap `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveMass {
    pub n: usize,
    pub minus: f64,
    pub plus: f64,
}

/// Dirichlet eigenvalues, zeros of `F`, and Hill band edges, all in `lambda`.
///
/// `dirichlet[i]`, `eta[i]` and `edges[i]` carry index `n = i + 1`; `edges`
/// holds `(lower, upper)` ends of the closed Hill gaps around each `mu_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HillLandmarks {
    pub ground: f64,
    pub ground_mass: f64,
    pub dirichlet: Vec<f64>,
    pub eta: Vec<f64>,
    pub edges: Vec<(f64, f64)>,
    pub masses: Vec<EffectiveMass>,
}

impl HillLandmarks {
    pub fn gap_is_open(&self, n: usize) -> bool {
        let (lo, hi) = self.edges[n - 1];
        hi - lo > gap_tol(lo)
    }

    /// Hill bands `[upper edge of gap n-1, lower edge of gap n]`.
    pub fn bands(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.edges.len() + 1);
        let mut lo = self.ground;
        for &(a, b) in &self.edges {
            out.push((lo, a));
            lo = b;
        }
        out
    }
}

pub(crate) fn gap_tol(lambda: f64) -> f64 {
    1e-10 * lambda.abs().max(1.0)
}

/// Tabulated Hill data on a uniform `x` grid plus the landmarks found on it.
#[derive(Debug, Clone)]
pub struct HillScan {
    solver: HillSolver,
    pub x_max: f64,
    pub dx: f64,
    pub points: Vec<ScanPoint>,
    pub landmarks: HillLandmarks,
    pub(crate) xs: Vec<f64>,
    pub(crate) ground_x: f64,
    pub(crate) eta_x: Vec<f64>,
    pub(crate) mu_x: Vec<f64>,
    pub(crate) edges_x: Vec<(f64, f64)>,
}

impl HillScan {
    pub fn new(solver: HillSolver, x_max: f64) -> Result<Self> {
        Self::with_step(solver, x_max, SCAN_DX)
    }

    /// Retries with a halved step, at most twice, when counts disagree with
    /// the interlacing bounds.
    pub fn with_step(solver: HillSolver, x_max: f64, dx: f64) -> Result<Self> {
        if !(x_max.is_finite() && x_max > 0.0 && dx > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scan needs x_max > 0 and dx > 0 (got {x_max}, {dx})"
            )));
        }
        let mut dx = dx;
        let mut attempt = 0;
        loop {
            match Self::build(solver.clone(), x_max, dx) {
                Err(Error::CountMismatch { .. }) if attempt < 2 => {
                    attempt += 1;
                    dx *= 0.5;
                }
                other => return other,
            }
        }
    }

    pub fn solver(&self) -> &HillSolver {
        &self.solver
    }

    pub fn lambda_max(&self) -> f64 {
        self.x_max * self.x_max
    }

    pub fn eval_x(&self, x: f64) -> Result<HillValues> {
        self.solver.values_at_x(x)
    }

    /// Tabulates `f` over the scan grid.
    pub(crate) fn tabulate(&self, f: impl Fn(&HillValues) -> f64) -> Vec<f64> {
        self.points.iter().map(|p| f(&p.values)).collect()
    }

    fn build(solver: HillSolver, x_max: f64, dx: f64) -> Result<Self> {
        let q = solver.potential().clone();
        let mut floor = q.spectral_floor();
        for _ in 0..60 {
            if solver.values(floor)?.f > 1.0 {
                break;
            }
            floor -= floor.abs() + 1.0;
        }
        let x_start = x_of(floor);
        if x_start >= x_max {
            return Err(Error::InvalidArgument(format!(
                "x_max = {x_max} lies below the spectrum"
            )));
        }
        let steps = ((x_max - x_start) / dx).floor() as usize;
        let mut xs: Vec<f64> = (0..=steps).map(|i| x_start + dx * i as f64).collect();
        if x_max - xs[steps] > 1e-9 * dx {
            xs.push(x_max);
        }
        let values: Vec<HillValues> = xs
            .par_iter()
            .map(|&x| solver.values_at_x(x))
            .collect::<Result<_>>()?;

        let eval = |x: f64| solver.values_at_x(x);
        let fs: Vec<f64> = values.iter().map(|v| v.f).collect();
        let eta_x = roots::grid_roots(&xs, &fs, &mut |x| eval(x).map(|v| v.f))?;
        let phis: Vec<f64> = values.iter().map(|v| v.phi).collect();
        let mu_x = roots::grid_roots(&xs, &phis, &mut |x| eval(x).map(|v| v.phi))?;

        check_counts(&q, x_max, eta_x.len(), mu_x.len())?;
        if eta_x.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "x_max = {x_max} does not reach the first band"
            )));
        }

        // Ground state: where F rises through 1 left of the first zero of F.
        let ones: Vec<f64> = fs.iter().map(|f| 1.0 - f).collect();
        let mut w = Walker::new(&xs, &ones, |x: f64| eval(x).map(|v| 1.0 - v.f));
        let f_eta = 1.0 - eval(eta_x[0])?.f;
        let ground_x = match w.boundary(eta_x[0], f_eta, -1, f64::NEG_INFINITY)? {
            Boundary::Root(x) => x,
            _ => w.extend_left(xs[0], ones[0])?.ok_or_else(|| {
                Error::InternalInconsistency("no ground state below the first band".into())
            })?,
        };

        let sq: Vec<f64> = fs.iter().map(|f| f * f - 1.0).collect();
        let mut w = Walker::new(&xs, &sq, |x: f64| eval(x).map(|v| v.f * v.f - 1.0));
        let mut edges_x = Vec::new();
        for (i, &mu) in mu_x.iter().enumerate() {
            let lo = eta_x[i];
            let hi = eta_x.get(i + 1).copied().unwrap_or(x_max);
            if !(lo < mu && mu < hi) {
                return Err(Error::CountMismatch {
                    what: "Dirichlet interlacing".into(),
                    found: i + 1,
                    expected: format!("mu in ({}, {})", lambda_of(lo), lambda_of(hi)),
                });
            }
            match w.component(mu, (lo, hi))? {
                Some(c) if c.hi < x_max => edges_x.push((c.lo, c.hi)),
                _ => break,
            }
        }

        let ground = lambda_of(ground_x);
        let edges: Vec<(f64, f64)> = edges_x
            .iter()
            .map(|&(a, b)| (lambda_of(a), lambda_of(b)))
            .collect();
        let mass =
            |l: f64| -> Result<f64> { Ok(-solver.values(l)?.f * solver.f_derivative(l, 1)?) };
        let mut masses = Vec::new();
        for (i, &(a, b)) in edges.iter().enumerate() {
            if b - a > gap_tol(a) {
                masses.push(EffectiveMass {
                    n: i + 1,
                    minus: mass(a)?,
                    plus: mass(b)?,
                });
            }
        }
        let landmarks = HillLandmarks {
            ground,
            ground_mass: mass(ground)?,
            dirichlet: mu_x.iter().map(|&x| lambda_of(x)).collect(),
            eta: eta_x.iter().map(|&x| lambda_of(x)).collect(),
            edges,
            masses,
        };
        let points = xs
            .iter()
            .zip(values)
            .map(|(&x, values)| ScanPoint { x, values })
            .collect();
        Ok(HillScan {
            solver,
            x_max,
            dx,
            points,
            landmarks,
            xs,
            ground_x,
            eta_x,
            mu_x,
            edges_x,
        })
    }
}

/// Dirichlet counts must stay within the shifts allowed by bounded
/// perturbations and by one rank-one term per point interaction.
fn check_counts(q: &super::Potential, x_max: f64, n_eta: usize, n_mu: usize) -> Result<()> {
    let lmax = x_max * x_max;
    let free = |e: f64| (e.max(0.0).sqrt() / std::f64::consts::PI).floor() as usize;
    let (inf, sup) = q.range();
    let j = q.delta_count();
    let lo = free(lmax - sup).saturating_sub(j + 1);
    let hi = free(lmax - inf) + j + 1;
    if n_mu < lo || n_mu > hi {
        return Err(Error::CountMismatch {
            what: "Dirichlet eigenvalues".into(),
            found: n_mu,
            expected: format!("{lo}..={hi}"),
        });
    }
    if n_eta.abs_diff(n_mu) > 1 {
        return Err(Error::CountMismatch {
            what: "zeros of F".into(),
            found: n_eta,
            expected: format!("{} +/- 1", n_mu),
        });
    }
    Ok(())
}
