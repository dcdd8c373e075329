//! Compactly supported eigenfunctions at Dirichlet energies.
//!
//! At a Dirichlet eigenvalue `mu` every eigenfunction vanishes at the vertices,
//! so on each edge it is a multiple `C_{n,j} phi(., mu)` of the Dirichlet
//! solution. Functions here work with those per-edge coefficients.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hill::HillSolver;
use crate::lyapunov::{ChannelParams, TRIG_ZERO};

/// Largest `|phi(1, mu)|` accepted as a Dirichlet eigenvalue.
pub const DIRICHLET_TOL: f64 = 1e-9;
/// Tolerance on `|phi'(1, mu)^2 - 1|` for the degenerate branch.
pub const PHI_SQUARED_TOL: f64 = 1e-9;

/// Boundary data of one edge function: values and derivatives at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EdgeData {
    pub v0: Complex64,
    pub v1: Complex64,
    pub d0: Complex64,
    pub d1: Complex64,
}

impl EdgeData {
    fn scaled(&self, z: Complex64) -> Self {
        EdgeData {
            v0: self.v0 * z,
            v1: self.v1 * z,
            d0: self.d0 * z,
            d1: self.d1 * z,
        }
    }

    fn add(&mut self, o: &EdgeData) {
        self.v0 += o.v0;
        self.v1 += o.v1;
        self.d0 += o.d0;
        self.d1 += o.d1;
    }
}

/// Edge data keyed by `(n, j)`; absent edges carry the zero function.
pub type EdgeMap = BTreeMap<(i64, u8), EdgeData>;

#[derive(Debug, Clone, PartialEq)]
pub struct CompactEigenfunction {
    pub nu: u8,
    pub channel: ChannelParams,
    pub mu: f64,
    /// `phi'(1, mu)`.
    pub phi: f64,
    /// `phi(1, mu)`, zero up to the accuracy of `mu`.
    pub phi_end: f64,
    pub kappa1: Complex64,
    pub kappa2: Complex64,
    /// Nonzero coefficients only.
    pub coeffs: BTreeMap<(i64, u8), Complex64>,
    pub degenerate: bool,
}

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

/// `s^k = exp(2 pi i k / N)`.
pub fn s_power(ch: &ChannelParams) -> Complex64 {
    cis(2.0 * PI * ch.k as f64 / ch.n_around as f64)
}

/// `(kappa1, kappa2) = (1 - s^k e^{2ia} phi^2, 1 - s^k e^{2ia} phi^4)`.
pub fn kappa_tilde(ch: &ChannelParams, phi: f64) -> (Complex64, Complex64) {
    let s = s_power(ch) * cis(2.0 * ch.a());
    let p2 = phi * phi;
    (1.0 - s * p2, 1.0 - s * p2 * p2)
}

/// Whether `(s_k, phi^2) = (0, 1)`.
pub fn is_degenerate(ch: &ChannelParams, phi: f64) -> bool {
    ch.s().abs() <= TRIG_ZERO && (phi * phi - 1.0).abs() <= PHI_SQUARED_TOL
}

pub fn build_compact_eigenfunction(
    solver: &HillSolver,
    ch: &ChannelParams,
    mu: f64,
    nu: u8,
) -> Result<CompactEigenfunction> {
    if !(nu == 1 || nu == 2) {
        return Err(Error::InvalidArgument(format!(
            "branch nu must be 1 or 2 (got {nu})"
        )));
    }
    let v = solver.values(mu)?;
    if v.phi.abs() > DIRICHLET_TOL {
        return Err(Error::NotAnEigenvalue {
            mu,
            residual: v.phi.abs(),
        });
    }
    let phi = v.phi_d;
    let (kappa1, kappa2) = kappa_tilde(ch, phi);
    let degenerate = is_degenerate(ch, phi);
    let (a1, a2, a) = (ch.phases.a1, ch.phases.a2, ch.a());
    let sk = s_power(ch);
    let p = Complex64::from(phi);
    let p2 = phi * phi;

    let entries: Vec<((i64, u8), Complex64)> = if degenerate {
        if nu == 1 {
            let c04 = p * cis(a + a1);
            vec![
                ((0, 1), Complex64::from(1.0)),
                ((0, 3), cis(a)),
                ((0, 4), c04),
                ((0, 5), p * cis(a1)),
                ((0, 6), -cis(a)),
                ((1, 4), -c04),
            ]
        } else {
            vec![
                ((0, 2), Complex64::from(1.0)),
                ((0, 5), Complex64::from(-1.0)),
                ((0, 6), p * cis(a2)),
                ((1, 4), cis(a)),
            ]
        }
    } else {
        if kappa1.norm() <= TRIG_ZERO || kappa2.norm() <= TRIG_ZERO {
            return Err(Error::InternalInconsistency(format!(
                "kappa vanishes off the degenerate branch (|kappa1| = {:.3e}, |kappa2| = {:.3e})",
                kappa1.norm(),
                kappa2.norm()
            )));
        }
        if nu == 1 {
            vec![
                ((0, 2), -kappa2),
                ((0, 5), kappa2),
                ((0, 6), -p * cis(a2) * kappa2),
                ((1, 1), p * cis(-a1) * kappa1),
                ((1, 2), p2 * kappa1),
                ((1, 3), p * p2 * cis(a2) * kappa1),
                ((1, 4), p2 * (p2 - 1.0) * cis(a)),
            ]
        } else {
            vec![
                ((0, 1), sk * p2 * cis(a2) * kappa1),
                ((0, 2), sk * p * (p2 - 1.0) * cis(a)),
                ((0, 3), cis(-a1) * kappa1),
                ((0, 4), p * kappa1),
                ((0, 5), sk * p * cis(a) * kappa2),
                ((0, 6), -cis(-a1) * kappa2),
                ((1, 4), -p * kappa2),
            ]
        }
    };
    let coeffs = entries
        .into_iter()
        .filter(|(_, c)| *c != Complex64::from(0.0))
        .collect();
    Ok(CompactEigenfunction {
        nu,
        channel: *ch,
        mu,
        phi,
        phi_end: v.phi,
        kappa1,
        kappa2,
        coeffs,
        degenerate,
    })
}

impl CompactEigenfunction {
    pub fn coefficient(&self, n: i64, j: u8) -> Complex64 {
        self.coeffs.get(&(n, j)).copied().unwrap_or_default()
    }

    /// The copy supported on cells `{m, m + 1}`.
    pub fn translated(&self, m: i64) -> Self {
        let mut out = self.clone();
        out.coeffs = self
            .coeffs
            .iter()
            .map(|(&(n, j), &c)| ((n + m, j), c))
            .collect();
        out
    }

    pub fn edge_data(&self) -> EdgeMap {
        self.coeffs
            .iter()
            .map(|(&key, &c)| {
                let d = EdgeData {
                    v0: Complex64::from(0.0),
                    v1: c * self.phi_end,
                    d0: c,
                    d1: c * self.phi,
                };
                (key, d)
            })
            .collect()
    }

    /// Value on edge `(n, j)` at `t`.
    pub fn value(&self, solver: &HillSolver, n: i64, j: u8, t: f64) -> Result<Complex64> {
        let c = self.coefficient(n, j);
        if c == Complex64::from(0.0) {
            return Ok(c);
        }
        Ok(c * solver.transfer_to(self.mu, t)?[0][1])
    }
}

/// Linear combination of eigenfunctions as edge data.
pub fn superpose(terms: &[(Complex64, &CompactEigenfunction)]) -> EdgeMap {
    let mut out = EdgeMap::new();
    for (z, f) in terms {
        for (key, d) in f.edge_data() {
            out.entry(key).or_default().add(&d.scaled(*z));
        }
    }
    out
}

/// Largest absolute violation of the vertex conditions over every cell
/// touched by `data` (12 scalar conditions per cell).
pub fn kirchhoff_residual(data: &EdgeMap, ch: &ChannelParams) -> f64 {
    let (Some(&(lo, _)), Some(&(hi, _))) = (data.keys().next(), data.keys().next_back()) else {
        return 0.0;
    };
    let (a1, a2) = (ch.phases.a1, ch.phases.a2);
    let (e1, e2) = (cis(a1), cis(a2));
    let sk = s_power(ch);
    let get = |n: i64, j: u8| data.get(&(n, j)).copied().unwrap_or_default();
    let mut worst: f64 = 0.0;
    for n in lo..=hi + 1 {
        let f: Vec<EdgeData> = (1..=6).map(|j| get(n, j)).collect();
        let prev5 = get(n - 1, 5);
        let prev6 = get(n - 1, 6);
        let [f1, f2, f3, f4, f5, f6] = [f[0], f[1], f[2], f[3], f[4], f[5]];
        let conditions = [
            e1 * f1.v1 - f2.v0,
            f2.v0 - f5.v0,
            e2 * f2.v1 - f3.v0,
            f3.v0 - f6.v0,
            e1 * f3.v1 - f4.v0,
            f4.v0 - e1 * prev6.v1,
            e2 * sk * f4.v1 - f1.v0,
            f1.v0 - cis(-a1) * prev5.v1,
            e1 * f1.d1 - f2.d0 - f5.d0,
            e2 * f2.d1 - f3.d0 - f6.d0,
            e1 * f3.d1 - f4.d0 + e1 * prev6.d1,
            e2 * sk * f4.d1 - f1.d0 + cis(-a1) * prev5.d1,
        ];
        for c in conditions {
            worst = worst.max(c.norm());
        }
    }
    worst
}

/// Derivatives at `t = 0` that determine the expansion: `(f'_{n,5}, f'_{n,6})`
/// off the degenerate branch and `(f'_{n,1}, f'_{n,2})` on it.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryDerivatives {
    Regular(BTreeMap<i64, (Complex64, Complex64)>),
    Degenerate(BTreeMap<i64, (Complex64, Complex64)>),
}

impl BoundaryDerivatives {
    /// Extracts the relevant derivatives from full edge data.
    pub fn from_edges(data: &EdgeMap, degenerate: bool) -> Self {
        let (ja, jb) = if degenerate { (1, 2) } else { (5, 6) };
        let mut cells: BTreeMap<i64, (Complex64, Complex64)> = BTreeMap::new();
        for (&(n, j), d) in data {
            let e = cells.entry(n).or_default();
            if j == ja {
                e.0 = d.d0;
            } else if j == jb {
                e.1 = d.d0;
            }
        }
        if degenerate {
            BoundaryDerivatives::Degenerate(cells)
        } else {
            BoundaryDerivatives::Regular(cells)
        }
    }
}

/// Coefficients `f_hat_{n, nu}` of a flat-band eigenfunction in the basis
/// `psi^{(n, nu)}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpansionCoefficients {
    pub coeffs: BTreeMap<i64, (Complex64, Complex64)>,
}

impl ExpansionCoefficients {
    pub fn get(&self, n: i64) -> (Complex64, Complex64) {
        self.coeffs.get(&n).copied().unwrap_or_default()
    }

    /// Largest `|f_hat - expected|`, with `expected` zero outside its keys.
    pub fn max_deviation(&self, expected: &BTreeMap<i64, (Complex64, Complex64)>) -> f64 {
        let keys = self.coeffs.keys().chain(expected.keys());
        keys.map(|n| {
            let (a, b) = self.get(*n);
            let (x, y) = expected.get(n).copied().unwrap_or_default();
            (a - x).norm().max((b - y).norm())
        })
        .fold(0.0, f64::max)
    }
}

pub fn expansion_coefficients(
    input: &BoundaryDerivatives,
    ch: &ChannelParams,
    phi: f64,
) -> Result<ExpansionCoefficients> {
    let degenerate = is_degenerate(ch, phi);
    let coeffs = match (input, degenerate) {
        (BoundaryDerivatives::Degenerate(cells), true) => cells.clone(),
        (BoundaryDerivatives::Regular(cells), false) => {
            let (k1, k2) = kappa_tilde(ch, phi);
            let denom = k1 * k2;
            let (a1, a) = (ch.phases.a1, ch.a());
            let sk = s_power(ch);
            cells
                .iter()
                .map(|(&n, &(f5, f6))| {
                    let c1 = (f5 + sk * phi * cis(a + a1) * f6) / denom;
                    let c2 = -(cis(a1) * f6 + phi * cis(a) * f5) / denom;
                    (n, (c1, c2))
                })
                .collect()
        }
        _ => return Err(Error::WrongBranch),
    };
    Ok(ExpansionCoefficients { coeffs })
}
