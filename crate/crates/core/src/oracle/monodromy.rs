use ndarray::{Array1, Array2};
use ndarray_linalg::{Determinant, EigVals, Factorize, Solve, SVD};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::MagneticPhases;
use crate::hill::{HillSolver, HillValues};
use crate::lyapunov::{lyapunov_from, ChannelParams};

/// Largest condition number of the cell system before it is refused.
pub const MAX_CONDITION: f64 = 1e12;

type C = Complex64;

fn cis(x: f64) -> C {
    C::from_polar(1.0, x)
}

/// Period map of one channel in the basis `(y5, y6, y5', y6')` at `t = 1`.
#[derive(Debug, Clone)]
pub struct MonodromyMatrix {
    pub lambda: f64,
    pub channel: ChannelParams,
    pub entries: Array2<C>,
    /// Condition number of the 12x12 cell system it was solved from.
    pub condition: f64,
    pub hill: HillValues,
}

fn rel(l: C, r: C) -> f64 {
    (l - r).norm() / 1f64.max(l.norm()).max(r.norm())
}

impl MonodromyMatrix {
    pub fn trace(&self) -> C {
        self.entries.diag().sum()
    }

    pub fn trace_of_square(&self) -> C {
        self.entries.dot(&self.entries).diag().sum()
    }

    pub fn det(&self) -> Result<C> {
        self.entries
            .det()
            .map_err(|e| Error::EigenSolver(e.to_string()))
    }

    pub fn eigenvalues(&self) -> Result<Array1<C>> {
        self.entries
            .eigvals()
            .map_err(|e| Error::EigenSolver(e.to_string()))
    }

    /// `det(M - tau I)`.
    pub fn char_poly(&self, tau: C) -> Result<C> {
        let mut m = self.entries.clone();
        for i in 0..4 {
            m[[i, i]] -= tau;
        }
        m.det().map_err(|e| Error::EigenSolver(e.to_string()))
    }

    /// Largest entry of `M^T J M - J`, scaled by the largest entry of `M^T J M`.
    pub fn symplectic_residual(&self) -> f64 {
        let j = symplectic_form();
        let lhs = self.entries.t().dot(&j).dot(&self.entries);
        let scale = lhs.iter().map(|z| z.norm()).fold(1.0, f64::max);
        lhs.iter()
            .zip(j.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / scale
    }
}

/// `J = [[0, j], [-j, 0]]` with `j = [[0, 1], [1, 0]]`.
pub fn symplectic_form() -> Array2<C> {
    let mut j = Array2::zeros((4, 4));
    j[[0, 3]] = C::from(1.0);
    j[[1, 2]] = C::from(1.0);
    j[[2, 1]] = C::from(-1.0);
    j[[3, 0]] = C::from(-1.0);
    j
}

/// Solves the Kirchhoff conditions of one cell for each of the four unit
/// boundary data of the previous cell.
pub fn assemble_monodromy(
    solver: &HillSolver,
    ch: &ChannelParams,
    lambda: f64,
) -> Result<MonodromyMatrix> {
    let hv = solver.values(lambda)?;
    let (th, thd, ph, phd) = (
        C::from(hv.theta),
        C::from(hv.theta_d),
        C::from(hv.phi),
        C::from(hv.phi_d),
    );
    let (a1, a2) = (ch.phases.a1, ch.phases.a2);
    let (e1, e2) = (cis(a1), cis(a2));
    let sk = cis(2.0 * std::f64::consts::PI * ch.k as f64 / ch.n_around as f64);
    let one = C::from(1.0);

    // Unknowns: A_j at index 2(j-1), B_j at 2(j-1)+1.
    let a = |j: usize| 2 * (j - 1);
    let b = |j: usize| 2 * (j - 1) + 1;
    let mut m = Array2::<C>::zeros((12, 12));
    let mut row = 0;
    let mut set = |r: usize, entries: &[(usize, C)]| {
        for &(c, v) in entries {
            m[[r, c]] += v;
        }
    };
    // Vertex shared with the previous cell's edge 6.
    set(row, &[(a(4), one)]);
    row += 1;
    set(row, &[(a(3), e1 * th), (b(3), e1 * ph), (a(4), -one)]);
    row += 1;
    set(row, &[(a(3), e1 * thd), (b(3), e1 * phd), (b(4), -one)]);
    row += 1;
    // Vertex shared with the previous cell's edge 5.
    set(row, &[(a(1), one)]);
    row += 1;
    set(
        row,
        &[(a(4), e2 * sk * th), (b(4), e2 * sk * ph), (a(1), -one)],
    );
    row += 1;
    set(
        row,
        &[(a(4), e2 * sk * thd), (b(4), e2 * sk * phd), (b(1), -one)],
    );
    row += 1;
    // Internal vertices.
    set(row, &[(a(1), e1 * th), (b(1), e1 * ph), (a(2), -one)]);
    row += 1;
    set(row, &[(a(2), one), (a(5), -one)]);
    row += 1;
    set(
        row,
        &[
            (a(1), e1 * thd),
            (b(1), e1 * phd),
            (b(2), -one),
            (b(5), -one),
        ],
    );
    row += 1;
    set(row, &[(a(2), e2 * th), (b(2), e2 * ph), (a(3), -one)]);
    row += 1;
    set(row, &[(a(3), one), (a(6), -one)]);
    row += 1;
    set(
        row,
        &[
            (a(2), e2 * thd),
            (b(2), e2 * phd),
            (b(3), -one),
            (b(6), -one),
        ],
    );

    let (_, sv, _) = m
        .svd(false, false)
        .map_err(|e| Error::EigenSolver(e.to_string()))?;
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if condition > MAX_CONDITION {
        return Err(Error::NearDirichletSingularity(condition));
    }
    let lu = m
        .factorize()
        .map_err(|e| Error::EigenSolver(e.to_string()))?;

    let mut out = Array2::<C>::zeros((4, 4));
    for col in 0..4 {
        // Boundary data (y5, y6, y5', y6') of the previous cell at t = 1.
        let mut y = [C::from(0.0); 4];
        y[col] = one;
        let mut rhs = Array1::<C>::zeros(12);
        rhs[0] = e1 * y[1];
        rhs[2] = -e1 * y[3];
        rhs[3] = cis(-a1) * y[0];
        rhs[5] = -cis(-a1) * y[2];
        let x = lu
            .solve(&rhs)
            .map_err(|e| Error::EigenSolver(e.to_string()))?;
        let (a5, b5, a6, b6) = (x[a(5)], x[b(5)], x[a(6)], x[b(6)]);
        out[[0, col]] = a5 * th + b5 * ph;
        out[[1, col]] = a6 * th + b6 * ph;
        out[[2, col]] = a5 * thd + b5 * phd;
        out[[3, col]] = a6 * thd + b6 * phd;
    }
    Ok(MonodromyMatrix {
        lambda,
        channel: *ch,
        entries: out,
        condition,
        hill: hv,
    })
}

/// Worst relative residuals of the monodromy identities over a set of energies.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IdentityResiduals {
    pub samples: usize,
    pub det: f64,
    pub symplectic: f64,
    /// `Tr M_0 = 2(9F^2 - F_-^2 - 1)` at `k = 0`, `a = 0`.
    pub trace_zero_field: f64,
    /// `Tr M_k = Tr M_0 - 4 s_k^2`.
    pub trace_shift: f64,
    /// `Tr M_0^2 = 72F^2 + (Tr M_0)^2 / 2 - 4`.
    pub trace_square_zero_field: f64,
    /// `Tr M_k^2 = Tr M_0^2 - 8 s_k^2 Tr M_0 - 16 s_k^2 c_k^2`.
    pub trace_square_shift: f64,
    /// Characteristic polynomial against the Lyapunov factorisation at `tau = 2, 1 + i`.
    pub char_poly: f64,
    /// Characteristic polynomial at `tau = 1` against `D_k^+`.
    pub char_poly_at_one: f64,
    /// `(tau + 1/tau) / 2` over the eigenvalues against `{F_1, F_2}`.
    pub pairing: f64,
}

impl IdentityResiduals {
    pub(crate) fn merge(self, o: Self) -> Self {
        IdentityResiduals {
            samples: self.samples + o.samples,
            det: self.det.max(o.det),
            symplectic: self.symplectic.max(o.symplectic),
            trace_zero_field: self.trace_zero_field.max(o.trace_zero_field),
            trace_shift: self.trace_shift.max(o.trace_shift),
            trace_square_zero_field: self.trace_square_zero_field.max(o.trace_square_zero_field),
            trace_square_shift: self.trace_square_shift.max(o.trace_square_shift),
            char_poly: self.char_poly.max(o.char_poly),
            char_poly_at_one: self.char_poly_at_one.max(o.char_poly_at_one),
            pairing: self.pairing.max(o.pairing),
        }
    }

    /// Named residuals, for reports.
    pub fn entries(&self) -> [(&'static str, f64); 9] {
        [
            ("det", self.det),
            ("symplectic", self.symplectic),
            ("trace_zero_field", self.trace_zero_field),
            ("trace_shift", self.trace_shift),
            ("trace_square_zero_field", self.trace_square_zero_field),
            ("trace_square_shift", self.trace_square_shift),
            ("char_poly", self.char_poly),
            ("char_poly_at_one", self.char_poly_at_one),
            ("pairing", self.pairing),
        ]
    }

    pub fn max(&self) -> f64 {
        self.entries().iter().map(|e| e.1).fold(0.0, f64::max)
    }
}

/// Closed-form `(tau^2 - 2F_1 tau + 1)(tau^2 - 2F_2 tau + 1)` from `xi` and `rho`.
pub fn lyapunov_char_poly(xi: f64, rho: f64, tau: C) -> C {
    let sum = 2.0 * xi;
    let prod = xi * xi - rho;
    let t2 = tau * tau;
    t2 * t2 - sum * 2.0 * t2 * tau + (2.0 + 4.0 * prod) * t2 - sum * 2.0 * tau + 1.0
}

fn pairing_residual(m: &MonodromyMatrix, f: [C; 2]) -> Result<f64> {
    let taus = m.eigenvalues()?;
    let mut targets = vec![f[0], f[0], f[1], f[1]];
    let mut worst: f64 = 0.0;
    for tau in taus.iter() {
        let v = 0.5 * (tau + 1.0 / tau);
        let (i, _) = targets
            .iter()
            .enumerate()
            .min_by(|x, y| (x.1 - v).norm().total_cmp(&(y.1 - v).norm()))
            .expect("four targets for four eigenvalues");
        worst = worst.max(rel(v, targets[i]));
        targets.swap_remove(i);
    }
    Ok(worst)
}

/// Identity residuals at one energy.
pub fn identity_residuals_at(
    solver: &HillSolver,
    ch: &ChannelParams,
    lambda: f64,
) -> Result<IdentityResiduals> {
    let mk = assemble_monodromy(solver, ch, lambda)?;
    let reference = ChannelParams::new(0, ch.n_around, MagneticPhases::new(0.0, 0.0))?;
    let m0 = assemble_monodromy(solver, &reference, lambda)?;
    let hv = mk.hill;
    let ly = lyapunov_from(&hv, ch);
    let (s2, c2) = (ch.s().powi(2), ch.c().powi(2));
    let (f, fm) = (hv.f, hv.f_minus);

    let tr0 = m0.trace();
    let tr0_sq = m0.trace_of_square();
    let trk = mk.trace();
    let trk_sq = mk.trace_of_square();
    let closed_tr0 = C::from(2.0 * (9.0 * f * f - fm * fm - 1.0));

    let mut char_poly: f64 = 0.0;
    for tau in [C::from(2.0), C::new(1.0, 1.0)] {
        char_poly = char_poly.max(rel(
            mk.char_poly(tau)?,
            lyapunov_char_poly(ly.xi, ly.rho, tau),
        ));
    }
    let d_plus = C::from(ly.d_plus);
    Ok(IdentityResiduals {
        samples: 1,
        det: rel(mk.det()?, C::from(1.0)),
        symplectic: mk.symplectic_residual(),
        trace_zero_field: rel(tr0, closed_tr0),
        trace_shift: rel(trk, tr0 - 4.0 * s2),
        trace_square_zero_field: rel(tr0_sq, 72.0 * f * f + 0.5 * tr0 * tr0 - 4.0),
        trace_square_shift: rel(trk_sq, tr0_sq - 8.0 * s2 * tr0 - 16.0 * s2 * c2),
        char_poly,
        char_poly_at_one: rel(mk.char_poly(C::from(1.0))?, d_plus),
        pairing: pairing_residual(&mk, ly.branches.as_complex())?,
    })
}

/// Worst residuals over `lambdas`, evaluated in parallel.
pub fn monodromy_identity_residuals(
    solver: &HillSolver,
    ch: &ChannelParams,
    lambdas: &[f64],
) -> Result<IdentityResiduals> {
    lambdas
        .par_iter()
        .map(|&l| identity_residuals_at(solver, ch, l))
        .try_reduce(IdentityResiduals::default, |a, b| Ok(a.merge(b)))
}
