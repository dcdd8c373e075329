use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hill::{HillSolver, Potential};
use crate::lyapunov::{lyapunov_from, Branches, ChannelParams};
use crate::roots::{bisect, lambda_of, x_of};

type C = Complex64;

/// Smallest accepted number of intervals per edge.
pub const MIN_POINTS: usize = 50;

fn cis(x: f64) -> C {
    C::from_polar(1.0, x)
}

/// FD eigenvalues of one channel at quasimomentum `theta`, sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetSpectrum {
    pub theta: f64,
    pub eigenvalues: Vec<f64>,
}

/// Symmetrically scaled cell operator, upper triangle only.
struct CellOperator {
    dim: usize,
    upper: BTreeMap<(usize, usize), C>,
}

impl CellOperator {
    fn bandwidth(&self) -> usize {
        self.upper.keys().map(|&(r, c)| c - r).max().unwrap_or(0)
    }

    fn dense(&self) -> Array2<C> {
        let mut a = Array2::zeros((self.dim, self.dim));
        for (&(r, c), &v) in &self.upper {
            a[[r, c]] = v;
            a[[c, r]] = v.conj();
        }
        a
    }

    /// Eigenvalues in `(lo, hi]` from LAPACK band storage.
    fn eigenvalues_in(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let n = self.dim;
        let kd = self.bandwidth();
        let ldab = kd + 1;
        let mut ab = vec![C::from(0.0); ldab * n];
        for (&(r, c), &v) in &self.upper {
            ab[c * ldab + kd + r - c] = v;
        }
        let mut found = 0i32;
        let mut w = vec![0.0; n];
        let mut info = 0i32;
        let (mut q, mut z) = ([C::from(0.0)], [C::from(0.0)]);
        let mut work = vec![C::from(0.0); n];
        let mut rwork = vec![0.0; 7 * n];
        let mut iwork = vec![0i32; 5 * n];
        let mut ifail = vec![0i32; n];
        // SAFETY: every buffer has the length zhbevx requires for jobz = 'N'.
        unsafe {
            lapack::zhbevx(
                b'N',
                b'V',
                b'U',
                n as i32,
                kd as i32,
                &mut ab,
                ldab as i32,
                &mut q,
                1,
                lo,
                hi,
                0,
                0,
                0.0,
                &mut found,
                &mut w,
                &mut z,
                1,
                &mut work,
                &mut rwork,
                &mut iwork,
                &mut ifail,
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::EigenSolver(format!("zhbevx returned info = {info}")));
        }
        w.truncate(found as usize);
        Ok(w)
    }
}

/// Lumped-mass discretisation of the quadratic form `sum |f'|^2 + q |f|^2`
/// on one cell. End values are tied to the four vertex unknowns through the
/// magnetic and Floquet factors, so the vertex conditions come out as the
/// natural ones. Each edge is folded at its midpoint to keep the matrix banded.
fn cell_operator(q: &Potential, ch: &ChannelParams, theta: f64, m: usize) -> Result<CellOperator> {
    if m < MIN_POINTS {
        return Err(Error::InvalidArgument(format!(
            "FD oracle needs at least {MIN_POINTS} points per edge (got {m})"
        )));
    }
    let h = 1.0 / m as f64;
    let qv: Vec<f64> = (0..=m)
        .map(|i| {
            q.value(i as f64 * h).ok_or_else(|| {
                Error::InvalidArgument(
                    "FD oracle needs a potential with point values (no delta terms)".into(),
                )
            })
        })
        .collect::<Result<_>>()?;

    let (a1, a2) = (ch.phases.a1, ch.phases.a2);
    let sk = cis(2.0 * std::f64::consts::PI * ch.k as f64 / ch.n_around as f64);
    let fwd = cis(theta);
    // (start vertex, factor, end vertex, factor): f_j(0) = c0 V, f_j(1) = c1 V.
    // Vertices 2 and 3 of cell n + 1 carry an extra e^{i theta}.
    let one = C::from(1.0);
    let edges: [(usize, C, usize, C); 6] = [
        (3, one, 0, cis(-a1)),
        (0, one, 1, cis(-a2)),
        (1, one, 2, cis(-a1)),
        (2, one, 3, cis(-a2) * sk.conj()),
        (0, one, 3, cis(a1) * fwd),
        (1, one, 2, cis(-a1) * fwd),
    ];

    // Vertices first, then layers l = 1, 2, ... holding nodes i = l and i = m - l of every edge.
    let layers = m / 2;
    let mut index = vec![[usize::MAX; 2]; 6 * (layers + 1)];
    let mut next = 4;
    for l in 1..=layers {
        for j in 0..6 {
            index[j * (layers + 1) + l][0] = next;
            next += 1;
            if m - l != l {
                index[j * (layers + 1) + l][1] = next;
                next += 1;
            }
        }
    }
    let dim = next;
    let node = |j: usize, i: usize| -> usize {
        if i <= layers {
            index[j * (layers + 1) + i][0]
        } else {
            index[j * (layers + 1) + (m - i)][1]
        }
    };

    let mut k: BTreeMap<(usize, usize), C> = BTreeMap::new();
    let mut mass = vec![0.0; dim];
    let add = |k: &mut BTreeMap<(usize, usize), C>, r: usize, c: usize, v: C| {
        let (key, v) = if r <= c {
            ((r, c), v)
        } else {
            ((c, r), v.conj())
        };
        *k.entry(key).or_default() += v;
    };
    let inv_h = 1.0 / h;
    for (j, &(va, ca, vb, cb)) in edges.iter().enumerate() {
        for i in 1..m {
            let r = node(j, i);
            mass[r] += h;
            add(&mut k, r, r, C::from(2.0 * inv_h + h * qv[i]));
            if i + 1 < m {
                add(&mut k, r, node(j, i + 1), C::from(-inv_h));
            }
        }
        // |u_1 - ca V_a|^2 / h and |u_{m-1} - cb V_b|^2 / h.
        for (v, c, i, t) in [(va, ca, 1, 0), (vb, cb, m - 1, m)] {
            mass[v] += 0.5 * h;
            add(&mut k, v, v, C::from(inv_h + 0.5 * h * qv[t]));
            add(&mut k, node(j, i), v, -c * inv_h);
        }
    }
    let scale: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let upper = k
        .into_iter()
        .map(|((r, c), v)| ((r, c), v * scale[r] * scale[c]))
        .collect();
    Ok(CellOperator { dim, upper })
}

/// Dense Hermitian FD matrix of one cell of the channel operator with
/// Floquet coupling `f_{n+1} = e^{i theta} f_n`.
pub fn floquet_matrix(
    q: &Potential,
    ch: &ChannelParams,
    theta: f64,
    m: usize,
) -> Result<Array2<C>> {
    Ok(cell_operator(q, ch, theta, m)?.dense())
}

pub fn floquet_fd_at(
    q: &Potential,
    ch: &ChannelParams,
    theta: f64,
    m: usize,
    lambda_max: f64,
) -> Result<FloquetSpectrum> {
    let op = cell_operator(q, ch, theta, m)?;
    let (lo, _) = q.range();
    let eigenvalues = op.eigenvalues_in(lo - 1.0, lambda_max)?;
    Ok(FloquetSpectrum { theta, eigenvalues })
}

/// FD eigenvalues below `lambda_max` for each `theta`, computed in parallel.
pub fn floquet_fd_spectrum(
    q: &Potential,
    ch: &ChannelParams,
    thetas: &[f64],
    m: usize,
    lambda_max: f64,
) -> Result<Vec<FloquetSpectrum>> {
    thetas
        .par_iter()
        .map(|&t| floquet_fd_at(q, ch, t, m, lambda_max))
        .collect()
}

/// `n` equally spaced quasimomenta in `[0, 2 pi)`.
pub fn theta_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 2.0 * std::f64::consts::PI * i as f64 / n as f64)
        .collect()
}

const EXACT_DX: f64 = 0.002;

/// Eigenvalues below `lambda_max` of the channel at quasimomentum `theta`
/// from Hill data: roots of `F_nu = cos theta` plus each Dirichlet
/// eigenvalue twice.
pub fn floquet_exact(
    solver: &HillSolver,
    ch: &ChannelParams,
    theta: f64,
    lambda_max: f64,
) -> Result<Vec<f64>> {
    let target = theta.cos();
    let x0 = x_of(solver.potential().spectral_floor() - 1.0);
    let x1 = x_of(lambda_max);
    let n = ((x1 - x0) / EXACT_DX).ceil() as usize + 1;
    let xs: Vec<f64> = (0..n).map(|i| x0 + i as f64 * EXACT_DX).collect();
    let values: Vec<_> = xs
        .par_iter()
        .map(|&x| solver.values_at_x(x))
        .collect::<Result<_>>()?;

    let branch = |x: f64, nu: usize| -> Result<Option<f64>> {
        let ly = lyapunov_from(&solver.values_at_x(x)?, ch);
        Ok(match ly.branches {
            Branches::Real(f) => Some(f[nu] - target),
            Branches::ComplexPair { .. } => None,
        })
    };
    let mut out = Vec::new();
    for nu in 0..2 {
        let g: Vec<Option<f64>> = values
            .iter()
            .map(|v| match lyapunov_from(v, ch).branches {
                Branches::Real(f) => Some(f[nu] - target),
                Branches::ComplexPair { .. } => None,
            })
            .collect();
        for i in 0..n - 1 {
            if let (Some(a), Some(b)) = (g[i], g[i + 1]) {
                if a * b < 0.0 || a == 0.0 {
                    let mut f = |x: f64| Ok(branch(x, nu)?.unwrap_or(0.0));
                    out.push(lambda_of(bisect(&mut f, xs[i], xs[i + 1], a)?));
                }
            }
        }
    }
    for i in 0..n - 1 {
        let (a, b) = (values[i].phi, values[i + 1].phi);
        if a * b < 0.0 {
            let mut f = |x: f64| Ok(solver.values_at_x(x)?.phi);
            let mu = lambda_of(bisect(&mut f, xs[i], xs[i + 1], a)?);
            out.extend([mu, mu]);
        }
    }
    out.retain(|&l| l <= lambda_max);
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_mode_at_zero_quasimomentum() {
        let ch = ChannelParams::from_a(0, 2, 0.0).unwrap();
        let s = floquet_fd_at(&Potential::zero(), &ch, 0.0, 60, 5.0).unwrap();
        assert!(s.eigenvalues[0].abs() < 1e-8, "{:?}", s.eigenvalues);
    }

    #[test]
    fn exact_free_eigenvalues() {
        let solver = HillSolver::new(Potential::zero());
        let ch = ChannelParams::from_a(0, 2, 0.0).unwrap();
        let ev = floquet_exact(&solver, &ch, 0.0, 12.0).unwrap();
        assert!(ev[0].abs() < 1e-10, "{ev:?}");
        let mu = std::f64::consts::PI.powi(2);
        assert_eq!(ev.iter().filter(|l| (*l - mu).abs() < 1e-9).count(), 2);
    }

    #[test]
    fn hermitian_and_banded() {
        let ch = ChannelParams::new(1, 3, crate::geometry::MagneticPhases::new(0.4, -0.2)).unwrap();
        let q = Potential::fourier(vec![0.0, 1.0], vec![]).unwrap();
        let op = cell_operator(&q, &ch, 0.7, 60).unwrap();
        assert!(op.bandwidth() <= 24, "{}", op.bandwidth());
        let a = op.dense();
        let dev = (&a - &a.t().mapv(|z| z.conj()))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert_eq!(dev, 0.0);
    }

    #[test]
    fn rejects_coarse_grids_and_deltas() {
        let ch = ChannelParams::from_a(0, 2, 0.0).unwrap();
        assert!(floquet_matrix(&Potential::zero(), &ch, 0.0, 10).is_err());
        let d = Potential::delta(vec![0.5], vec![1.0]).unwrap();
        assert!(floquet_matrix(&d, &ch, 0.0, 60).is_err());
    }
}
