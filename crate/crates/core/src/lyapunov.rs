//! Lyapunov branches of the fiber operators `H_k`.
//!
//! For channel `k` write `c = cos(pi k / N + a)` and `s = sin(pi k / N + a)`.
//! The two branches are `F_{1,2} = xi +/- sqrt(rho)` with `xi`, `rho` built
//! from the Hill data `F`, `F_-` at the same energy.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::MagneticPhases;
use crate::hill::{fundamental_values, HillValues, Potential};

/// Below this, `c` or `s` of a channel counts as zero.
pub const TRIG_ZERO: f64 = 1e-12;

/// One fiber channel: circumferential index `k` of `N`, plus the edge phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub k: usize,
    pub n_around: usize,
    pub phases: MagneticPhases,
}

impl ChannelParams {
    pub fn new(k: usize, n_around: usize, phases: MagneticPhases) -> Result<Self> {
        if n_around == 0 || k >= n_around {
            return Err(Error::InvalidArgument(format!(
                "channel k = {k} needs 0 <= k < N = {n_around}"
            )));
        }
        Ok(ChannelParams {
            k,
            n_around,
            phases,
        })
    }

    /// Channel for a bare total phase; the split puts all of it on `a1`.
    pub fn from_a(k: usize, n_around: usize, a: f64) -> Result<Self> {
        Self::new(k, n_around, MagneticPhases::new(a, 0.0))
    }

    pub fn all(n_around: usize, phases: MagneticPhases) -> Result<Vec<Self>> {
        (0..n_around)
            .map(|k| Self::new(k, n_around, phases))
            .collect()
    }

    pub fn a(&self) -> f64 {
        self.phases.a()
    }

    pub fn angle(&self) -> f64 {
        PI * self.k as f64 / self.n_around as f64 + self.a()
    }

    pub fn c(&self) -> f64 {
        self.angle().cos()
    }

    pub fn s(&self) -> f64 {
        self.angle().sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branches {
    Real([f64; 2]),
    /// `rho < 0`: the branches are `re +/- i im`.
    ComplexPair {
        re: f64,
        im: f64,
    },
}

impl Branches {
    pub fn in_band(&self, nu: usize) -> bool {
        match self {
            Branches::Real(f) => f[nu].abs() <= 1.0,
            Branches::ComplexPair { .. } => false,
        }
    }

    pub fn any_in_band(&self) -> bool {
        self.in_band(0) || self.in_band(1)
    }

    pub fn as_complex(&self) -> [num_complex::Complex64; 2] {
        use num_complex::Complex64 as C;
        match *self {
            Branches::Real([a, b]) => [C::new(a, 0.0), C::new(b, 0.0)],
            Branches::ComplexPair { re, im } => [C::new(re, im), C::new(re, -im)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovValues {
    pub lambda: f64,
    pub xi: f64,
    pub rho: f64,
    pub branches: Branches,
    /// Thresholds `g_1 <= g_2` whose crossings by `9F^2` are periodic eigenvalues.
    pub g: [f64; 2],
    /// Thresholds `h_1 <= h_2` whose crossings are antiperiodic eigenvalues.
    pub h: [f64; 2],
    pub u: f64,
    pub v: f64,
    /// `s^2 (1 - F_-^2 / c^2)`; undefined when `c = 0`.
    pub fk: Option<f64>,
    pub d_plus: f64,
    pub d_minus: f64,
}

pub fn g_thresholds(f_minus: f64, c: f64) -> [f64; 2] {
    let m = f_minus * f_minus;
    let r = 2.0 * (m + 4.0 * c * c).sqrt();
    [5.0 + m - r, 5.0 + m + r]
}

pub fn h_thresholds(f_minus: f64) -> [f64; 2] {
    let a = f_minus.abs();
    [(1.0 - a).powi(2), (1.0 + a).powi(2)]
}

pub fn rho_of(f: f64, f_minus: f64, c: f64, s: f64) -> f64 {
    let (c2, s2) = (c * c, s * s);
    (9.0 * f * f - s2) * c2 + s2 * f_minus * f_minus
}

pub fn lyapunov_from(hv: &HillValues, ch: &ChannelParams) -> LyapunovValues {
    let (c, s) = (ch.c(), ch.s());
    let (c2, s2) = (c * c, s * s);
    let (f, fm) = (hv.f, hv.f_minus);
    let f9 = 9.0 * f * f;
    let m = fm * fm;
    let xi = 0.5 * (f9 - m - 1.0) - s2;
    let rho = rho_of(f, fm, c, s);
    let branches = if rho >= 0.0 {
        let r = rho.sqrt();
        Branches::Real([xi + r, xi - r])
    } else {
        Branches::ComplexPair {
            re: xi,
            im: (-rho).sqrt(),
        }
    };
    let g = g_thresholds(fm, c);
    let h = h_thresholds(fm);
    LyapunovValues {
        lambda: hv.lambda,
        xi,
        rho,
        branches,
        g,
        h,
        u: fm.abs() - s2,
        v: fm.abs() - c2,
        fk: (c.abs() > TRIG_ZERO).then(|| s2 * (1.0 - m / c2)),
        d_plus: (f9 - g[0]) * (f9 - g[1]),
        d_minus: (f9 - h[0]) * (f9 - h[1]),
    }
}

pub fn lyapunov(q: &Potential, lambda: f64, ch: &ChannelParams) -> Result<LyapunovValues> {
    Ok(lyapunov_from(&fundamental_values(q, lambda)?, ch))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_values_at_zero_energy() {
        let ch = ChannelParams::from_a(0, 2, 0.0).unwrap();
        let l = lyapunov(&Potential::zero(), 0.0, &ch).unwrap();
        assert!((l.xi - 4.0).abs() < 1e-12);
        assert!((l.rho - 9.0).abs() < 1e-12);
        assert_eq!(l.branches, Branches::Real([7.0, 1.0]));
        assert!(l.d_plus.abs() < 1e-12);
        assert!((l.d_minus - 64.0).abs() < 1e-12);
    }

    #[test]
    fn zero_cosine_leaves_fk_undefined() {
        let ch = ChannelParams::from_a(1, 2, 0.0).unwrap();
        let l = lyapunov(&Potential::zero(), 3.0, &ch).unwrap();
        assert!(ch.c().abs() < 1e-15);
        assert!(l.fk.is_none());
    }

    #[test]
    fn complex_pair_when_rho_negative() {
        // Near a zero of F with both c and s nonzero, rho = s^2 (F_-^2 - c^2) < 0.
        let ch = ChannelParams::from_a(0, 2, 0.5).unwrap();
        let l = lyapunov(
            &Potential::zero(),
            (std::f64::consts::PI / 2.0).powi(2),
            &ch,
        )
        .unwrap();
        assert!(matches!(l.branches, Branches::ComplexPair { .. }));
        assert!(!l.branches.any_in_band());
    }

    #[test]
    fn channel_index_is_checked() {
        assert!(ChannelParams::from_a(2, 2, 0.0).is_err());
    }
}
