//! Integrators for `-y'' + q y = lambda y` on `[0, t]`.
//!
//! Every integrator returns the transfer matrix `[[theta, phi], [theta', phi']]`
//! that maps initial data `(y(0), y'(0))` to `(y(t), y'(t))`.

use std::sync::Arc;

use super::potential::Potential;
use crate::error::{Error, Result};

pub type Transfer = [[f64; 2]; 2];

pub const IDENTITY: Transfer = [[1.0, 0.0], [0.0, 1.0]];

pub(crate) fn mul(a: &Transfer, b: &Transfer) -> Transfer {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn max_abs_diff(a: &Transfer, b: &Transfer) -> f64 {
    let mut m = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}

fn max_abs(a: &Transfer) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Propagator of `y'' = w y` over a length `l` with constant `w`.
pub(crate) fn constant_step(l: f64, w: f64) -> Transfer {
    let z = w * l * l;
    let (c, s) = if z.abs() < 1e-6 {
        let c = 1.0 + z / 2.0 * (1.0 + z / 12.0 * (1.0 + z / 30.0));
        let s = l * (1.0 + z / 6.0 * (1.0 + z / 20.0 * (1.0 + z / 42.0)));
        (c, s)
    } else if w > 0.0 {
        let k = w.sqrt();
        ((k * l).cosh(), (k * l).sinh() / k)
    } else {
        let k = (-w).sqrt();
        ((k * l).cos(), (k * l).sin() / k)
    };
    [[c, s], [w * s, c]]
}

pub trait Propagator: Send + Sync {
    fn name(&self) -> &'static str;

    fn supports(&self, q: &Potential) -> bool;

    fn transfer_to(&self, q: &Potential, lambda: f64, t: f64) -> Result<Transfer>;

    fn transfer(&self, q: &Potential, lambda: f64) -> Result<Transfer> {
        self.transfer_to(q, lambda, 1.0)
    }
}

/// Closed-form propagation for piecewise-constant and point potentials.
pub struct Exact;

impl Propagator for Exact {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn supports(&self, q: &Potential) -> bool {
        !q.is_smooth()
    }

    fn transfer_to(&self, q: &Potential, lambda: f64, t: f64) -> Result<Transfer> {
        if !self.supports(q) {
            return Err(Error::InvalidArgument(
                "exact propagation needs a piecewise or delta potential".into(),
            ));
        }
        let mut m = IDENTITY;
        for seg in q.segments() {
            if seg.start >= t {
                break;
            }
            let end = seg.end.min(t);
            m = mul(&constant_step(end - seg.start, seg.value - lambda), &m);
            if seg.end <= t && seg.jump != 0.0 && seg.end < 1.0 {
                m = mul(&[[1.0, 0.0], [seg.jump, 1.0]], &m);
            }
        }
        Ok(m)
    }
}

/// Step-doubling driver shared by the fixed-step schemes.
fn doubled<F>(q: &Potential, t: f64, rtol: f64, step: F) -> Result<Transfer>
where
    F: Fn(f64, f64) -> Transfer,
{
    // Sample potentials are linear between nodes; keep steps aligned with them.
    let g = q.kinks();
    let mut n = if g > 1 { g * 64usize.div_ceil(g) } else { 64 };
    let run = |n: usize| {
        let total = (t * n as f64).ceil().max(1.0) as usize;
        let h = 1.0 / n as f64;
        let mut m = IDENTITY;
        for i in 0..total {
            let a = i as f64 * h;
            let b = (a + h).min(t);
            if b > a {
                m = mul(&step(a, b - a), &m);
            }
        }
        m
    };
    let mut coarse = run(n);
    let mut residual = f64::INFINITY;
    while n <= 1 << 17 {
        let fine = run(2 * n);
        residual = max_abs_diff(&coarse, &fine) / max_abs(&fine).max(1.0);
        if residual <= rtol {
            return Ok(fine);
        }
        coarse = fine;
        n *= 2;
    }
    Err(Error::IntegrationFailure { residual, steps: n })
}

/// Fourth-order Magnus scheme with two Gauss nodes and an exact 2x2 exponential.
pub struct Magnus4 {
    pub rtol: f64,
}

impl Default for Magnus4 {
    fn default() -> Self {
        Magnus4 { rtol: 1e-10 }
    }
}

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // sqrt(3) / 6

impl Propagator for Magnus4 {
    fn name(&self) -> &'static str {
        "magnus4"
    }

    fn supports(&self, q: &Potential) -> bool {
        !q.has_delta()
    }

    fn transfer_to(&self, q: &Potential, lambda: f64, t: f64) -> Result<Transfer> {
        if !self.supports(q) {
            return Err(Error::InvalidArgument(
                "magnus4 cannot integrate point interactions".into(),
            ));
        }
        doubled(q, t, self.rtol, |a, h| {
            let w1 = q.value(a + (0.5 - GAUSS_OFFSET) * h).unwrap() - lambda;
            let w2 = q.value(a + (0.5 + GAUSS_OFFSET) * h).unwrap() - lambda;
            let wbar = 0.5 * (w1 + w2);
            let d = 3f64.sqrt() / 12.0 * h * h * (w1 - w2);
            // Omega = [[d, h], [h wbar, -d]], Omega^2 = delta2 I.
            let delta2 = d * d + h * h * wbar;
            let (c, s) = if delta2.abs() < 1e-6 {
                (
                    1.0 + delta2 / 2.0 * (1.0 + delta2 / 12.0 * (1.0 + delta2 / 30.0)),
                    1.0 + delta2 / 6.0 * (1.0 + delta2 / 20.0 * (1.0 + delta2 / 42.0)),
                )
            } else if delta2 > 0.0 {
                let r = delta2.sqrt();
                (r.cosh(), r.sinh() / r)
            } else {
                let r = (-delta2).sqrt();
                (r.cos(), r.sin() / r)
            };
            [[c + s * d, s * h], [s * h * wbar, c - s * d]]
        })
    }
}

/// Classical Runge-Kutta on the first-order system.
pub struct Rk4 {
    pub rtol: f64,
}

impl Default for Rk4 {
    fn default() -> Self {
        Rk4 { rtol: 1e-10 }
    }
}

impl Propagator for Rk4 {
    fn name(&self) -> &'static str {
        "rk4"
    }

    fn supports(&self, q: &Potential) -> bool {
        !q.has_delta()
    }

    fn transfer_to(&self, q: &Potential, lambda: f64, t: f64) -> Result<Transfer> {
        if !self.supports(q) {
            return Err(Error::InvalidArgument(
                "rk4 cannot integrate point interactions".into(),
            ));
        }
        doubled(q, t, self.rtol, |a, h| {
            let w = |s: f64| q.value(s).unwrap() - lambda;
            let (w0, wm, w1) = (w(a), w(a + 0.5 * h), w(a + h));
            let mut out = IDENTITY;
            for col in 0..2 {
                let y0 = [IDENTITY[0][col], IDENTITY[1][col]];
                let f = |y: [f64; 2], wv: f64| [y[1], wv * y[0]];
                let k1 = f(y0, w0);
                let k2 = f([y0[0] + 0.5 * h * k1[0], y0[1] + 0.5 * h * k1[1]], wm);
                let k3 = f([y0[0] + 0.5 * h * k2[0], y0[1] + 0.5 * h * k2[1]], wm);
                let k4 = f([y0[0] + h * k3[0], y0[1] + h * k3[1]], w1);
                for r in 0..2 {
                    out[r][col] = y0[r] + h / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r]);
                }
            }
            out
        })
    }
}

/// Exact propagation where available, Magnus otherwise.
#[derive(Default)]
pub struct Auto {
    magnus: Magnus4,
}

impl Propagator for Auto {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn supports(&self, _q: &Potential) -> bool {
        true
    }

    fn transfer_to(&self, q: &Potential, lambda: f64, t: f64) -> Result<Transfer> {
        if q.is_smooth() {
            self.magnus.transfer_to(q, lambda, t)
        } else {
            Exact.transfer_to(q, lambda, t)
        }
    }
}

type Factory = fn() -> Arc<dyn Propagator>;

/// Name-indexed collection of integrators.
pub struct PropagatorRegistry {
    entries: Vec<(&'static str, Factory)>,
}

impl Default for PropagatorRegistry {
    fn default() -> Self {
        let mut r = PropagatorRegistry {
            entries: Vec::new(),
        };
        r.register("auto", || Arc::new(Auto::default()));
        r.register("exact", || Arc::new(Exact));
        r.register("magnus4", || Arc::new(Magnus4::default()));
        r.register("rk4", || Arc::new(Rk4::default()));
        r
    }
}

impl PropagatorRegistry {
    pub fn register(&mut self, name: &'static str, factory: Factory) {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, factory));
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Propagator>> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, f)| f())
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown integrator '{name}' (available: {})",
                    self.names().join(", ")
                ))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(m: &Transfer) -> f64 {
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    #[test]
    fn free_propagation_matches_trigonometry() {
        let q = Potential::zero();
        for name in ["magnus4", "rk4"] {
            let p = PropagatorRegistry::default().get(name).unwrap();
            let m = p.transfer(&q, 4.0).unwrap();
            assert!((m[0][0] - 2f64.cos()).abs() < 1e-9, "{name}");
            assert!((m[0][1] - 2f64.sin() / 2.0).abs() < 1e-9, "{name}");
            assert!((m[1][0] + 2.0 * 2f64.sin()).abs() < 1e-9, "{name}");
        }
    }

    #[test]
    fn small_argument_series_is_continuous() {
        let a = constant_step(1.0, 1e-7);
        let b = constant_step(1.0, 2e-6);
        assert!((a[0][0] - 1.0 - 0.5e-7).abs() < 1e-15);
        assert!((b[0][1] - (1.0 + 2e-6 / 6.0)).abs() < 1e-13);
    }

    #[test]
    fn schemes_agree_on_a_smooth_potential() {
        let q = Potential::fourier(vec![0.3, 1.0], vec![0.7]).unwrap();
        let a = Magnus4::default().transfer(&q, 12.0).unwrap();
        let b = Rk4::default().transfer(&q, 12.0).unwrap();
        assert!(max_abs_diff(&a, &b) < 1e-8);
        assert!((det(&a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_handles_a_partial_interval() {
        let q = Potential::piecewise(vec![0.5], vec![0.0, 0.0]).unwrap();
        let m = Exact.transfer_to(&q, 1.0, 0.75).unwrap();
        assert!((m[0][1] - 0.75f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn registry_reports_unknown_names() {
        let err = PropagatorRegistry::default().get("leapfrog").err().unwrap();
        assert!(err.to_string().contains("magnus4"));
    }
}
