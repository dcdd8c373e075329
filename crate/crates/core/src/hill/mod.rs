//! The edge Hill problem `-y'' + q y = lambda y` and its spectral landmarks.

mod landmarks;
mod potential;
mod propagate;

use std::sync::Arc;

pub use landmarks::{EffectiveMass, HillLandmarks, HillScan, ScanPoint, SCAN_DX};
pub use potential::{Potential, Shape};
pub use propagate::{Auto, Exact, Magnus4, Propagator, PropagatorRegistry, Rk4, Transfer};

use crate::error::Result;
use crate::roots::lambda_of;

/// Fundamental solutions at `t = 1` together with the two Lyapunov-type
/// combinations `F = (phi' + theta) / 2` and `F_- = (phi' - theta) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillValues {
    pub lambda: f64,
    pub theta: f64,
    pub theta_d: f64,
    pub phi: f64,
    pub phi_d: f64,
    pub f: f64,
    pub f_minus: f64,
}

impl HillValues {
    pub fn from_transfer(lambda: f64, m: &Transfer) -> Self {
        let (theta, phi, theta_d, phi_d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
        HillValues {
            lambda,
            theta,
            theta_d,
            phi,
            phi_d,
            f: 0.5 * (phi_d + theta),
            f_minus: 0.5 * (phi_d - theta),
        }
    }

    pub fn wronskian(&self) -> f64 {
        self.theta * self.phi_d - self.theta_d * self.phi
    }
}

/// A potential bound to the integrator used for it.
#[derive(Clone)]
pub struct HillSolver {
    potential: Potential,
    propagator: Arc<dyn Propagator>,
}

impl std::fmt::Debug for HillSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HillSolver")
            .field("potential", &self.potential)
            .field("propagator", &self.propagator.name())
            .finish()
    }
}

impl HillSolver {
    pub fn new(potential: Potential) -> Self {
        HillSolver {
            potential,
            propagator: Arc::new(Auto::default()),
        }
    }

    pub fn with_propagator(potential: Potential, propagator: Arc<dyn Propagator>) -> Result<Self> {
        if !propagator.supports(&potential) {
            return Err(crate::Error::InvalidArgument(format!(
                "integrator '{}' does not support this potential",
                propagator.name()
            )));
        }
        Ok(HillSolver {
            potential,
            propagator,
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn propagator_name(&self) -> &'static str {
        self.propagator.name()
    }

    pub fn values(&self, lambda: f64) -> Result<HillValues> {
        let m = self.propagator.transfer(&self.potential, lambda)?;
        Ok(HillValues::from_transfer(lambda, &m))
    }

    pub fn values_at_x(&self, x: f64) -> Result<HillValues> {
        self.values(lambda_of(x))
    }

    /// Transfer matrix from `0` to `t`.
    pub fn transfer_to(&self, lambda: f64, t: f64) -> Result<Transfer> {
        self.propagator.transfer_to(&self.potential, lambda, t)
    }

    /// Derivative of `F` in `lambda` of order 1 or 2.
    pub fn f_derivative(&self, lambda: f64, order: u8) -> Result<f64> {
        let f = |l: f64| self.values(l).map(|v| v.f);
        let scale = lambda.abs().max(1.0);
        match order {
            1 => {
                let h = 1e-4 * scale;
                let d =
                    |h: f64| -> Result<f64> { Ok((f(lambda + h)? - f(lambda - h)?) / (2.0 * h)) };
                let (d1, d2) = (d(h)?, d(0.5 * h)?);
                Ok((4.0 * d2 - d1) / 3.0)
            }
            2 => {
                let h = 2e-3 * scale;
                let f0 = f(lambda)?;
                let d = |h: f64| -> Result<f64> {
                    Ok((f(lambda + h)? - 2.0 * f0 + f(lambda - h)?) / (h * h))
                };
                let (d1, d2) = (d(h)?, d(0.5 * h)?);
                Ok((4.0 * d2 - d1) / 3.0)
            }
            _ => Err(crate::Error::InvalidArgument(format!(
                "derivative order {order} not supported"
            ))),
        }
    }
}

/// Hill data at `lambda` with the default integrator.
pub fn fundamental_values(q: &Potential, lambda: f64) -> Result<HillValues> {
    let m = Auto::default().transfer(q, lambda)?;
    Ok(HillValues::from_transfer(lambda, &m))
}

pub fn f_derivative(q: &Potential, lambda: f64, order: u8) -> Result<f64> {
    HillSolver::new(q.clone()).f_derivative(lambda, order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_values_at_pi_squared() {
        let v = fundamental_values(&Potential::zero(), std::f64::consts::PI.powi(2)).unwrap();
        assert!((v.f + 1.0).abs() < 1e-10);
        assert!(v.f_minus.abs() < 1e-12);
        assert!(v.phi.abs() < 1e-10);
    }

    #[test]
    fn delta_fminus_closed_form() {
        let v = fundamental_values(&Potential::delta_eps(0.1).unwrap(), 4.0).unwrap();
        assert!((v.f_minus - 0.8f64.sin() / 0.4).abs() < 1e-13);
        assert!((v.f_minus - 1.793_390_2).abs() < 1e-7);
    }

    #[test]
    fn second_derivative_of_free_f() {
        let pi2 = std::f64::consts::PI.powi(2);
        let d2 = f_derivative(&Potential::zero(), pi2, 2).unwrap();
        assert!((d2 - 1.0 / (4.0 * pi2)).abs() < 1e-7);
        let d1 = f_derivative(&Potential::zero(), 4.0, 1).unwrap();
        assert!((d1 + 2f64.sin() / 4.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_incompatible_integrator() {
        let q = Potential::delta_eps(0.1).unwrap();
        assert!(HillSolver::with_propagator(q, Arc::new(Rk4::default())).is_err());
    }
}
