use std::f64::consts::PI;

use super::labels::ResonanceKind;
use super::ChannelSpectrum;
use crate::error::{Error, Result};
use crate::hill::HillScan;
use crate::roots::x_of;

/// Half-widths in `sqrt(lambda)` of the large-energy gaps `G_{4n}` (`m = 0`)
/// and `G_{4n-2}` (`m = 1`).
pub fn theta_tilde(m: usize, a: f64) -> f64 {
    match m {
        0 => ((5.0 + 4.0 * a.cos().abs()).sqrt() / 3.0).min(1.0).acos(),
        1 => (a.sin() / 3.0).asin(),
        _ => panic!("theta_tilde is defined for m = 0 and m = 1 only"),
    }
}

/// Leading-order endpoints of `G_{4n-2m}` for large `n`.
pub fn asymptotic_endpoints(n: usize, m: usize, a: f64, q0: f64) -> Result<(f64, f64)> {
    if m > 1 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "asymptotics need n >= 1 and m in {{0, 1}} (got n = {n}, m = {m})"
        )));
    }
    let center = PI * (n as f64 - 0.5 * m as f64);
    let t = theta_tilde(m, a);
    Ok(((center - t).powi(2) + q0, (center + t).powi(2) + q0))
}

/// First-order predictions of `E_{4n}^{+-}` and `E_{4n-2}^{+-}` for small `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallFieldPrediction {
    pub n: usize,
    pub e4n: (f64, f64),
    pub e4n_minus_2: (f64, f64),
    /// Whether the Hill gap `n` is closed, which switches `E_{4n}` to square-root behaviour.
    pub closed_hill_gap: bool,
}

pub fn small_a_predictions(scan: &HillScan, n: usize, a: f64) -> Result<SmallFieldPrediction> {
    let solver = scan.solver();
    if !solver.potential().is_even() {
        return Err(Error::EvennessRequired);
    }
    let lm = &scan.landmarks;
    let (&(lo, hi), &eta) = lm
        .edges
        .get(n.wrapping_sub(1))
        .zip(lm.eta.get(n.wrapping_sub(1)))
        .ok_or_else(|| Error::InvalidArgument(format!("Hill gap {n} lies beyond the scan")))?;
    let closed = !lm.gap_is_open(n);
    let e4n = if closed {
        let d2 = solver.f_derivative(lo, 2)?;
        let shift = 2f64.sqrt() * a / (3.0 * d2.abs().sqrt());
        (lo - shift, hi + shift)
    } else {
        let m = lm
            .masses
            .iter()
            .find(|m| m.n == n)
            .expect("open gaps carry masses");
        (lo + a * a / (9.0 * m.minus), hi + a * a / (9.0 * m.plus))
    };
    let d1 = solver.f_derivative(eta, 1)?;
    let shift = a / (3.0 * d1.abs());
    Ok(SmallFieldPrediction {
        n,
        e4n,
        e4n_minus_2: (eta - shift, eta + shift),
        closed_hill_gap: closed,
    })
}

/// First `n` from which every located zero of the channel sits in its
/// large-`n` localization disc. `None` if that never happens within the scan.
pub fn localization_n0(spec: &ChannelSpectrum) -> Option<usize> {
    let c = spec.channel.c().abs();
    let s = spec.channel.s().abs();
    let r = 1.0 / 3.0;
    let near = |lambda: f64, center: f64, radius: f64| (x_of(lambda) - center).abs() < radius;
    let anti_shift = (1.0f64 / 3.0).asin();
    let per_shift = [
        ((5.0 - 4.0 * c).sqrt() / 3.0).acos(),
        ((5.0 + 4.0 * c).sqrt() / 3.0).min(1.0).acos(),
    ];
    let l = &spec.labeled;
    let n_max = l.antiperiodic[0]
        .len()
        .min(l.periodic[0].len().saturating_sub(1))
        .min(l.periodic[1].len().saturating_sub(1));
    let ok = |n: usize| -> bool {
        let mid = PI * (n as f64 - 0.5);
        for nu in 0..2 {
            let p = &l.antiperiodic[nu][n - 1];
            if !(near(p.minus, mid - anti_shift, r) && near(p.plus, mid + anti_shift, r)) {
                return false;
            }
            let p = &l.periodic[nu][n];
            let centre = PI * n as f64;
            if !(near(p.minus, centre - per_shift[nu], r)
                && near(p.plus, centre + per_shift[nu], r))
            {
                return false;
            }
        }
        if let Some(res) = spec.resonances.get(n - 1) {
            if res.kind == ResonanceKind::Regular && s > 0.0 {
                if res.zeros.len() != 2 {
                    return false;
                }
                let t = (s / 3.0).asin();
                if !(near(res.zeros[0], mid - t, s / 3.0) && near(res.zeros[1], mid + t, s / 3.0)) {
                    return false;
                }
            }
        }
        true
    };
    let mut first = None;
    for n in 1..=n_max {
        if ok(n) {
            first.get_or_insert(n);
        } else {
            first = None;
        }
    }
    first
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_values_at_pi_over_six() {
        let expected0 = ((5.0 + 2.0 * 3f64.sqrt()).sqrt() / 3.0).acos();
        assert!((theta_tilde(0, PI / 6.0) - expected0).abs() < 1e-14);
        assert!((expected0 - 0.246_505_9).abs() < 1e-7);
        assert!((theta_tilde(1, PI / 6.0) - 0.167_448_1).abs() < 1e-7);
        assert_eq!(theta_tilde(0, 0.0), 0.0);
    }

    #[test]
    fn endpoints_are_shifted_by_the_mean() {
        let (lo, hi) = asymptotic_endpoints(3, 1, 0.0, 2.0).unwrap();
        assert!((lo - (2.5 * PI).powi(2) - 2.0).abs() < 1e-12);
        assert_eq!(lo, hi);
        assert!(asymptotic_endpoints(3, 2, 0.0, 0.0).is_err());
    }
}
