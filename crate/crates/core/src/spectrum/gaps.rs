use super::labels::{BandEndpoints, Endpoint, Provenance};
use super::ChannelSpectrum;
use crate::error::{Error, Result};
use crate::hill::HillScan;
use crate::lyapunov::{g_thresholds, h_thresholds, rho_of, ChannelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapClass {
    Periodic,
    Antiperiodic,
    Resonance,
    /// One antiperiodic and one periodic endpoint.
    PMix,
    /// One antiperiodic and one resonance endpoint.
    RMix,
    Empty,
}

impl GapClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            GapClass::Periodic => "periodic",
            GapClass::Antiperiodic => "antiperiodic",
            GapClass::Resonance => "resonance",
            GapClass::PMix => "p-mix",
            GapClass::RMix => "r-mix",
            GapClass::Empty => "empty",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapRecord {
    pub index: usize,
    pub lo: Endpoint,
    pub hi: Endpoint,
    pub empty: bool,
    pub class: GapClass,
}

impl GapRecord {
    fn new(index: usize, lo: Endpoint, hi: Endpoint) -> Self {
        let empty = hi.value - lo.value <= empty_tol(lo.value, hi.value);
        let mut g = GapRecord {
            index,
            lo,
            hi,
            empty,
            class: GapClass::Empty,
        };
        g.class = classify_gap(&g);
        g
    }

    pub fn width(&self) -> f64 {
        if self.empty {
            0.0
        } else {
            self.hi.value - self.lo.value
        }
    }
}

pub(crate) fn empty_tol(lo: f64, hi: f64) -> f64 {
    let scale = if lo.is_finite() {
        lo.abs().max(hi.abs())
    } else {
        hi.abs()
    };
    1e-10 * scale.max(1.0)
}

/// Gap class from the provenance of both endpoints.
pub fn classify_gap(g: &GapRecord) -> GapClass {
    use Provenance::*;
    if g.empty {
        return GapClass::Empty;
    }
    match (g.lo.tag, g.hi.tag) {
        (NegInfinity | Periodic { .. }, Periodic { .. }) => GapClass::Periodic,
        (Antiperiodic { .. }, Antiperiodic { .. }) => GapClass::Antiperiodic,
        (Resonance { .. }, Resonance { .. }) => GapClass::Resonance,
        (Antiperiodic { .. }, Periodic { .. }) | (Periodic { .. }, Antiperiodic { .. }) => {
            GapClass::PMix
        }
        (Antiperiodic { .. }, Resonance { .. }) | (Resonance { .. }, Antiperiodic { .. }) => {
            GapClass::RMix
        }
        // Never produced by the labeling; kept total for hand-built records.
        _ => GapClass::Empty,
    }
}

/// Gaps `G_{k,m}` of one channel in order of `m`, up to the first one with an
/// endpoint beyond the scan.
pub fn gaps_channel(e: &BandEndpoints) -> Vec<GapRecord> {
    let mut out = Vec::new();
    let Some(g0) = e.get(2, 0) else { return out };
    out.push(GapRecord::new(0, g0.0, g0.1));
    for m in 1.. {
        let n = (m + 3) / 4;
        let pair = match m % 4 {
            0 => e.get(2, 2 * n).map(|p| (p.0, p.1)),
            2 => e.get(1, 2 * n - 1).map(|p| (p.0, p.1)),
            1 => e
                .get(2, 2 * n - 1)
                .zip(e.get(1, 2 * n - 2))
                .map(|(a, b)| (a.0, b.1)),
            _ => e
                .get(1, 2 * n)
                .zip(e.get(2, 2 * n - 1))
                .map(|(a, b)| (a.0, b.1)),
        };
        match pair {
            Some((lo, hi)) => out.push(GapRecord::new(m, lo, hi)),
            None => break,
        }
    }
    out
}

/// Checks that each endpoint lies on the zero set its tag names.
pub fn verify_tags(scan: &HillScan, ch: &ChannelParams, g: &GapRecord) -> Result<()> {
    let (c, s) = (ch.c(), ch.s());
    for ep in [g.lo, g.hi] {
        if matches!(ep.tag, Provenance::NegInfinity) {
            continue;
        }
        let v = scan.solver().values(ep.value)?;
        let f9 = 9.0 * v.f * v.f;
        let (residual, scale) = match ep.tag {
            Provenance::Periodic { nu, .. } => {
                let g = g_thresholds(v.f_minus, c)[nu - 1];
                (f9 - g, f9.max(g))
            }
            Provenance::Antiperiodic { nu, .. } => {
                let h = h_thresholds(v.f_minus)[nu - 1];
                (f9 - h, f9.max(h))
            }
            Provenance::Resonance { .. } => {
                let r = rho_of(v.f, v.f_minus, c, s);
                (r, f9.max(v.f_minus * v.f_minus).max(s * s))
            }
            Provenance::NegInfinity => unreachable!(),
        };
        if residual.abs() > 1e-7 * scale.max(1.0) {
            return Err(Error::ClassificationFailure(ep.value));
        }
    }
    Ok(())
}

/// `G_m` of the full operator as the intersection of the channel gaps.
pub(crate) fn intersect(channels: &[ChannelSpectrum]) -> Result<Vec<GapRecord>> {
    let count = channels.iter().map(|c| c.gaps.len()).min().unwrap_or(0);
    let mut out = Vec::with_capacity(count);
    for m in 0..count {
        let mut lo = channels[0].gaps[m].lo;
        let mut hi = channels[0].gaps[m].hi;
        let mut any_empty = false;
        for ch in channels {
            let g = &ch.gaps[m];
            any_empty |= g.empty;
            if g.lo.value > lo.value {
                lo = g.lo;
            }
            if g.hi.value < hi.value {
                hi = g.hi;
            }
        }
        let mut rec = GapRecord::new(m, lo, hi);
        rec.empty |= any_empty;
        rec.class = classify_gap(&rec);
        out.push(rec);
    }
    Ok(out)
}

/// Containments that every full-operator gap list must satisfy.
pub(crate) fn check_relations(scan: &HillScan, gaps: &[GapRecord]) -> Result<()> {
    let lm = &scan.landmarks;
    let tol = |x: f64| 1e-8 * x.abs().max(1.0);
    // Without evenness F_- need not vanish at the Hill edges, which then lie in the spectrum.
    let even = scan.solver().potential().is_even();
    for g in gaps {
        let m = g.index;
        if m == 0 || m % 2 == 1 {
            continue;
        }
        let n = m.div_ceil(4);
        if m % 4 == 0 {
            if let Some(&(a, b)) = lm.edges.get(n - 1) {
                if even
                    && lm.gap_is_open(n)
                    && !(g.lo.value <= a + tol(a) && b - tol(b) <= g.hi.value)
                {
                    return Err(Error::InternalInconsistency(format!(
                        "Hill gap {n} not inside G_{m}"
                    )));
                }
            }
        } else if let Some(&eta) = lm.eta.get(n - 1) {
            if !(g.lo.value <= eta + tol(eta) && eta - tol(eta) <= g.hi.value) {
                return Err(Error::InternalInconsistency(format!(
                    "eta_{n} outside [E_{m}^-, E_{m}^+]"
                )));
            }
        }
    }
    Ok(())
}

/// `E_{2,p}^- < E_{1,p-1}^+` exactly when `u > 0` at `E_{2,p}^-`, for odd `p`.
/// Returns the labels `p` where the two sides disagree beyond `tol`.
pub fn relation_mg_holds(scan: &HillScan, spec: &ChannelSpectrum, tol: f64) -> Result<Vec<usize>> {
    let s2 = spec.channel.s().powi(2);
    let mut bad = Vec::new();
    for (i, pair) in spec.endpoints.odd[1].iter().enumerate() {
        let p = 2 * i + 1;
        let Some(prev) = spec.endpoints.get(1, p - 1) else {
            break;
        };
        let e2 = pair.0.value;
        let u = scan.solver().values(e2)?.f_minus.abs() - s2;
        let diff = prev.1.value - e2;
        if diff.abs() <= tol || u.abs() <= tol {
            continue;
        }
        if (diff > 0.0) != (u > 0.0) {
            bad.push(p);
        }
    }
    Ok(bad)
}
