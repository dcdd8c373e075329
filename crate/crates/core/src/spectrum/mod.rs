//! Band edges, gaps and multiplicities of the fiber operators and of the
//! full operator.
//!
//! Labels follow the Hill structure: for each `nu in {1, 2}` the periodic
//! eigenvalues `lambda_{nu,2n}^{k,+-}` sit around the Dirichlet eigenvalue
//! `mu_n` and the antiperiodic ones `lambda_{nu,2n-1}^{+-}` around the zero
//! `eta_n` of `F`. Antiperiodic labels do not depend on the channel.

mod asymptotics;
mod gaps;
mod labels;
mod multiplicity;

use rayon::prelude::*;

pub use asymptotics::{
    asymptotic_endpoints, localization_n0, small_a_predictions, theta_tilde, SmallFieldPrediction,
};
pub use gaps::{classify_gap, gaps_channel, relation_mg_holds, verify_tags, GapClass, GapRecord};
pub use labels::{
    band_endpoints, locate_labeled_eigenvalues, locate_resonances, AntiperiodicSet, BandEndpoints,
    Endpoint, LabeledEigenvalues, Provenance, Resonance, ResonanceKind, Side, ZeroPair,
};
pub use multiplicity::{multiplicity_map, MultiplicityMap};

use crate::error::{Error, Result};
use crate::geometry::MagneticPhases;
use crate::hill::HillScan;
use crate::lyapunov::ChannelParams;

/// Everything computed for one channel `H_k`.
#[derive(Debug, Clone)]
pub struct ChannelSpectrum {
    pub channel: ChannelParams,
    pub labeled: LabeledEigenvalues,
    pub resonances: Vec<Resonance>,
    pub endpoints: BandEndpoints,
    pub gaps: Vec<GapRecord>,
}

impl ChannelSpectrum {
    /// Closed bands of `H_k` below `lambda_max` and below the last located gap endpoint.
    pub fn bands(&self, lambda_max: f64) -> Vec<(f64, f64)> {
        complement(&self.gaps, lambda_max)
    }
}

/// Gaps of the full operator plus its bands and flat bands.
#[derive(Debug, Clone)]
pub struct FullSpectrum {
    pub gaps: Vec<GapRecord>,
    pub bands: Vec<(f64, f64)>,
    pub flat_bands: Vec<f64>,
    pub channels: Vec<ChannelSpectrum>,
}

pub(crate) fn complement(gaps: &[GapRecord], lambda_max: f64) -> Vec<(f64, f64)> {
    // Gaps past the last labeled endpoint are unknown, so the spectrum stops there.
    let resolved = gaps
        .iter()
        .flat_map(|g| [g.lo.value, g.hi.value])
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let lambda_max = lambda_max.min(resolved);
    let mut open: Vec<(f64, f64)> = gaps
        .iter()
        .filter(|g| !g.empty)
        .map(|g| (g.lo.value, g.hi.value))
        .collect();
    open.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut bands = Vec::new();
    let mut lo = f64::NEG_INFINITY;
    for (a, b) in open {
        if a > lo && lo.is_finite() {
            bands.push((lo, a.min(lambda_max)));
        }
        lo = lo.max(b);
        if lo >= lambda_max {
            break;
        }
    }
    if lo.is_finite() && lo < lambda_max {
        bands.push((lo, lambda_max));
    }
    bands.retain(|(a, b)| b > a);
    bands
}

/// Scan data plus the channel-independent antiperiodic labels.
pub struct SpectralContext<'a> {
    pub scan: &'a HillScan,
    pub anti: AntiperiodicSet,
}

impl<'a> SpectralContext<'a> {
    pub fn new(scan: &'a HillScan) -> Result<Self> {
        Ok(SpectralContext {
            scan,
            anti: AntiperiodicSet::compute(scan)?,
        })
    }

    pub fn channel(&self, ch: &ChannelParams) -> Result<ChannelSpectrum> {
        let labeled = labels::labeled_with(self.scan, &self.anti, ch)?;
        let resonances = locate_resonances(self.scan, ch, &labeled)?;
        let endpoints = band_endpoints(self.scan, ch, &labeled, &resonances)?;
        let gaps = gaps_channel(&endpoints);
        for g in &gaps {
            verify_tags(self.scan, ch, g)?;
        }
        Ok(ChannelSpectrum {
            channel: *ch,
            labeled,
            resonances,
            endpoints,
            gaps,
        })
    }

    pub fn full(&self, n_around: usize, phases: MagneticPhases) -> Result<FullSpectrum> {
        let chans = ChannelParams::all(n_around, phases)?;
        let channels: Vec<ChannelSpectrum> = chans
            .par_iter()
            .map(|ch| self.channel(ch))
            .collect::<Result<_>>()?;
        let gaps = gaps::intersect(&channels)?;
        gaps::check_relations(self.scan, &gaps)?;
        Ok(FullSpectrum {
            bands: complement(&gaps, self.scan.lambda_max()),
            flat_bands: self.scan.landmarks.dirichlet.clone(),
            gaps,
            channels,
        })
    }
}

/// Gaps of the full operator `H^a` with `N` channels.
pub fn gaps_full(scan: &HillScan, n_around: usize, phases: MagneticPhases) -> Result<FullSpectrum> {
    if n_around == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    SpectralContext::new(scan)?.full(n_around, phases)
}
