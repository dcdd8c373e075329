use super::ChannelSpectrum;

type Interval = (f64, f64);

const MIN_LENGTH: f64 = 1e-10;

/// Multiplicity of the absolutely continuous spectrum of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicityMap {
    /// Per branch: the intervals where that branch's Lyapunov function lies in `[-1, 1]`.
    pub branch_sets: [Vec<Interval>; 2],
    /// Pieces of `kappa_n` between an antiperiodic eigenvalue and the nearest resonance.
    pub resonance_set: Vec<Interval>,
    /// Disjoint pieces of the spectrum tagged with multiplicity 2 or 4.
    pub pieces: Vec<(f64, f64, u8)>,
}

impl MultiplicityMap {
    /// Multiplicity at `lambda`, or 0 outside the spectrum.
    pub fn at(&self, lambda: f64) -> u8 {
        let mut best = 0;
        for &(a, b, m) in &self.pieces {
            if a <= lambda && lambda <= b {
                best = best.max(m);
            }
        }
        best
    }
}

fn merge(mut v: Vec<Interval>) -> Vec<Interval> {
    v.retain(|(a, b)| b - a > MIN_LENGTH);
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<Interval> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn intersect(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    let mut out = Vec::new();
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            let (lo, hi) = (a0.max(b0), a1.min(b1));
            if hi - lo > MIN_LENGTH {
                out.push((lo, hi));
            }
        }
    }
    merge(out)
}

/// Multiplicity map of `sigma_ac(H_k)` up to `lambda_max`.
pub fn multiplicity_map(spec: &ChannelSpectrum, lambda_max: f64) -> MultiplicityMap {
    let l = &spec.labeled;
    let mut branch_sets = [Vec::new(), Vec::new()];
    for nu in 0..2 {
        for (i, anti) in l.antiperiodic[nu].iter().enumerate() {
            if let Some(prev) = l.periodic[nu].get(i) {
                branch_sets[nu].push((prev.plus, anti.minus));
            }
            if let Some(next) = l.periodic[nu].get(i + 1) {
                branch_sets[nu].push((anti.plus, next.minus));
            }
        }
        branch_sets[nu] = merge(std::mem::take(&mut branch_sets[nu]));
    }

    let c2 = spec.channel.c().powi(2);
    let mut resonance_set = Vec::new();
    for (i, kappa) in l.kappa.iter().enumerate() {
        let (fm_lo, fm_hi) = l.abs_fminus[i];
        let Some(res) = spec.resonances.get(i) else {
            continue;
        };
        if fm_lo - c2 < 0.0 {
            if let Some(r) = res.minus() {
                resonance_set.push((kappa.0, r));
            }
        }
        if fm_hi - c2 < 0.0 {
            if let Some(r) = res.plus() {
                resonance_set.push((r, kappa.1));
            }
        }
    }
    let resonance_set = merge(resonance_set);

    let both = intersect(&branch_sets[0], &branch_sets[1]);
    let mut four = both;
    four.extend_from_slice(&resonance_set);
    let bands = spec.bands(lambda_max);
    let four = intersect(&merge(four), &bands);

    let mut pieces = Vec::new();
    for &(a, b) in &bands {
        let mut cursor = a;
        for &(c, d) in four.iter().filter(|(c, d)| *d > a && *c < b) {
            if c - cursor > MIN_LENGTH {
                pieces.push((cursor, c, 2));
            }
            pieces.push((c.max(a), d.min(b), 4));
            cursor = d.min(b);
        }
        if b - cursor > MIN_LENGTH {
            pieces.push((cursor, b, 2));
        }
    }
    MultiplicityMap {
        branch_sets,
        resonance_set,
        pieces,
    }
}
