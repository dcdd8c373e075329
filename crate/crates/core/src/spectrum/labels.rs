use crate::error::{Error, Result};
use crate::hill::{HillScan, HillValues};
use crate::lyapunov::{g_thresholds, h_thresholds, rho_of, ChannelParams, TRIG_ZERO};
use crate::roots::{self, lambda_of, x_of, Boundary, Walker};

/// Lower and upper member of a labeled pair; equal for a double eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroPair {
    pub minus: f64,
    pub plus: f64,
    pub double: bool,
}

fn pair_from_x(lo: f64, hi: f64, double: bool) -> ZeroPair {
    ZeroPair {
        minus: lambda_of(lo),
        plus: lambda_of(hi),
        double,
    }
}

fn periodic_inside(nu: usize, v: &HillValues, c: f64) -> f64 {
    9.0 * v.f * v.f - g_thresholds(v.f_minus, c)[nu - 1]
}

fn anti_inside(nu: usize, v: &HillValues) -> f64 {
    h_thresholds(v.f_minus)[nu - 1] - 9.0 * v.f * v.f
}

/// Antiperiodic pairs `lambda_{nu,2n-1}^{+-}` for `n = 1, 2, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntiperiodicSet {
    pub pairs: [Vec<ZeroPair>; 2],
    /// `|F_-|` at both members of the `nu = 1` pair.
    pub abs_fminus: Vec<(f64, f64)>,
}

impl AntiperiodicSet {
    pub fn compute(scan: &HillScan) -> Result<Self> {
        let mut pairs = [Vec::new(), Vec::new()];
        for nu in 1..=2 {
            let vals = scan.tabulate(|v| anti_inside(nu, v));
            let mut w = Walker::new(&scan.xs, &vals, |x| {
                scan.eval_x(x).map(|v| anti_inside(nu, &v))
            });
            for n in 1..=scan.eta_x.len() {
                let lo = if n == 1 {
                    scan.ground_x
                } else {
                    match scan.edges_x.get(n - 2) {
                        Some(e) => e.1,
                        None => break,
                    }
                };
                let hi = scan.edges_x.get(n - 1).map(|e| e.0).unwrap_or(scan.x_max);
                match w.component(scan.eta_x[n - 1], (lo, hi))? {
                    Some(c) if c.hi < scan.x_max => {
                        pairs[nu - 1].push(pair_from_x(c.lo, c.hi, c.double))
                    }
                    Some(_) => break,
                    None if hi < scan.x_max => {
                        return Err(Error::CountMismatch {
                            what: format!("antiperiodic eigenvalues nu = {nu}, n = {n}"),
                            found: 0,
                            expected: "a pair inside the Hill band".into(),
                        })
                    }
                    None => break,
                }
            }
        }
        let complete = pairs[0].len().min(pairs[1].len());
        pairs[0].truncate(complete);
        pairs[1].truncate(complete);
        let abs_fminus = pairs[0]
            .iter()
            .map(|p| -> Result<(f64, f64)> {
                Ok((
                    scan.solver().values(p.minus)?.f_minus.abs(),
                    scan.solver().values(p.plus)?.f_minus.abs(),
                ))
            })
            .collect::<Result<_>>()?;
        Ok(AntiperiodicSet { pairs, abs_fminus })
    }

    pub fn len(&self) -> usize {
        self.pairs[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Labeled periodic and antiperiodic eigenvalues of one channel.
///
/// `periodic[nu - 1][n]` is the pair with label `2n`; its `n = 0` entry has
/// `minus = -inf`. `antiperiodic[nu - 1][n - 1]` has label `2n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledEigenvalues {
    pub periodic: [Vec<ZeroPair>; 2],
    pub antiperiodic: [Vec<ZeroPair>; 2],
    /// Intervals `kappa_n = (lambda_{1,2n-1}^-, lambda_{1,2n-1}^+)`.
    pub kappa: Vec<(f64, f64)>,
    pub(crate) abs_fminus: Vec<(f64, f64)>,
}

impl LabeledEigenvalues {
    /// Pair with label `p` for branch `nu`.
    pub fn pair(&self, nu: usize, p: usize) -> Option<&ZeroPair> {
        if p % 2 == 0 {
            self.periodic[nu - 1].get(p / 2)
        } else {
            self.antiperiodic[nu - 1].get(p / 2)
        }
    }
}

pub fn locate_labeled_eigenvalues(
    scan: &HillScan,
    ch: &ChannelParams,
) -> Result<LabeledEigenvalues> {
    labeled_with(scan, &AntiperiodicSet::compute(scan)?, ch)
}

pub(crate) fn labeled_with(
    scan: &HillScan,
    anti: &AntiperiodicSet,
    ch: &ChannelParams,
) -> Result<LabeledEigenvalues> {
    let c = ch.c();
    let mut periodic = [Vec::new(), Vec::new()];
    for nu in 1..=2 {
        let out = &mut periodic[nu - 1];
        let eval = |x: f64| scan.eval_x(x).map(|v| periodic_inside(nu, &v, c));

        // Lowest label: the crossing below the first zero of F.
        let below = scan.tabulate(|v| -periodic_inside(nu, v, c));
        let mut w = Walker::new(&scan.xs, &below, |x| eval(x).map(|f| -f));
        let x0 = scan.eta_x[0];
        let f0 = -eval(x0)?;
        let top = match w.boundary(x0, f0, -1, f64::NEG_INFINITY)? {
            Boundary::Root(x) => x,
            _ => w.extend_left(scan.xs[0], below[0])?.ok_or_else(|| {
                Error::InternalInconsistency(format!("no lowest periodic eigenvalue for nu = {nu}"))
            })?,
        };
        out.push(ZeroPair {
            minus: f64::NEG_INFINITY,
            plus: lambda_of(top),
            double: false,
        });

        let vals = scan.tabulate(|v| periodic_inside(nu, v, c));
        let mut w = Walker::new(&scan.xs, &vals, eval);
        for (i, &mu) in scan.mu_x.iter().enumerate() {
            let lo = scan.eta_x[i];
            let Some(&hi) = scan.eta_x.get(i + 1) else {
                break;
            };
            match w.component(mu, (lo, hi))? {
                Some(comp) => out.push(pair_from_x(comp.lo, comp.hi, comp.double)),
                None => {
                    return Err(Error::CountMismatch {
                        what: format!("periodic eigenvalues nu = {nu}, n = {}", i + 1),
                        found: 0,
                        expected: "a pair between consecutive zeros of F".into(),
                    })
                }
            }
        }
    }
    let kappa = anti.pairs[0].iter().map(|p| (p.minus, p.plus)).collect();
    let labeled = LabeledEigenvalues {
        periodic,
        antiperiodic: anti.pairs.clone(),
        kappa,
        abs_fminus: anti.abs_fminus.clone(),
    };
    check_order(&labeled, scan)?;
    Ok(labeled)
}

/// Both labeled chains must increase; a violation means a missed crossing.
fn check_order(l: &LabeledEigenvalues, scan: &HillScan) -> Result<()> {
    let tol = |x: f64| 1e-9 * x.abs().max(1.0);
    for nu in 0..2 {
        let mut chain = Vec::new();
        let n_max = l.periodic[nu].len().max(l.antiperiodic[nu].len() + 1);
        for n in 0..n_max {
            if n > 0 {
                if let Some(a) = l.antiperiodic[nu].get(n - 1) {
                    chain.push((a.minus, "antiperiodic-"));
                    chain.push((a.plus, "antiperiodic+"));
                }
            }
            if let Some(p) = l.periodic[nu].get(n) {
                if n > 0 {
                    chain.push((p.minus, "periodic-"));
                }
                chain.push((p.plus, "periodic+"));
            }
        }
        for w in chain.windows(2) {
            if w[1].0 < w[0].0 - tol(w[0].0) {
                return Err(Error::CountMismatch {
                    what: format!(
                        "ordering of labeled eigenvalues (nu = {}, {} before {})",
                        nu + 1,
                        w[0].1,
                        w[1].1
                    ),
                    found: 0,
                    expected: format!("{} <= {}", w[0].0, w[1].0),
                });
            }
        }
    }
    for (i, p) in l.antiperiodic[1].iter().enumerate() {
        let q = &l.antiperiodic[0][i];
        if p.minus > q.minus + tol(q.minus) || p.plus < q.plus - tol(q.plus) {
            return Err(Error::CountMismatch {
                what: format!("nesting of antiperiodic pairs at n = {}", i + 1),
                found: 0,
                expected: "kappa inside the nu = 2 pair".into(),
            });
        }
        let eta = scan.landmarks.eta[i];
        if !(q.minus <= eta + tol(eta) && eta <= q.plus + tol(eta)) {
            return Err(Error::InternalInconsistency(format!(
                "eta_{} outside kappa_{}",
                i + 1,
                i + 1
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResonanceKind {
    /// Zeros located by a sign scan of `rho`.
    Regular,
    /// `c = 0`: resonances are not defined.
    RhoZero,
    /// `s = 0`: `rho = 9 c^2 F^2` has a double zero at `eta_n`.
    DoubleAtEta,
}

/// Zeros of `rho` on the closure of `kappa_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Resonance {
    pub n: usize,
    pub kind: ResonanceKind,
    pub zeros: Vec<f64>,
}

impl Resonance {
    pub fn minus(&self) -> Option<f64> {
        self.zeros.first().copied()
    }

    pub fn plus(&self) -> Option<f64> {
        self.zeros.last().copied()
    }
}

pub fn locate_resonances(
    scan: &HillScan,
    ch: &ChannelParams,
    labeled: &LabeledEigenvalues,
) -> Result<Vec<Resonance>> {
    let (c, s) = (ch.c(), ch.s());
    let mut out = Vec::with_capacity(labeled.kappa.len());
    for (i, &(lo, hi)) in labeled.kappa.iter().enumerate() {
        let n = i + 1;
        if c.abs() <= TRIG_ZERO {
            out.push(Resonance {
                n,
                kind: ResonanceKind::RhoZero,
                zeros: vec![],
            });
            continue;
        }
        if s.abs() <= TRIG_ZERO {
            let eta = scan.landmarks.eta[i];
            out.push(Resonance {
                n,
                kind: ResonanceKind::DoubleAtEta,
                zeros: vec![eta, eta],
            });
            continue;
        }
        let rho = |x: f64| scan.eval_x(x).map(|v| rho_of(v.f, v.f_minus, c, s));
        let (xa, xb) = (x_of(lo), x_of(hi));
        let mut xs = vec![xa];
        let mut vals = vec![rho(xa)?];
        let inner_lo = scan.xs.partition_point(|&x| x <= xa);
        let inner_hi = scan.xs.partition_point(|&x| x < xb);
        if inner_hi >= inner_lo + 32 {
            for j in inner_lo..inner_hi {
                let v = &scan.points[j].values;
                xs.push(scan.xs[j]);
                vals.push(rho_of(v.f, v.f_minus, c, s));
            }
        } else {
            for j in 1..32 {
                let x = xa + (xb - xa) * j as f64 / 32.0;
                xs.push(x);
                vals.push(rho(x)?);
            }
        }
        xs.push(xb);
        vals.push(rho(xb)?);
        // rho is smallest near eta_n; both zeros can sit inside one grid cell.
        let xe = x_of(scan.landmarks.eta[i]);
        let at = xs.partition_point(|&x| x < xe);
        if xe > xa && xe < xb && xs[at] != xe {
            xs.insert(at, xe);
            vals.insert(at, rho(xe)?);
        }
        let zeros = roots::grid_roots(&xs, &vals, &mut |x| rho(x))?;
        if zeros.len() % 2 == 1 {
            return Err(Error::CountMismatch {
                what: format!("resonances in kappa_{n}"),
                found: zeros.len(),
                expected: "an even number".into(),
            });
        }
        out.push(Resonance {
            n,
            kind: ResonanceKind::Regular,
            zeros: zeros.into_iter().map(lambda_of).collect(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

/// Which zero set an endpoint was taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    NegInfinity,
    Periodic { nu: usize, n: usize },
    Antiperiodic { nu: usize, n: usize },
    Resonance { n: usize, side: Side },
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        })
    }
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::NegInfinity => f.write_str("-inf"),
            Provenance::Periodic { nu, n } => write!(f, "periodic/{nu}/{n}"),
            Provenance::Antiperiodic { nu, n } => write!(f, "antiperiodic/{nu}/{n}"),
            Provenance::Resonance { n, side } => write!(f, "resonance/{n}/{side}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoint {
    pub value: f64,
    pub tag: Provenance,
}

/// Band endpoints `E_{nu,p}^{+-}` of a channel.
///
/// `even[nu - 1][n]` carries label `2n`, `odd[nu - 1][n - 1]` label `2n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandEndpoints {
    pub even: [Vec<(Endpoint, Endpoint)>; 2],
    pub odd: [Vec<(Endpoint, Endpoint)>; 2],
}

impl BandEndpoints {
    pub fn get(&self, nu: usize, p: usize) -> Option<&(Endpoint, Endpoint)> {
        if p % 2 == 0 {
            self.even[nu - 1].get(p / 2)
        } else {
            self.odd[nu - 1].get(p / 2)
        }
    }
}

pub fn band_endpoints(
    _scan: &HillScan,
    ch: &ChannelParams,
    labeled: &LabeledEigenvalues,
    resonances: &[Resonance],
) -> Result<BandEndpoints> {
    let c2 = ch.c().powi(2);
    let mut even = [Vec::new(), Vec::new()];
    for nu in 1..=2 {
        for (n, p) in labeled.periodic[nu - 1].iter().enumerate() {
            let tag = Provenance::Periodic { nu, n };
            let lo_tag = if n == 0 { Provenance::NegInfinity } else { tag };
            even[nu - 1].push((
                Endpoint {
                    value: p.minus,
                    tag: lo_tag,
                },
                Endpoint { value: p.plus, tag },
            ));
        }
    }
    let odd2 = labeled.antiperiodic[1]
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let tag = Provenance::Antiperiodic { nu: 2, n: i + 1 };
            (
                Endpoint {
                    value: p.minus,
                    tag,
                },
                Endpoint { value: p.plus, tag },
            )
        })
        .collect();
    let mut odd1 = Vec::new();
    for (i, p) in labeled.antiperiodic[0].iter().enumerate() {
        let n = i + 1;
        let (fm_lo, fm_hi) = labeled.abs_fminus[i];
        let res = resonances.get(i);
        let pick = |value: f64, fm: f64, side: Side| -> Result<Endpoint> {
            if fm - c2 >= 0.0 {
                return Ok(Endpoint {
                    value,
                    tag: Provenance::Antiperiodic { nu: 1, n },
                });
            }
            let r = res.and_then(|r| {
                if side == Side::Minus {
                    r.minus()
                } else {
                    r.plus()
                }
            });
            match r {
                Some(r) => Ok(Endpoint {
                    value: r,
                    tag: Provenance::Resonance { n, side },
                }),
                None => Err(Error::CountMismatch {
                    what: format!("resonances in kappa_{n}"),
                    found: 0,
                    expected: "at least two zeros where v < 0".into(),
                }),
            }
        };
        odd1.push((
            pick(p.minus, fm_lo, Side::Minus)?,
            pick(p.plus, fm_hi, Side::Plus)?,
        ));
    }
    Ok(BandEndpoints {
        even,
        odd: [odd1, odd2],
    })
}
