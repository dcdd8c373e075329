//! Grid scanning and bracketing shared by the Hill and channel solvers.
//!
//! All searches run in the sign-extended parameter `x = sign(lambda) sqrt|lambda|`.

use crate::error::Result;

pub(crate) const X_TOL: f64 = 1e-12;
pub(crate) const TANGENT_TOL: f64 = 1e-12;
const SLOPE_STEP: f64 = 1e-4;

pub(crate) fn lambda_of(x: f64) -> f64 {
    x * x.abs()
}

pub(crate) fn x_of(lambda: f64) -> f64 {
    lambda.signum() * lambda.abs().sqrt()
}

/// Bisection on `[a, b]` where `f(a)` and `f(b)` differ in sign; `fa = f(a)`.
pub(crate) fn bisect<F>(f: &mut F, mut a: f64, mut b: f64, fa: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inside_a = fa >= 0.0;
    while (b - a).abs() > X_TOL {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if (f(m)? >= 0.0) == inside_a {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Location of the maximum of `f` on `[lo, hi]`, found from the sign of a
/// symmetric difference. Falls back to an endpoint when `f` is monotone there.
pub(crate) fn local_max<F>(f: &mut F, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let slope = |x: f64, f: &mut F| -> Result<f64> { Ok(f(x + SLOPE_STEP)? - f(x - SLOPE_STEP)?) };
    let (s_lo, s_hi) = (slope(lo, f)?, slope(hi, f)?);
    if s_lo <= 0.0 && s_hi <= 0.0 {
        return Ok(lo);
    }
    if s_lo >= 0.0 && s_hi >= 0.0 {
        return Ok(hi);
    }
    if s_lo < 0.0 {
        // A minimum, not a maximum, sits in between; report the larger end.
        return Ok(if f(lo)? >= f(hi)? { lo } else { hi });
    }
    while hi - lo > X_TOL {
        let m = 0.5 * (lo + hi);
        if m == lo || m == hi {
            break;
        }
        if slope(m, f)? > 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Zeros of `f` located from sign changes of tabulated values.
pub(crate) fn grid_roots<F>(xs: &[f64], vals: &[f64], f: &mut F) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut out = Vec::new();
    for i in 0..xs.len().saturating_sub(1) {
        if vals[i] == 0.0 {
            out.push(xs[i]);
        } else if vals[i] * vals[i + 1] < 0.0 {
            out.push(bisect(f, xs[i], xs[i + 1], vals[i])?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Boundary {
    Root(f64),
    /// The walk reached the hard limit while still inside.
    Limit,
    /// The walk left the tabulated range while still inside.
    OffGrid,
}

/// Maximal interval around an anchor on which a function stays nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Component {
    pub lo: f64,
    pub hi: f64,
    pub double: bool,
}

/// Walks tabulated values of a function outward from an anchor and refines
/// the first sign change with exact evaluations.
pub(crate) struct Walker<'a, F> {
    pub xs: &'a [f64],
    pub vals: &'a [f64],
    pub f: F,
}

impl<'a, F> Walker<'a, F>
where
    F: FnMut(f64) -> Result<f64>,
{
    pub fn new(xs: &'a [f64], vals: &'a [f64], f: F) -> Self {
        Walker { xs, vals, f }
    }

    fn dx(&self) -> f64 {
        if self.xs.len() > 1 {
            self.xs[1] - self.xs[0]
        } else {
            1e-2
        }
    }

    /// First point beyond `x0` (direction `dir`) where the function turns negative.
    pub fn boundary(&mut self, x0: f64, f0: f64, dir: i8, limit: f64) -> Result<Boundary> {
        let (mut px, mut pf) = (x0, f0);
        let start = self.xs.partition_point(|&x| x <= x0);
        let n = self.xs.len();
        let first_left = self.xs[..start].partition_point(|&x| x < x0);
        let count = if dir > 0 { n - start } else { first_left };
        for step in 0..count {
            let i = if dir > 0 {
                start + step
            } else {
                first_left - 1 - step
            };
            let x = self.xs[i];
            let beyond = if dir > 0 { x >= limit } else { x <= limit };
            if beyond {
                let fl = (self.f)(limit)?;
                if fl < 0.0 {
                    return Ok(Boundary::Root(bisect(&mut self.f, px, limit, pf)?));
                }
                return Ok(Boundary::Limit);
            }
            let v = self.vals[i];
            if v < 0.0 {
                return Ok(Boundary::Root(bisect(&mut self.f, px, x, pf)?));
            }
            px = x;
            pf = v;
        }
        Ok(Boundary::OffGrid)
    }

    /// Continues a leftward walk past the table with growing steps.
    pub fn extend_left(&mut self, x0: f64, f0: f64) -> Result<Option<f64>> {
        let (mut px, mut pf) = (x0, f0);
        let mut step = self.dx();
        for _ in 0..60 {
            let x = px - step;
            let v = (self.f)(x)?;
            if v < 0.0 {
                return Ok(Some(bisect(&mut self.f, px, x, pf)?));
            }
            px = x;
            pf = v;
            step *= 1.5;
        }
        Ok(None)
    }

    /// Component of `{f >= 0}` around `anchor`, bounded by `limits`.
    ///
    /// An anchor value within `TANGENT_TOL` of zero triggers a local search;
    /// a maximum that also fails to clear the tolerance is a double zero.
    pub fn component(&mut self, anchor: f64, limits: (f64, f64)) -> Result<Option<Component>> {
        let mut center = anchor;
        let mut fc = (self.f)(anchor)?;
        if fc <= TANGENT_TOL {
            let w = self.dx();
            let probes = 8;
            for i in -probes..=probes {
                let x = anchor + w * i as f64 / probes as f64;
                if x <= limits.0 || x >= limits.1 {
                    continue;
                }
                let v = (self.f)(x)?;
                if v > fc {
                    center = x;
                    fc = v;
                }
            }
            if fc <= TANGENT_TOL {
                let h = w / probes as f64;
                let lo = (center - h).max(limits.0);
                let hi = (center + h).min(limits.1);
                center = local_max(&mut self.f, lo, hi)?;
                fc = (self.f)(center)?;
                if fc <= TANGENT_TOL {
                    return Ok(Some(Component {
                        lo: center,
                        hi: center,
                        double: true,
                    }));
                }
            }
        }
        let hi = match self.boundary(center, fc, 1, limits.1)? {
            Boundary::Root(x) => x,
            _ => return Ok(None),
        };
        let lo = match self.boundary(center, fc, -1, limits.0)? {
            Boundary::Root(x) => x,
            Boundary::OffGrid => match self
                .extend_left(self.xs.first().copied().unwrap_or(center).min(center), fc)?
            {
                Some(x) => x,
                None => return Ok(None),
            },
            Boundary::Limit => return Ok(None),
        };
        Ok(Some(Component {
            lo,
            hi,
            double: false,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(f: impl Fn(f64) -> f64, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let n = ((b - a) / 0.01).round() as usize;
        let xs: Vec<f64> = (0..=n).map(|i| a + 0.01 * i as f64).collect();
        let vs = xs.iter().map(|&x| f(x)).collect();
        (xs, vs)
    }

    #[test]
    fn finds_component_boundaries() {
        let g = |x: f64| 0.25 - (x - 1.0) * (x - 1.0);
        let (xs, vs) = table(g, -1.0, 3.0);
        let mut w = Walker::new(&xs, &vs, |x| Ok(g(x)));
        let c = w.component(1.0, (-1.0, 3.0)).unwrap().unwrap();
        assert!((c.lo - 0.5).abs() < 1e-11 && (c.hi - 1.5).abs() < 1e-11);
        assert!(!c.double);
    }

    #[test]
    fn tangency_becomes_a_double_zero() {
        let g = |x: f64| -(x - 2.003_7) * (x - 2.003_7);
        let (xs, vs) = table(g, 0.0, 4.0);
        let mut w = Walker::new(&xs, &vs, |x| Ok(g(x)));
        let c = w.component(2.0, (0.0, 4.0)).unwrap().unwrap();
        assert!(c.double);
        assert!((c.lo - 2.003_7).abs() < 1e-9);
    }

    #[test]
    fn small_positive_bump_near_anchor_is_expanded() {
        let g = |x: f64| 1e-4 - (x - 2.004) * (x - 2.004);
        let (xs, vs) = table(g, 0.0, 4.0);
        let mut w = Walker::new(&xs, &vs, |x| Ok(g(x)));
        let c = w.component(1.995, (0.0, 4.0)).unwrap().unwrap();
        assert!((c.lo - 1.994).abs() < 1e-11 && (c.hi - 2.014).abs() < 1e-11);
    }

    #[test]
    fn leftward_walk_leaves_the_table() {
        let g = |x: f64| x + 5.0;
        let (xs, vs) = table(g, -1.0, 1.0);
        let mut w = Walker::new(&xs, &vs, |x| Ok(g(x)));
        assert_eq!(
            w.boundary(0.0, 5.0, -1, f64::NEG_INFINITY).unwrap(),
            Boundary::OffGrid
        );
        let x = w.extend_left(-1.0, 4.0).unwrap().unwrap();
        assert!((x + 5.0).abs() < 1e-11);
    }

    #[test]
    fn sign_changes_are_refined() {
        let (xs, vs) = table(f64::sin, 0.5, 10.0);
        let r = grid_roots(&xs, &vs, &mut |x| Ok(x.sin())).unwrap();
        assert_eq!(r.len(), 3);
        assert!((r[2] - 3.0 * std::f64::consts::PI).abs() < 1e-11);
    }
}
