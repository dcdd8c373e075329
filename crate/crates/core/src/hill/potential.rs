use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EVEN_TOL: f64 = 1e-10;

/// Shape of a 1-periodic edge potential on `[0, 1]`.
///
/// In files the variant is selected by a `type` key. Fourier `cos[m]`
/// multiplies `cos(2 pi m t)` starting at `m = 0`; `sin[i]` multiplies
/// `sin(2 pi (i + 1) t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shape {
    /// Samples `q(i / G)` for `i < G`, linearly interpolated and wrapped periodically.
    Samples { values: Vec<f64> },
    /// Constant values between increasing interior breakpoints.
    Piecewise {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    Fourier {
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    /// Point interactions `sum sigma_j delta(t - c_j)`.
    Delta {
        positions: Vec<f64>,
        strengths: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(default)]
    pub mean_shift: f64,
}

/// A constant stretch of potential, optionally followed by a jump in the
/// derivative of the solution.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Segment {
    pub start: f64,
    pub end: f64,
    pub value: f64,
    pub jump: f64,
}

impl Potential {
    pub fn new(shape: Shape) -> Result<Self> {
        let p = Potential {
            shape,
            mean_shift: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn zero() -> Self {
        Potential {
            shape: Shape::Fourier {
                cos: vec![0.0],
                sin: vec![],
            },
            mean_shift: 0.0,
        }
    }

    pub fn constant(c: f64) -> Self {
        Potential {
            shape: Shape::Fourier {
                cos: vec![c],
                sin: vec![],
            },
            mean_shift: 0.0,
        }
    }

    /// `q(t) = sum cos[m] cos(2 pi m t) + sum sin[i] sin(2 pi (i+1) t)`.
    pub fn fourier(cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        Self::new(Shape::Fourier { cos, sin })
    }

    pub fn samples(values: Vec<f64>) -> Result<Self> {
        Self::new(Shape::Samples { values })
    }

    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(Shape::Piecewise {
            breakpoints,
            values,
        })
    }

    pub fn delta(positions: Vec<f64>, strengths: Vec<f64>) -> Result<Self> {
        Self::new(Shape::Delta {
            positions,
            strengths,
        })
    }

    /// Single point interaction of strength `1/eps` at `1/2 + 2 eps`.
    pub fn delta_eps(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.25) {
            return Err(Error::InvalidPotential(format!(
                "eps = {eps} must lie in (0, 1/4)"
            )));
        }
        Self::delta(vec![0.5 + 2.0 * eps], vec![1.0 / eps])
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.mean_shift = shift;
        self
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let p: Potential =
            toml::from_str(text).map_err(|e| Error::InvalidPotential(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("potential serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidPotential(m));
        if !self.mean_shift.is_finite() {
            return bad("mean_shift must be finite".into());
        }
        match &self.shape {
            Shape::Samples { values } => {
                if values.is_empty() {
                    return bad("samples need at least one value".into());
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("samples must be finite".into());
                }
            }
            Shape::Piecewise {
                breakpoints,
                values,
            } => {
                if values.len() != breakpoints.len() + 1 {
                    return bad(format!(
                        "{} breakpoints need {} values, got {}",
                        breakpoints.len(),
                        breakpoints.len() + 1,
                        values.len()
                    ));
                }
                if !strictly_inside(breakpoints) {
                    return bad("breakpoints must increase strictly inside (0, 1)".into());
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("piece values must be finite".into());
                }
            }
            Shape::Fourier { cos, sin } => {
                if cos.is_empty() && sin.is_empty() {
                    return bad("fourier potential needs coefficients".into());
                }
                if cos.iter().chain(sin).any(|v| !v.is_finite()) {
                    return bad("fourier coefficients must be finite".into());
                }
            }
            Shape::Delta {
                positions,
                strengths,
            } => {
                if positions.len() != strengths.len() || positions.is_empty() {
                    return bad(
                        "delta terms need matching, non-empty positions and strengths".into(),
                    );
                }
                if !strictly_inside(positions) {
                    return bad("delta positions must increase strictly inside (0, 1)".into());
                }
                if strengths.iter().any(|v| !v.is_finite()) {
                    return bad("delta strengths must be finite".into());
                }
            }
        }
        Ok(())
    }

    /// Average of `q` over one period.
    pub fn mean(&self) -> f64 {
        self.mean_shift
            + match &self.shape {
                Shape::Samples { values } => values.iter().sum::<f64>() / values.len() as f64,
                Shape::Piecewise { .. } => {
                    self.segments()
                        .iter()
                        .map(|s| s.value * (s.end - s.start))
                        .sum::<f64>()
                        - self.mean_shift
                }
                Shape::Fourier { cos, .. } => cos.first().copied().unwrap_or(0.0),
                Shape::Delta { strengths, .. } => strengths.iter().sum(),
            }
    }

    pub fn is_even(&self) -> bool {
        match &self.shape {
            Shape::Samples { values } => {
                let g = values.len();
                (0..g).all(|i| (values[i] - values[(g - i) % g]).abs() <= EVEN_TOL)
            }
            Shape::Piecewise {
                breakpoints,
                values,
            } => {
                let k = breakpoints.len();
                (0..k).all(|i| (breakpoints[i] + breakpoints[k - 1 - i] - 1.0).abs() <= EVEN_TOL)
                    && (0..=k).all(|i| (values[i] - values[k - i]).abs() <= EVEN_TOL)
            }
            Shape::Fourier { sin, .. } => sin.iter().all(|s| s.abs() <= EVEN_TOL),
            Shape::Delta {
                positions,
                strengths,
            } => {
                let k = positions.len();
                (0..k).all(|i| {
                    (positions[i] + positions[k - 1 - i] - 1.0).abs() <= EVEN_TOL
                        && (strengths[i] - strengths[k - 1 - i]).abs() <= EVEN_TOL
                })
            }
        }
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self.shape, Shape::Samples { .. } | Shape::Fourier { .. })
    }

    pub fn has_delta(&self) -> bool {
        matches!(self.shape, Shape::Delta { .. })
    }

    /// Pointwise value; `None` for point interactions.
    pub fn value(&self, t: f64) -> Option<f64> {
        let t = t.rem_euclid(1.0);
        let v = match &self.shape {
            Shape::Samples { values } => {
                let g = values.len();
                let s = t * g as f64;
                let i = (s.floor() as usize).min(g - 1);
                let w = s - i as f64;
                (1.0 - w) * values[i] + w * values[(i + 1) % g]
            }
            Shape::Piecewise {
                breakpoints,
                values,
            } => values[breakpoints.partition_point(|&b| b <= t)],
            Shape::Fourier { cos, sin } => {
                let w = 2.0 * PI * t;
                let c: f64 = cos
                    .iter()
                    .enumerate()
                    .map(|(m, c)| c * (w * m as f64).cos())
                    .sum();
                let s: f64 = sin
                    .iter()
                    .enumerate()
                    .map(|(i, s)| s * (w * (i + 1) as f64).sin())
                    .sum();
                c + s
            }
            Shape::Delta { .. } => return None,
        };
        Some(v + self.mean_shift)
    }

    /// Interior nodes where the smooth part is only piecewise smooth.
    pub(crate) fn kinks(&self) -> usize {
        match &self.shape {
            Shape::Samples { values } => values.len(),
            _ => 1,
        }
    }

    /// Exact segment decomposition for piecewise-constant and delta shapes.
    pub(crate) fn segments(&self) -> Vec<Segment> {
        match &self.shape {
            Shape::Piecewise {
                breakpoints,
                values,
            } => {
                let mut edges = vec![0.0];
                edges.extend_from_slice(breakpoints);
                edges.push(1.0);
                values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| Segment {
                        start: edges[i],
                        end: edges[i + 1],
                        value: v + self.mean_shift,
                        jump: 0.0,
                    })
                    .collect()
            }
            Shape::Delta {
                positions,
                strengths,
            } => {
                let mut out = Vec::with_capacity(positions.len() + 1);
                let mut start = 0.0;
                for (c, s) in positions.iter().zip(strengths) {
                    out.push(Segment {
                        start,
                        end: *c,
                        value: self.mean_shift,
                        jump: *s,
                    });
                    start = *c;
                }
                out.push(Segment {
                    start,
                    end: 1.0,
                    value: self.mean_shift,
                    jump: 0.0,
                });
                out
            }
            _ => Vec::new(),
        }
    }

    /// A number below the bottom of the periodic and antiperiodic spectra.
    pub fn spectral_floor(&self) -> f64 {
        match &self.shape {
            Shape::Delta { strengths, .. } => {
                let neg: f64 = strengths.iter().filter(|s| **s < 0.0).map(|s| -s).sum();
                self.mean_shift - neg * (neg + 1.0) - 1.0
            }
            _ => self.range().0 - 1.0,
        }
    }

    /// Bounds of the bounded part of `q`.
    pub fn range(&self) -> (f64, f64) {
        let (lo, hi) = match &self.shape {
            Shape::Samples { values } | Shape::Piecewise { values, .. } => (
                values.iter().cloned().fold(f64::INFINITY, f64::min),
                values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            ),
            Shape::Fourier { cos, sin } => {
                let c0 = cos.first().copied().unwrap_or(0.0);
                let amp: f64 = cos.iter().skip(1).chain(sin).map(|c| c.abs()).sum();
                (c0 - amp, c0 + amp)
            }
            Shape::Delta { .. } => (0.0, 0.0),
        };
        (lo + self.mean_shift, hi + self.mean_shift)
    }

    /// Number of rank-one point terms; each shifts eigenvalue counts by at most one.
    pub(crate) fn delta_count(&self) -> usize {
        match &self.shape {
            Shape::Delta { positions, .. } => positions.len(),
            _ => 0,
        }
    }

    /// L2 norm over one period, with point terms contributing their strengths.
    pub fn l2_norm(&self) -> f64 {
        match &self.shape {
            Shape::Delta { strengths, .. } => {
                strengths.iter().map(|s| s.abs()).sum::<f64>() + self.mean_shift.abs()
            }
            Shape::Fourier { cos, sin } => {
                let c0 = cos.first().copied().unwrap_or(0.0) + self.mean_shift;
                let rest: f64 = cos.iter().skip(1).chain(sin).map(|c| c * c / 2.0).sum();
                (c0 * c0 + rest).sqrt()
            }
            _ => {
                let m = 4096;
                let s: f64 = (0..m)
                    .map(|i| self.value((i as f64 + 0.5) / m as f64).unwrap().powi(2))
                    .sum();
                (s / m as f64).sqrt()
            }
        }
    }
}

fn strictly_inside(xs: &[f64]) -> bool {
    xs.iter().all(|x| *x > 0.0 && *x < 1.0) && xs.windows(2).all(|w| w[0] < w[1])
}
