//! Embedding of the armchair tube graph and the magnetic phases it induces.
//!
//! Vertices carry labels `(n, j, k)`: `n` is the axial cell, `j = 1..=6` the
//! slot inside the cell and `k = 0..N-1` the position around the
//! circumference. Slots 2/5 and 3/6 name the same points; they differ only in
//! which outgoing edge they start.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

/// Label of a vertex or of the edge that starts there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub n: i64,
    pub j: u8,
    pub k: usize,
}

impl Label {
    pub fn new(n: i64, j: u8, k: usize) -> Self {
        Label { n, j, k }
    }
}

/// Radii, offsets and angles fixed by `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubeConstants {
    pub n_around: usize,
    pub radius: f64,
    pub r1: f64,
    pub r2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub height: f64,
}

impl TubeConstants {
    pub fn new(n_around: usize) -> Result<Self> {
        if n_around < 2 {
            return Err(Error::GeometryUndefined(n_around));
        }
        let phi1 = PI / n_around as f64;
        let radius = (phi1.cos() + 1.25).sqrt() / phi1.sin();
        let rp = |p: f64| ((p * radius).powi(2) - 1.0).sqrt();
        let (r1, r2) = (rp(1.0), rp(2.0));
        let height = (2.0 + r1 * r2 - 2.0 * radius * radius).sqrt();
        Ok(TubeConstants {
            n_around,
            radius,
            r1,
            r2,
            alpha: (0.5 / radius).asin(),
            beta: (1.0 / radius).asin(),
            height,
        })
    }

    fn phi(&self, j: i64) -> f64 {
        PI * j as f64 / self.n_around as f64
    }

    fn ring(&self, z: f64, angle: f64) -> Vec3 {
        [self.radius * angle.cos(), self.radius * angle.sin(), z]
    }

    /// Position of vertex `(n, j, k)`; `k` may exceed `N - 1`.
    pub fn vertex(&self, n: i64, j: u8, k: i64) -> Vec3 {
        let h = self.height;
        let base = self.phi(2 * k);
        match j {
            1 => self.ring(2.0 * n as f64 * h, base),
            4 => self.ring(2.0 * n as f64 * h, 2.0 * self.beta + base),
            2 | 5 => self.ring((2 * n + 1) as f64 * h, self.beta - self.alpha + base),
            3 | 6 => self.ring((2 * n + 1) as f64 * h, self.phi(2 * k + 1)),
            _ => panic!("vertex slot {j} out of range 1..=6"),
        }
    }

    /// Edge vector starting at `(n, j, k)`.
    pub fn edge(&self, n: i64, j: u8, k: i64) -> Vec3 {
        let (head, tail) = match j {
            1..=3 => (self.vertex(n, j + 1, k), self.vertex(n, j, k)),
            4 => (self.vertex(n, 1, k + 1), self.vertex(n, 4, k)),
            5 => (self.vertex(n + 1, 1, k), self.vertex(n, 5, k)),
            6 => (self.vertex(n + 1, 4, k), self.vertex(n, 6, k)),
            _ => panic!("edge slot {j} out of range 1..=6"),
        };
        sub(head, tail)
    }
}

pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[derive(Debug, Clone)]
pub struct NanotubeGeometry {
    pub constants: TubeConstants,
    pub cells: RangeInclusive<i64>,
    pub vertices: BTreeMap<Label, Vec3>,
    pub edges: BTreeMap<Label, Vec3>,
}

impl NanotubeGeometry {
    /// Rotation by `pi/N` about the axis followed by a shift of one height.
    pub fn screw(&self, r: Vec3) -> Vec3 {
        let t = PI / self.constants.n_around as f64;
        let (s, c) = t.sin_cos();
        [
            c * r[0] - s * r[1],
            s * r[0] + c * r[1],
            r[2] + self.constants.height,
        ]
    }
}

/// Builds vertex positions and edge vectors for the cells in `cells`.
pub fn build_geometry(n_around: usize, cells: RangeInclusive<i64>) -> Result<NanotubeGeometry> {
    let constants = TubeConstants::new(n_around)?;
    let mut vertices = BTreeMap::new();
    let mut edges = BTreeMap::new();
    for n in cells.clone() {
        for k in 0..n_around {
            for j in 1..=6u8 {
                let label = Label::new(n, j, k);
                vertices.insert(label, constants.vertex(n, j, k as i64));
                edges.insert(label, constants.edge(n, j, k as i64));
            }
        }
    }
    Ok(NanotubeGeometry {
        constants,
        cells,
        vertices,
        edges,
    })
}

/// Circulations `a1`, `a2` of the vector potential along the two edge types.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagneticPhases {
    pub a1: f64,
    pub a2: f64,
}

impl MagneticPhases {
    pub fn new(a1: f64, a2: f64) -> Self {
        MagneticPhases { a1, a2 }
    }

    /// The total phase `a = a1 + a2` that enters every fiber operator.
    pub fn a(&self) -> f64 {
        self.a1 + self.a2
    }

    /// Phase on edge slot `j`.
    pub fn edge_phase(&self, j: u8) -> f64 {
        match j {
            1 | 3 | 6 => self.a1,
            5 => -self.a1,
            2 | 4 => self.a2,
            _ => panic!("edge slot {j} out of range 1..=6"),
        }
    }
}

pub fn magnetic_phases(b: f64, n_around: usize) -> Result<MagneticPhases> {
    let c = TubeConstants::new(n_around)?;
    Ok(MagneticPhases {
        a1: b * (c.r2 - c.r1) / 4.0,
        a2: b * c.r2 / 4.0,
    })
}

/// Tangential component of `A = (B/2) e3 x r` along edge `omega` at
/// parameter `t`. The result does not depend on `t`.
pub fn project_vector_potential(
    geometry: &NanotubeGeometry,
    b: f64,
    omega: Label,
    t: f64,
) -> Option<f64> {
    let r = geometry.vertices.get(&omega)?;
    let e = geometry.edges.get(&omega)?;
    let p = [r[0] + t * e[0], r[1] + t * e[1]];
    Some(0.5 * b * (-p[1] * e[0] + p[0] * e[1]))
}
