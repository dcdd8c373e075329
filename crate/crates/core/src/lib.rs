//! Spectral toolkit for periodic magnetic Schrödinger operators on armchair
//! carbon nanotube graphs in a uniform axial field.
//!
//! The pipeline runs bottom-up: [`geometry`] turns a field strength into edge
//! phases, [`hill`] solves the edge ODE, [`lyapunov`] combines the Hill data
//! into the fiber Lyapunov branches, and [`spectrum`] locates, labels and
//! classifies band edges and gaps. [`flatband`] builds the compactly supported
//! Dirichlet eigenfunctions and [`oracle`] provides independent cross-checks.

pub mod cli;
pub mod error;
pub mod flatband;
pub mod geometry;
pub mod hill;
pub mod lyapunov;
pub mod oracle;
pub(crate) mod roots;
pub mod spectrum;

pub use error::{Error, Result};
