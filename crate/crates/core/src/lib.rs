//! Discontinuous Galerkin discretizations on polygonal meshes for wave
//! propagation in elastic, poro-elastic (low-frequency Biot) and coupled
//! poro-elasto-acoustic media.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`] builds and classifies polygonal meshes (clipped Voronoi with
//!   Lloyd relaxation, structured grids, file IO) and reports regularity.
//! * [`fespace`] provides bounding-box Legendre bases and polygon quadrature.
//! * [`materials`] holds piecewise-constant coefficients.
//! * [`forms`] assembles the interior-penalty operators into a [`forms::BlockSystem`]
//!   of the form `M X'' + D X' + A X = S(t)`.
//! * [`sources`] provides wavelets, point sources and manufactured forcings.
//! * [`timeint`] marches the block system with Newmark-beta or leap-frog.
//! * [`analysis`] computes DG and energy norms, errors and convergence rates.
//! * [`verification`] wires everything into the manufactured-solution cases.

pub mod analysis;
pub mod error;
pub mod fespace;
pub mod forms;
pub mod linalg;
pub mod materials;
pub mod mesh;
pub mod sources;
pub mod timeint;
pub mod verification;

pub use error::{Error, Result};

/// A point (or vector) in the plane.
pub type Point = [f64; 2];
