//! Competitive-marker regularization of multi-phase vortex patches for the
//! 2D incompressible Euler equation on the torus.
//!
//! A multi-phase patch is encoded by `K` scalar markers transported by the
//! flow; at each point the vorticity is a softmax mixture of the phase
//! levels, `ω^β = Σ_k c_k π_k^β`, which tends to the sharp patch as `β → ∞`.
//! The crate provides the pseudo-spectral solver, the gating rules, interface
//! geometry and the convergence diagnostics.

pub mod diagnostics;
pub mod error;
pub mod gating;
pub mod geometry;
pub mod grid;
pub mod measure;
pub mod preset;
pub mod spectral;
pub mod transport;

/// Crate version, echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use gating::{MarkerSet, PhaseConfig, WeightField};
pub use geometry::{DistanceField, Point, Polyline, TieSet, TieSetNetwork};
pub use grid::{Grid, ScalarField, VectorField};
pub use measure::Measured;
pub use spectral::{Spectral, Spectrum};
pub use transport::{Mode, SimState, StepControl, Trajectory, Transport};
