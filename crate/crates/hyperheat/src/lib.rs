//! Heat flow on hyperbolic space H^d, at desk scale.
//!
//! Solutions of the heat equation on H^d do not settle into the flat-space
//! Gaussian picture: the volume of balls grows exponentially, mass drifts to
//! radius (d-1)t, and the correct long-time descriptions are Gaussian-type
//! profiles in a moving, self-similar frame. This crate provides the pieces
//! needed to observe those asymptotics numerically:
//!
//! - [`hypgeo`]: coordinates, distances and measure weights on H^d;
//! - [`quad`]: one-dimensional quadrature building blocks;
//! - [`heatkernel`]: the radial heat kernel G_d for 2 <= d <= 7, in log space;
//! - [`profiles`]: the limiting and transient equilibrium profiles, the
//!   memory function and directional masses;
//! - [`datum`]: initial data (tables and smooth compactly supported atoms);
//! - [`solvers`]: Crank–Nicolson solvers on moving windows, plus exact
//!   superposition and convolution representations used as cross-checks;
//! - [`entropy`]: the self-similar change of variables, relative entropy,
//!   entropy production, and the functional inequalities tying them together;
//! - [`fit`]: convergence-rate regression on norm series;
//! - [`experiment`]: end-to-end experiments with CSV/JSON/SVG artifacts;
//! - [`output`]: the deterministic writers behind those artifacts.

pub mod datum;
pub mod entropy;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod heatkernel;
pub mod hypgeo;
pub mod output;
pub mod profiles;
pub mod quad;
pub mod solvers;

pub use error::{Error, Result};
pub use hypgeo::Dimension;
