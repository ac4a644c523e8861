//! Numerical toolkit for the analytic-content domain constant λ₁ of smoothly
//! bounded domains in ℝ² and ℝ³.
//!
//! The crate provides:
//!
//! * analytic domain primitives (balls, ellipsoids, annuli, unions of balls)
//!   and their rasterizations ([`geometry`]),
//! * grid potential theory: Dirichlet Poisson solves, gradients and
//!   mollification ([`potential`]),
//! * partial balayage of a measure onto a density cap via the obstacle-problem
//!   linear complementarity formulation ([`balayage`]),
//! * discrete Brenier maps between uniform point clouds through exact
//!   minimum-cost assignment ([`transport`]),
//! * the λ₁ minimax solver over harmonic gradient fields together with the
//!   constructive transport/balayage upper bound ([`lambda1`]),
//! * closed-form reference values and minimizers ([`oracles`]),
//! * the `GFD1` binary grid-field dump format ([`gfd`]).
//!
//! All solvers are deterministic: randomness is routed through caller-provided
//! seeds and results are independent of thread schedules.

pub mod balayage;
pub mod error;
pub mod geometry;
pub mod gfd;
pub mod la;
pub mod lambda1;
pub mod oracles;
pub mod potential;
pub mod transport;

pub use error::{Error, Result};
pub use geometry::{
    boundary_samples, equivalent_radius, rasterize, rasterize_with, unit_ball_volume,
    BoundaryPoint, DomainSpec, GridDomain, GridGeometry, Shape,
};
pub use potential::{gradient, mollify_density, mollify_field, solve_dirichlet_poisson};
pub use potential::{MeasureDensity, ScalarField, VectorField};
