//! Analytic domain primitives and their grid rasterizations.
//!
//! A [`DomainSpec`] is the serialized, dimension-erased description of a
//! domain (ball, ellipsoid, annulus, union of balls). [`Shape`] is its typed
//! counterpart with analytic inside tests, signed distances, volumes and
//! boundary parameterizations. [`GridDomain`] is a rasterization on a uniform
//! Cartesian grid carrying an inside indicator, a signed distance per cell and
//! boundary samples with outward normals.

mod grid;
mod sampling;
mod spec;

pub use grid::{GridDomain, GridGeometry};
pub use sampling::{boundary_samples, BoundaryPoint};
pub use spec::{BallComponent, DomainSpec, Shape};

use crate::error::{Error, Result};

/// Volume of the unit ball in dimension `n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => panic!("unsupported dimension {n}"),
    }
}

/// Radius of the ball in dimension `n` with the given volume.
pub fn equivalent_radius(volume: f64, n: usize) -> Result<f64> {
    if !(volume > 0.0) {
        return Err(Error::Precondition(format!(
            "equivalent radius needs positive volume, got {volume}"
        )));
    }
    Ok((volume / unit_ball_volume(n)).powf(1.0 / n as f64))
}

/// Rasterizes `spec` on a grid with `resolution` cells along the longest
/// bounding-box axis, padding the box by 4h on every side.
pub fn rasterize<const N: usize>(spec: &DomainSpec, resolution: usize) -> Result<GridDomain<N>> {
    grid::rasterize::<N>(spec, resolution)
}

/// Rasterizes `spec` on an existing grid geometry so that masks from several
/// domains can be combined cellwise.
pub fn rasterize_with<const N: usize>(
    spec: &DomainSpec,
    geom: &GridGeometry<N>,
) -> Result<GridDomain<N>> {
    grid::rasterize_with::<N>(spec, geom)
}
