//! Quasi-uniform boundary sampling of analytic domains.

use super::spec::{DomainSpec, Shape};
use crate::error::{Error, Result};
use crate::la::{self, Point};

/// A boundary point with its outward unit normal.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryPoint<const N: usize> {
    pub point: Point<N>,
    pub normal: Point<N>,
}

/// Quasi-uniform boundary samples of `spec`: uniform in parameter angle for
/// N = 2, Fibonacci-sphere points mapped through the parameterization for
/// N = 3. Every boundary component receives at least 32 samples; annuli
/// sample both spheres, unions sample the exposed part of each sphere.
pub fn boundary_samples<const N: usize>(
    spec: &DomainSpec,
    count: usize,
) -> Result<Vec<BoundaryPoint<N>>> {
    let shape = spec.typed::<N>()?;
    boundary_samples_shape(&shape, count)
}

pub(super) fn boundary_samples_shape<const N: usize>(
    shape: &Shape<N>,
    count: usize,
) -> Result<Vec<BoundaryPoint<N>>> {
    let mut out = Vec::with_capacity(count);
    match shape {
        Shape::Ball { center, r } => {
            sphere_samples(center, *r, count.max(32), false, &mut out);
        }
        Shape::Ellipsoid { center, semi_axes } => {
            ellipsoid_samples(center, semi_axes, count.max(32), &mut out);
        }
        Shape::Annulus {
            center,
            inner,
            outer,
        } => {
            // Split proportionally to each component's surface measure.
            let (wi, wo) = match N {
                2 => (*inner, *outer),
                _ => (inner * inner, outer * outer),
            };
            let n_outer =
                ((count as f64 * wo / (wi + wo)).round() as usize).clamp(32, count.max(64) - 32);
            let n_inner = (count.max(64) - n_outer).max(32);
            sphere_samples(center, *outer, n_outer, false, &mut out);
            sphere_samples(center, *inner, n_inner, true, &mut out);
        }
        Shape::Union { balls } => {
            let per = (count / balls.len()).max(32);
            for (b, (c, r)) in balls.iter().enumerate() {
                let mut cand = Vec::new();
                sphere_samples(c, *r, per * 2, false, &mut cand);
                // Keep only points on the union boundary (not strictly inside
                // any other ball), thinning back toward the requested count.
                let exposed: Vec<BoundaryPoint<N>> = cand
                    .into_iter()
                    .filter(|s| {
                        balls
                            .iter()
                            .enumerate()
                            .all(|(j, (cj, rj))| j == b || la::dist(&s.point, cj) >= *rj)
                    })
                    .collect();
                let stride = (exposed.len() / per).max(1);
                out.extend(exposed.into_iter().step_by(stride));
            }
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidSpec("no boundary samples produced".into()));
    }
    Ok(out)
}

/// Uniform samples of a sphere of radius `r`. `flip` turns the normals inward
/// (for cavity boundaries, where the domain's outward normal points toward
/// the center).
fn sphere_samples<const N: usize>(
    center: &Point<N>,
    r: f64,
    count: usize,
    flip: bool,
    out: &mut Vec<BoundaryPoint<N>>,
) {
    let sign = if flip { -1.0 } else { 1.0 };
    for dir in unit_sphere_points::<N>(count) {
        out.push(BoundaryPoint {
            point: la::axpy(center, r, &dir),
            normal: la::scale(&dir, sign),
        });
    }
}

fn ellipsoid_samples<const N: usize>(
    center: &Point<N>,
    semi_axes: &Point<N>,
    count: usize,
    out: &mut Vec<BoundaryPoint<N>>,
) {
    for dir in unit_sphere_points::<N>(count) {
        let mut p = *center;
        let mut nrm = [0.0; N];
        for i in 0..N {
            p[i] += semi_axes[i] * dir[i];
            // gradient of Σ ((x_i - c_i)/s_i)^2 at the surface point
            nrm[i] = dir[i] / semi_axes[i];
        }
        la::normalize(&mut nrm);
        out.push(BoundaryPoint {
            point: p,
            normal: nrm,
        });
    }
}

/// Deterministic quasi-uniform points on the unit sphere: uniform angles in
/// 2D, Fibonacci lattice in 3D.
pub fn unit_sphere_points<const N: usize>(count: usize) -> Vec<Point<N>> {
    let mut pts = Vec::with_capacity(count);
    if N == 2 {
        for k in 0..count {
            let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
            let mut p = [0.0; N];
            p[0] = t.cos();
            p[1] = t.sin();
            pts.push(p);
        }
    } else {
        let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
        for k in 0..count {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = 2.0 * std::f64::consts::PI * (k as f64 / golden).fract();
            let mut p = [0.0; N];
            p[0] = rho * phi.cos();
            p[1] = rho * phi.sin();
            p[2] = z;
            pts.push(p);
        }
    }
    pts
}
