//! Pointwise sampling of grid fields by tensor-product quadratic
//! interpolation, and gradient extraction at boundary points.

use super::field::{ScalarField, VectorField};
use crate::geometry::GridGeometry;
use crate::la::Point;

/// Per-axis 3-point Lagrange stencil (base index and weights) at a fractional
/// cell coordinate.
fn axis_stencil(frac: f64, size: usize) -> (usize, [f64; 3]) {
    // center the stencil on the nearest cell, clamped one off the edges
    let c = frac.round().clamp(1.0, (size.max(3) - 2) as f64) as usize;
    let t = frac - c as f64; // in [-1.5, 1.5] near edges, else [-0.5, 0.5]
    let w = [0.5 * t * (t - 1.0), 1.0 - t * t, 0.5 * t * (t + 1.0)];
    (c - 1, w)
}

fn gather<const N: usize>(geom: &GridGeometry<N>, x: &Point<N>, mut value: impl FnMut(usize, f64)) {
    let frac = geom.fractional(x);
    let mut base = [0usize; N];
    let mut wts = [[0.0; 3]; N];
    for i in 0..N {
        let (b, w) = axis_stencil(frac[i], geom.shape[i]);
        base[i] = b;
        wts[i] = w;
    }
    let mut offs = [0usize; N];
    loop {
        let mut idx = [0usize; N];
        let mut w = 1.0;
        for i in 0..N {
            idx[i] = base[i] + offs[i];
            w *= wts[i][offs[i]];
        }
        value(geom.index(&idx), w);
        // odometer over the 3^N stencil
        let mut i = 0;
        loop {
            if i == N {
                return;
            }
            offs[i] += 1;
            if offs[i] < 3 {
                break;
            }
            offs[i] = 0;
            i += 1;
        }
    }
}

/// Quadratic interpolation of a scalar field at an arbitrary point.
pub fn sample_scalar<const N: usize>(field: &ScalarField<N>, x: &Point<N>) -> f64 {
    let mut acc = 0.0;
    gather(&field.carrier.geom, x, |k, w| acc += w * field.values[k]);
    acc
}

/// Quadratic interpolation of a vector field at an arbitrary point.
pub fn sample_vector<const N: usize>(field: &VectorField<N>, x: &Point<N>) -> [f64; N] {
    let mut acc = [0.0; N];
    gather(&field.carrier.geom, x, |k, w| {
        for i in 0..N {
            acc[i] += w * field.components[k][i];
        }
    });
    acc
}

/// Gradient of a scalar field at a boundary point, by quadratic extrapolation
/// of the interior gradient along the inward normal. The shallowest sample
/// sits deep enough that the interpolation stencil (a 3^N box of half-width
/// 1.5h) cannot touch exterior cells, where gradient components are zeroed.
pub fn gradient_at_boundary<const N: usize>(
    grad: &VectorField<N>,
    point: &Point<N>,
    outward_normal: &Point<N>,
) -> [f64; N] {
    let h = grad.carrier.h();
    let d0 = (1.5 * (N as f64).sqrt() + 0.4) * h;
    let step = 1.2 * h;
    let depths = [d0, d0 + step, d0 + 2.0 * step];
    let mut samples = [[0.0; N]; 3];
    for (j, s) in samples.iter_mut().enumerate() {
        let mut p = *point;
        for i in 0..N {
            p[i] -= depths[j] * outward_normal[i];
        }
        *s = sample_vector(grad, &p);
    }
    // Lagrange extrapolation to distance 0 through the three depths
    let mut g = [0.0; N];
    for k in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if j != k {
                w *= depths[j] / (depths[j] - depths[k]);
            }
        }
        for i in 0..N {
            g[i] += w * samples[k][i];
        }
    }
    g
}
