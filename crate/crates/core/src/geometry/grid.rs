//! Uniform Cartesian rasterizations of analytic domains.

use super::sampling::{boundary_samples_shape, BoundaryPoint};
use super::spec::{DomainSpec, Shape};
use crate::error::{Error, Result};
use crate::la::Point;

/// Geometry of a uniform grid: origin corner, spacing and per-axis cell
/// counts. Cell `(i_0, ..)` has center `origin + (i + 1/2) h` per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct GridGeometry<const N: usize> {
    pub origin: Point<N>,
    pub h: f64,
    pub shape: [usize; N],
}

impl<const N: usize> GridGeometry<N> {
    pub fn new(origin: Point<N>, h: f64, shape: [usize; N]) -> Self {
        GridGeometry { origin, h, shape }
    }

    /// Builds a geometry covering `[lo, hi]` with spacing `h` (cell counts
    /// rounded up).
    pub fn covering(lo: Point<N>, hi: Point<N>, h: f64) -> Self {
        let mut shape = [0usize; N];
        for i in 0..N {
            shape[i] = (((hi[i] - lo[i]) / h).ceil() as usize).max(1);
        }
        GridGeometry {
            origin: lo,
            h,
            shape,
        }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major linear index (last axis fastest).
    #[inline]
    pub fn index(&self, idx: &[usize; N]) -> usize {
        let mut k = 0usize;
        for i in 0..N {
            debug_assert!(idx[i] < self.shape[i]);
            k = k * self.shape[i] + idx[i];
        }
        k
    }

    #[inline]
    pub fn unindex(&self, mut k: usize) -> [usize; N] {
        let mut idx = [0usize; N];
        for i in (0..N).rev() {
            idx[i] = k % self.shape[i];
            k /= self.shape[i];
        }
        idx
    }

    #[inline]
    pub fn cell_center(&self, idx: &[usize; N]) -> Point<N> {
        let mut p = [0.0; N];
        for i in 0..N {
            p[i] = self.origin[i] + (idx[i] as f64 + 0.5) * self.h;
        }
        p
    }

    /// Index of the neighbor one cell along `axis` (`dir` = ±1), or `None` at
    /// the box face.
    #[inline]
    pub fn neighbor(&self, idx: &[usize; N], axis: usize, dir: isize) -> Option<[usize; N]> {
        let mut n = *idx;
        let v = idx[axis] as isize + dir;
        if v < 0 || v as usize >= self.shape[axis] {
            return None;
        }
        n[axis] = v as usize;
        Some(n)
    }

    /// Linear index offset of a step along `axis` (last axis fastest).
    pub fn stride(&self, axis: usize) -> usize {
        self.shape[axis + 1..].iter().product()
    }

    /// Continuous (fractional) cell coordinates of a spatial point.
    #[inline]
    pub fn fractional(&self, x: &Point<N>) -> [f64; N] {
        let mut f = [0.0; N];
        for i in 0..N {
            f[i] = (x[i] - self.origin[i]) / self.h - 0.5;
        }
        f
    }
}

/// Rasterized domain: inside indicator and signed distance per cell plus
/// boundary samples with outward unit normals.
#[derive(Clone, Debug)]
pub struct GridDomain<const N: usize> {
    pub geom: GridGeometry<N>,
    pub inside: Vec<bool>,
    /// Signed distance at cell centers, negative inside. For level-set built
    /// domains this is the normalized level function (approximate away from
    /// the boundary).
    pub sdf: Vec<f64>,
    pub boundary: Vec<BoundaryPoint<N>>,
}

impl<const N: usize> GridDomain<N> {
    pub fn h(&self) -> f64 {
        self.geom.h
    }

    pub fn len(&self) -> usize {
        self.geom.len()
    }

    pub fn is_empty(&self) -> bool {
        self.geom.is_empty()
    }

    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|b| **b).count()
    }

    /// Cell-counting volume with first-order sub-cell correction
    /// `clamp(1/2 - d/h, 0, 1) * h^N` from the signed distance.
    pub fn volume(&self) -> f64 {
        let h = self.geom.h;
        let cell = h.powi(N as i32);
        let mut v = 0.0;
        for k in 0..self.len() {
            let f = (0.5 - self.sdf[k] / h).clamp(0.0, 1.0);
            v += f * cell;
        }
        v
    }

    /// Number of face-connected components of the inside set.
    pub fn connected_components(&self) -> usize {
        self.component_count(&self.inside)
    }

    /// Number of cavities: connected components of the outside set that do
    /// not touch the bounding box faces.
    pub fn cavities(&self) -> usize {
        let outside: Vec<bool> = self.inside.iter().map(|b| !b).collect();
        let mut touching = 0usize;
        let mut total = 0usize;
        let mut labels = vec![0u32; self.len()];
        let mut next = 0u32;
        for start in 0..self.len() {
            if !outside[start] || labels[start] != 0 {
                continue;
            }
            next += 1;
            total += 1;
            let mut touches = false;
            let mut stack = vec![start];
            labels[start] = next;
            while let Some(k) = stack.pop() {
                let idx = self.geom.unindex(k);
                for i in 0..N {
                    if idx[i] == 0 || idx[i] + 1 == self.geom.shape[i] {
                        touches = true;
                    }
                    for dir in [-1isize, 1] {
                        if let Some(nb) = self.geom.neighbor(&idx, i, dir) {
                            let kk = self.geom.index(&nb);
                            if outside[kk] && labels[kk] == 0 {
                                labels[kk] = next;
                                stack.push(kk);
                            }
                        }
                    }
                }
            }
            if touches {
                touching += 1;
            }
        }
        total - touching
    }

    fn component_count(&self, mask: &[bool]) -> usize {
        let mut seen = vec![false; self.len()];
        let mut count = 0;
        for start in 0..self.len() {
            if !mask[start] || seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(k) = stack.pop() {
                let idx = self.geom.unindex(k);
                for i in 0..N {
                    for dir in [-1isize, 1] {
                        if let Some(nb) = self.geom.neighbor(&idx, i, dir) {
                            let kk = self.geom.index(&nb);
                            if mask[kk] && !seen[kk] {
                                seen[kk] = true;
                                stack.push(kk);
                            }
                        }
                    }
                }
            }
        }
        count
    }

    /// Validates the structural invariants: sign agreement between indicator
    /// and signed distance, unit normals, nonempty inside set separated from
    /// the box faces by at least 2h.
    pub fn validate(&self) -> Result<()> {
        let mut any_inside = false;
        for k in 0..self.len() {
            if self.inside[k] != (self.sdf[k] < 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "indicator/signed-distance sign mismatch at cell {k}"
                )));
            }
            if self.inside[k] {
                any_inside = true;
                let idx = self.geom.unindex(k);
                for i in 0..N {
                    if idx[i] < 2 || idx[i] + 2 >= self.geom.shape[i] {
                        return Err(Error::InvalidSpec(
                            "inside set not 2h-separated from the bounding box".into(),
                        ));
                    }
                }
            }
        }
        if !any_inside {
            return Err(Error::InvalidSpec("inside set is empty".into()));
        }
        for b in &self.boundary {
            let n2 = crate::la::dot(&b.normal, &b.normal);
            if (n2 - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidSpec("boundary normal not unit length".into()));
            }
        }
        Ok(())
    }

    /// Builds a domain from a level-set function sampled at cell centers
    /// (negative inside). The stored signed distance is the level function
    /// normalized by its local gradient magnitude.
    pub fn from_level_set(geom: GridGeometry<N>, phi: Vec<f64>) -> Result<Self> {
        assert_eq!(phi.len(), geom.len());
        let mut sdf = vec![0.0; phi.len()];
        let h = geom.h;
        for k in 0..phi.len() {
            let idx = geom.unindex(k);
            let mut g2 = 0.0;
            for i in 0..N {
                let up = geom.neighbor(&idx, i, 1).map(|n| phi[geom.index(&n)]);
                let dn = geom.neighbor(&idx, i, -1).map(|n| phi[geom.index(&n)]);
                let d = match (dn, up) {
                    (Some(a), Some(b)) => (b - a) / (2.0 * h),
                    (None, Some(b)) => (b - phi[k]) / h,
                    (Some(a), None) => (phi[k] - a) / h,
                    (None, None) => 0.0,
                };
                g2 += d * d;
            }
            let g = g2.sqrt().max(1e-12);
            sdf[k] = phi[k] / g;
        }
        let inside = sdf.iter().map(|v| *v < 0.0).collect();
        let dom = GridDomain {
            geom,
            inside,
            sdf,
            boundary: Vec::new(),
        };
        dom.validate()?;
        Ok(dom)
    }
}

fn default_boundary_count<const N: usize>(resolution: usize) -> usize {
    match N {
        2 => (4 * resolution).max(256),
        _ => (2 * resolution * resolution).clamp(1024, 8192),
    }
}

pub(super) fn rasterize<const N: usize>(
    spec: &DomainSpec,
    resolution: usize,
) -> Result<GridDomain<N>> {
    if resolution < 16 {
        return Err(Error::Precondition(format!(
            "resolution must be >= 16, got {resolution}"
        )));
    }
    let shape = spec.typed::<N>()?;
    let (lo, hi) = shape.bbox();
    let max_extent = (0..N).map(|i| hi[i] - lo[i]).fold(0.0, f64::max);
    let h = max_extent / resolution as f64;
    let pad = 4.5 * h;
    let mut plo = lo;
    let mut phi = hi;
    for i in 0..N {
        plo[i] -= pad;
        phi[i] += pad;
    }
    let geom = GridGeometry::covering(plo, phi, h);
    rasterize_shape(spec, &shape, geom, default_boundary_count::<N>(resolution))
}

pub(super) fn rasterize_with<const N: usize>(
    spec: &DomainSpec,
    geom: &GridGeometry<N>,
) -> Result<GridDomain<N>> {
    let shape = spec.typed::<N>()?;
    rasterize_shape(spec, &shape, geom.clone(), default_boundary_count::<N>(32))
}

fn rasterize_shape<const N: usize>(
    spec: &DomainSpec,
    shape: &Shape<N>,
    geom: GridGeometry<N>,
    boundary_count: usize,
) -> Result<GridDomain<N>> {
    let h = geom.h;
    // Feature-resolution guards.
    if let Shape::Annulus { inner, outer, .. } = shape {
        if outer - inner < 4.0 * h {
            return Err(Error::TooCoarse(format!(
                "annulus gap {:.4} is thinner than 4h = {:.4}",
                outer - inner,
                4.0 * h
            )));
        }
    }
    if let Shape::Union { balls } = shape {
        for i in 0..balls.len() {
            for j in i + 1..balls.len() {
                let d = crate::la::dist(&balls[i].0, &balls[j].0);
                let touch = balls[i].1 + balls[j].1;
                if (d - touch).abs() < 2.0 * h {
                    return Err(Error::TooCoarse(format!(
                        "spheres {i} and {j} are within 2h of tangency (|{d:.4} - {touch:.4}| < {:.4})",
                        2.0 * h
                    )));
                }
            }
        }
    }

    let n = geom.len();
    let mut inside = vec![false; n];
    let mut sdf = vec![0.0; n];
    for k in 0..n {
        let idx = geom.unindex(k);
        let x = geom.cell_center(&idx);
        let inn = shape.contains(&x);
        let mut d = shape.sdf(&x);
        // The indicator comes from the exact analytic inequality; force the
        // signed distance (which may round to 0.0 on-boundary) to agree.
        if inn && d >= 0.0 {
            d = -f64::MIN_POSITIVE;
        } else if !inn && d < 0.0 {
            d = 0.0;
        }
        inside[k] = inn;
        sdf[k] = d;
    }

    let boundary = boundary_samples_shape(shape, boundary_count)?;
    let dom = GridDomain {
        geom,
        inside,
        sdf,
        boundary,
    };
    dom.validate()?;

    if dom.connected_components() != 1 {
        return Err(Error::InvalidSpec(format!(
            "{spec:?} rasterizes to {} connected components, expected 1",
            dom.connected_components()
        )));
    }
    Ok(dom)
}
