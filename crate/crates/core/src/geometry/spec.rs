//! Domain specifications: the serialized form and the typed analytic form.

use serde::{Deserialize, Serialize};

use super::unit_ball_volume;
use crate::error::{Error, Result};
use crate::la::{self, Point};

/// One ball of a union-of-balls specification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallComponent {
    pub center: Vec<f64>,
    /// Single-element list holding the radius.
    pub radii: Vec<f64>,
}

/// Serialized domain description.
///
/// The JSON encoding is `{"kind": "ball"|"ellipsoid"|"annulus"|
/// "union_of_balls", "dim": 2|3, ...}` with `center`/`radii` for balls and
/// ellipsoids, `r`/`R` for annuli and `components` for unions. Ellipsoid
/// `radii` are the semi-axes `s_i`, i.e. the domain is Σ (x_i/s_i)² < 1;
/// equivalently Σ a_i² x_i² < 1 with a_i = 1/s_i.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Ball {
        dim: usize,
        center: Vec<f64>,
        radii: Vec<f64>,
    },
    Ellipsoid {
        dim: usize,
        center: Vec<f64>,
        radii: Vec<f64>,
    },
    Annulus {
        dim: usize,
        center: Vec<f64>,
        r: f64,
        #[serde(rename = "R")]
        big_r: f64,
    },
    UnionOfBalls {
        dim: usize,
        components: Vec<BallComponent>,
    },
}

impl DomainSpec {
    pub fn ball(dim: usize, center: &[f64], r: f64) -> Self {
        DomainSpec::Ball {
            dim,
            center: center.to_vec(),
            radii: vec![r],
        }
    }

    pub fn ellipsoid(dim: usize, center: &[f64], semi_axes: &[f64]) -> Self {
        DomainSpec::Ellipsoid {
            dim,
            center: center.to_vec(),
            radii: semi_axes.to_vec(),
        }
    }

    pub fn annulus(dim: usize, center: &[f64], r: f64, big_r: f64) -> Self {
        DomainSpec::Annulus {
            dim,
            center: center.to_vec(),
            r,
            big_r,
        }
    }

    pub fn union_of_balls(dim: usize, balls: &[(Vec<f64>, f64)]) -> Self {
        DomainSpec::UnionOfBalls {
            dim,
            components: balls
                .iter()
                .map(|(c, r)| BallComponent {
                    center: c.clone(),
                    radii: vec![*r],
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Ball { dim, .. }
            | DomainSpec::Ellipsoid { dim, .. }
            | DomainSpec::Annulus { dim, .. }
            | DomainSpec::UnionOfBalls { dim, .. } => *dim,
        }
    }

    /// Checks structural invariants: supported dimension, matching lengths,
    /// strictly positive radii, `R > r` for annuli.
    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidSpec(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        let check_center = |c: &Vec<f64>| -> Result<()> {
            if c.len() != dim {
                return Err(Error::InvalidSpec(format!(
                    "center has {} entries, expected {dim}",
                    c.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSpec("center must be finite".into()));
            }
            Ok(())
        };
        match self {
            DomainSpec::Ball { center, radii, .. } => {
                check_center(center)?;
                if radii.len() != 1 || !(radii[0] > 0.0) {
                    return Err(Error::InvalidSpec(
                        "ball needs radii = [r] with r > 0".into(),
                    ));
                }
            }
            DomainSpec::Ellipsoid { center, radii, .. } => {
                check_center(center)?;
                if radii.len() != dim || radii.iter().any(|s| !(*s > 0.0)) {
                    return Err(Error::InvalidSpec(
                        "ellipsoid needs one positive semi-axis per dimension".into(),
                    ));
                }
            }
            DomainSpec::Annulus {
                center, r, big_r, ..
            } => {
                check_center(center)?;
                if !(*r > 0.0) || !(*big_r > *r) {
                    return Err(Error::InvalidSpec(format!(
                        "annulus needs 0 < r < R, got r={r}, R={big_r}"
                    )));
                }
            }
            DomainSpec::UnionOfBalls { components, .. } => {
                if components.is_empty() {
                    return Err(Error::InvalidSpec(
                        "union of balls needs >= 1 component".into(),
                    ));
                }
                for c in components {
                    check_center(&c.center)?;
                    if c.radii.len() != 1 || !(c.radii[0] > 0.0) {
                        return Err(Error::InvalidSpec(
                            "union component needs radii = [r] with r > 0".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Converts to the typed representation in dimension `N`.
    pub fn typed<const N: usize>(&self) -> Result<Shape<N>> {
        self.validate()?;
        if self.dim() != N {
            return Err(Error::InvalidSpec(format!(
                "spec has dimension {}, expected {N}",
                self.dim()
            )));
        }
        let to_point = |v: &Vec<f64>| -> Point<N> {
            let mut p = [0.0; N];
            p.copy_from_slice(v);
            p
        };
        Ok(match self {
            DomainSpec::Ball { center, radii, .. } => Shape::Ball {
                center: to_point(center),
                r: radii[0],
            },
            DomainSpec::Ellipsoid { center, radii, .. } => Shape::Ellipsoid {
                center: to_point(center),
                semi_axes: to_point(radii),
            },
            DomainSpec::Annulus {
                center, r, big_r, ..
            } => Shape::Annulus {
                center: to_point(center),
                inner: *r,
                outer: *big_r,
            },
            DomainSpec::UnionOfBalls { components, .. } => Shape::Union {
                balls: components
                    .iter()
                    .map(|c| (to_point(&c.center), c.radii[0]))
                    .collect(),
            },
        })
    }
}

/// Typed analytic domain in dimension `N`.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape<const N: usize> {
    Ball {
        center: Point<N>,
        r: f64,
    },
    Ellipsoid {
        center: Point<N>,
        semi_axes: Point<N>,
    },
    Annulus {
        center: Point<N>,
        inner: f64,
        outer: f64,
    },
    Union {
        balls: Vec<(Point<N>, f64)>,
    },
}

impl<const N: usize> Shape<N> {
    /// Exact inside test from the defining analytic inequality.
    pub fn contains(&self, x: &Point<N>) -> bool {
        match self {
            Shape::Ball { center, r } => la::dist2(x, center) < r * r,
            Shape::Ellipsoid { center, semi_axes } => {
                let mut s = 0.0;
                for i in 0..N {
                    let t = (x[i] - center[i]) / semi_axes[i];
                    s += t * t;
                }
                s < 1.0
            }
            Shape::Annulus {
                center,
                inner,
                outer,
            } => {
                let d2 = la::dist2(x, center);
                d2 < outer * outer && d2 > inner * inner
            }
            Shape::Union { balls } => balls.iter().any(|(c, r)| la::dist2(x, c) < r * r),
        }
    }

    /// Signed distance to the boundary, negative inside. Exact for balls,
    /// annuli and unions (outside and near the boundary); ellipsoids use a
    /// Newton solve of the foot-point problem with tolerance 1e-10.
    pub fn sdf(&self, x: &Point<N>) -> f64 {
        match self {
            Shape::Ball { center, r } => la::dist(x, center) - r,
            Shape::Ellipsoid { center, semi_axes } => {
                let inside = self.contains(x);
                let d = ellipsoid_distance(&la::sub(x, center), semi_axes);
                if inside {
                    -d
                } else {
                    d
                }
            }
            Shape::Annulus {
                center,
                inner,
                outer,
            } => {
                let d = la::dist(x, center);
                (d - outer).max(inner - d)
            }
            Shape::Union { balls } => balls
                .iter()
                .map(|(c, r)| la::dist(x, c) - r)
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Axis-aligned bounding box (unpadded).
    pub fn bbox(&self) -> (Point<N>, Point<N>) {
        let mut lo = [f64::INFINITY; N];
        let mut hi = [f64::NEG_INFINITY; N];
        let mut grow = |c: &Point<N>, ext: &Point<N>| {
            for i in 0..N {
                lo[i] = lo[i].min(c[i] - ext[i]);
                hi[i] = hi[i].max(c[i] + ext[i]);
            }
        };
        match self {
            Shape::Ball { center, r } => grow(center, &[*r; N]),
            Shape::Ellipsoid { center, semi_axes } => grow(center, semi_axes),
            Shape::Annulus { center, outer, .. } => grow(center, &[*outer; N]),
            Shape::Union { balls } => {
                for (c, r) in balls {
                    grow(c, &[*r; N]);
                }
            }
        }
        (lo, hi)
    }

    /// Exact volume. Unions are supported for a single ball, pairwise
    /// disjoint balls, or exactly two overlapping balls.
    pub fn volume(&self) -> Result<f64> {
        let kappa = unit_ball_volume(N);
        Ok(match self {
            Shape::Ball { r, .. } => kappa * r.powi(N as i32),
            Shape::Ellipsoid { semi_axes, .. } => kappa * semi_axes.iter().product::<f64>(),
            Shape::Annulus { inner, outer, .. } => {
                kappa * (outer.powi(N as i32) - inner.powi(N as i32))
            }
            Shape::Union { balls } => union_volume::<N>(balls)?,
        })
    }

    /// Total boundary surface area (perimeter when N = 2). Ellipsoids are
    /// integrated by refined quadrature to relative accuracy 1e-8; unions are
    /// unsupported.
    pub fn surface_area(&self) -> Result<f64> {
        let sphere = |r: f64| -> f64 {
            match N {
                2 => 2.0 * std::f64::consts::PI * r,
                3 => 4.0 * std::f64::consts::PI * r * r,
                _ => unreachable!(),
            }
        };
        match self {
            Shape::Ball { r, .. } => Ok(sphere(*r)),
            Shape::Annulus { inner, outer, .. } => Ok(sphere(*inner) + sphere(*outer)),
            Shape::Ellipsoid { semi_axes, .. } => Ok(ellipsoid_surface_area::<N>(semi_axes)),
            Shape::Union { .. } => Err(Error::Unsupported(
                "surface area of a union of balls".into(),
            )),
        }
    }

    /// Volume of the open `t`-neighborhood {x : dist(x, Ω) < t}.
    ///
    /// Exact for balls and annuli (t below the gap), Steiner formula for
    /// convex 2D ellipses; other cases are unsupported here and are measured
    /// on a grid by callers.
    pub fn dilated_volume(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Precondition("dilation margin must be >= 0".into()));
        }
        let kappa = unit_ball_volume(N);
        match self {
            Shape::Ball { r, .. } => Ok(kappa * (r + t).powi(N as i32)),
            Shape::Annulus { inner, outer, .. } => {
                if t >= *inner {
                    return Err(Error::Precondition(
                        "dilation margin exceeds annulus cavity radius".into(),
                    ));
                }
                Ok(kappa * ((outer + t).powi(N as i32) - (inner - t).powi(N as i32)))
            }
            Shape::Ellipsoid { .. } if N == 2 => {
                let area = self.volume()?;
                let per = self.surface_area()?;
                Ok(area + per * t + std::f64::consts::PI * t * t)
            }
            _ => Err(Error::Unsupported(
                "analytic dilated volume for this shape".into(),
            )),
        }
    }

    /// Approximate centroid used for centering harmonic bases. Exact for
    /// symmetric primitives; unions use volume-weighted ball centers.
    pub fn centroid(&self) -> Point<N> {
        match self {
            Shape::Ball { center, .. }
            | Shape::Ellipsoid { center, .. }
            | Shape::Annulus { center, .. } => *center,
            Shape::Union { balls } => {
                let mut c = [0.0; N];
                let mut w = 0.0;
                for (ctr, r) in balls {
                    let v = r.powi(N as i32);
                    for i in 0..N {
                        c[i] += v * ctr[i];
                    }
                    w += v;
                }
                la::scale(&c, 1.0 / w)
            }
        }
    }

    /// A length scale of the domain: max distance from the centroid to a
    /// bounding-box corner. Used to normalize basis coordinates.
    pub fn characteristic_radius(&self) -> f64 {
        let c = self.centroid();
        let (lo, hi) = self.bbox();
        let mut r: f64 = 0.0;
        for corner in 0..(1usize << N) {
            let mut p = [0.0; N];
            for i in 0..N {
                p[i] = if corner >> i & 1 == 1 { hi[i] } else { lo[i] };
            }
            r = r.max(la::dist(&p, &c));
        }
        r
    }

    /// Cavity centers (poles for harmonic bases on multiply connected
    /// domains). Only annuli have one.
    pub fn cavity_centers(&self) -> Vec<Point<N>> {
        match self {
            Shape::Annulus { center, .. } => vec![*center],
            _ => vec![],
        }
    }
}

/// Unsigned distance from point `p` (relative to the center) to the ellipsoid
/// surface Σ (x_i/s_i)² = 1 via the Lagrange foot-point equation
/// f(t) = Σ (s_i p_i / (t + s_i²))² − 1 = 0, solved by safeguarded Newton.
fn ellipsoid_distance<const N: usize>(p: &Point<N>, s: &Point<N>) -> f64 {
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    let smax = s.iter().cloned().fold(0.0f64, f64::max);
    // Exact degenerate case: the nearest surface point from the center is a
    // minor-axis tip.
    if la::norm(p) < 1e-9 * smin {
        return smin;
    }
    // Work in the positive orthant; clamp zero components to keep the
    // constrained root well defined.
    let mut q = [0.0; N];
    for i in 0..N {
        q[i] = p[i].abs().max(1e-13 * s[i]);
    }
    let f = |t: f64| -> f64 {
        let mut v = -1.0;
        for i in 0..N {
            let w = s[i] * q[i] / (t + s[i] * s[i]);
            v += w * w;
        }
        v
    };
    let fp = |t: f64| -> f64 {
        let mut v = 0.0;
        for i in 0..N {
            let d = t + s[i] * s[i];
            v -= 2.0 * (s[i] * q[i]).powi(2) / (d * d * d);
        }
        v
    };
    let mut lo = -smin * smin;
    let mut hi = la::norm(&q) * smax + smax * smax;
    while f(hi) > 0.0 {
        hi = 2.0 * hi + 1.0;
    }
    // f is strictly decreasing on (lo, ∞) with f(lo+) = +∞ > 0 > f(hi).
    // Safeguarded Newton; the bracket alone already reaches machine
    // precision within the iteration budget.
    let mut t = 0.5 * (lo + hi);
    for _ in 0..220 {
        let ft = f(t);
        if ft > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let mut tn = t - ft / fp(t);
        if !(tn > lo && tn < hi) {
            tn = 0.5 * (lo + hi);
        }
        if (tn - t).abs() <= 1e-15 * (1.0 + t.abs()) {
            t = tn;
            break;
        }
        t = tn;
    }
    // foot point x_i = s_i² q_i/(t + s_i²), so x_i − q_i = −t q_i/(t + s_i²)
    let mut d2 = 0.0;
    for i in 0..N {
        let w = q[i] / (t + s[i] * s[i]);
        d2 += w * w;
    }
    t.abs() * d2.sqrt()
}

/// Surface measure of the ellipsoid with the given semi-axes, by refined
/// quadrature: trapezoid doubling in the periodic direction(s), Simpson
/// doubling in the polar direction, to relative accuracy 1e-9.
fn ellipsoid_surface_area<const N: usize>(s: &Point<N>) -> f64 {
    if N == 2 {
        // perimeter of (s0 cos t, s1 sin t): trapezoid on a periodic smooth
        // integrand converges exponentially under doubling
        let g = |t: f64| {
            let (st, ct) = t.sin_cos();
            ((s[0] * st).powi(2) + (s[1] * ct).powi(2)).sqrt()
        };
        let mut n = 16;
        let mut prev = f64::NAN;
        loop {
            let mut acc = 0.0;
            for k in 0..n {
                acc += g(2.0 * std::f64::consts::PI * k as f64 / n as f64);
            }
            let val = acc * 2.0 * std::f64::consts::PI / n as f64;
            if (val - prev).abs() <= 1e-9 * val.abs() || n > 1 << 20 {
                return val;
            }
            prev = val;
            n *= 2;
        }
    } else {
        let (a, b, c) = (s[0], s[1], s[2]);
        // ‖∂θ x ∂φ‖ for x = (a sinθ cosφ, b sinθ sinφ, c cosθ)
        let g = |theta: f64, phi: f64| {
            let (sth, cth) = theta.sin_cos();
            let (sph, cph) = phi.sin_cos();
            sth * ((b * c * sth * cph).powi(2)
                + (a * c * sth * sph).powi(2)
                + (a * b * cth).powi(2))
            .sqrt()
        };
        // inner: trapezoid over periodic phi; outer: Simpson over theta
        let inner = |theta: f64, m: usize| -> f64 {
            let mut acc = 0.0;
            for k in 0..m {
                acc += g(theta, 2.0 * std::f64::consts::PI * k as f64 / m as f64);
            }
            acc * 2.0 * std::f64::consts::PI / m as f64
        };
        let mut n = 16;
        let mut prev = f64::NAN;
        loop {
            let h = std::f64::consts::PI / n as f64;
            let mut acc = inner(0.0, 4 * n) + inner(std::f64::consts::PI, 4 * n);
            for k in 1..n {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * inner(k as f64 * h, 4 * n);
            }
            let val = acc * h / 3.0;
            if (val - prev).abs() <= 1e-9 * val.abs() || n > 1 << 14 {
                return val;
            }
            prev = val;
            n *= 2;
        }
    }
}

/// Volume of a union of balls: single ball, pairwise disjoint balls, or two
/// overlapping balls via the lens formula. Pairwise-overlapping configurations
/// with three or more balls are rejected (no closed form without triple
/// intersection handling); callers fall back to grid measurement.
fn union_volume<const N: usize>(balls: &[(Point<N>, f64)]) -> Result<f64> {
    let kappa = unit_ball_volume(N);
    let ball_vol = |r: f64| kappa * r.powi(N as i32);
    if balls.len() == 1 {
        return Ok(ball_vol(balls[0].1));
    }
    let mut overlaps = vec![];
    for i in 0..balls.len() {
        for j in i + 1..balls.len() {
            let d = la::dist(&balls[i].0, &balls[j].0);
            if d < balls[i].1 + balls[j].1 {
                overlaps.push((i, j, d));
            }
        }
    }
    if overlaps.is_empty() {
        return Ok(balls.iter().map(|(_, r)| ball_vol(*r)).sum());
    }
    if balls.len() == 2 {
        let (c, d) = (&balls[0], &balls[1]);
        let (r1, r2) = (c.1, d.1);
        let dist = overlaps[0].2;
        if dist <= (r1 - r2).abs() {
            return Ok(ball_vol(r1.max(r2)));
        }
        let lens = match N {
            2 => lens_area(r1, r2, dist),
            3 => lens_volume(r1, r2, dist),
            _ => unreachable!(),
        };
        return Ok(ball_vol(r1) + ball_vol(r2) - lens);
    }
    Err(Error::Unsupported(
        "closed-form volume of an overlapping union with more than two balls".into(),
    ))
}

fn lens_area(r1: f64, r2: f64, d: f64) -> f64 {
    let t1 = (d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1);
    let t2 = (d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2);
    let s = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(0.0);
    r1 * r1 * t1.clamp(-1.0, 1.0).acos() + r2 * r2 * t2.clamp(-1.0, 1.0).acos() - 0.5 * s.sqrt()
}

fn lens_volume(r1: f64, r2: f64, d: f64) -> f64 {
    std::f64::consts::PI
        * (r1 + r2 - d).powi(2)
        * (d * d + 2.0 * d * r2 - 3.0 * r2 * r2 + 2.0 * d * r1 + 6.0 * r1 * r2 - 3.0 * r1 * r1)
        / (12.0 * d)
}
