//! Harmonic bases with analytic gradients.
//!
//! Interior functions are homogeneous harmonic polynomials of degrees
//! 1..=d, computed once per degree as the null space of the Laplacian acting
//! on monomial coefficients (dimension 2 per degree in the plane, 2l+1 in
//! space). Multiply connected domains get singular functions at each cavity
//! center: log ‖x−p‖ in the plane or ‖x−p‖^{2−N} in space, plus exterior
//! multipoles obtained from interior polynomials by the Kelvin transform
//! p(ξ)/‖ξ‖^{2l+N−2}.

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Shape};
use crate::la::{self, Point};

/// A polynomial in N variables as a sparse list of (coefficient, exponents).
#[derive(Clone, Debug)]
pub struct Poly<const N: usize> {
    pub terms: Vec<(f64, [u8; N])>,
}

impl<const N: usize> Poly<N> {
    pub fn eval(&self, x: &Point<N>) -> f64 {
        let mut acc = 0.0;
        for (c, e) in &self.terms {
            let mut t = *c;
            for i in 0..N {
                t *= x[i].powi(e[i] as i32);
            }
            acc += t;
        }
        acc
    }

    pub fn grad(&self) -> [Poly<N>; N] {
        std::array::from_fn(|axis| {
            let mut terms = Vec::new();
            for (c, e) in &self.terms {
                if e[axis] > 0 {
                    let mut d = *e;
                    d[axis] -= 1;
                    terms.push((c * e[axis] as f64, d));
                }
            }
            Poly { terms }
        })
    }

    pub fn grad_eval(grad: &[Poly<N>; N], x: &Point<N>) -> Point<N> {
        std::array::from_fn(|i| grad[i].eval(x))
    }
}

/// All exponent vectors of total degree `l`, in a fixed deterministic order.
fn monomials<const N: usize>(l: usize) -> Vec<[u8; N]> {
    let mut out = Vec::new();
    let mut e = [0u8; N];
    fill::<N>(0, l as u8, &mut e, &mut out);
    out
}

fn fill<const N: usize>(axis: usize, left: u8, e: &mut [u8; N], out: &mut Vec<[u8; N]>) {
    if axis == N - 1 {
        e[axis] = left;
        out.push(*e);
        return;
    }
    for v in (0..=left).rev() {
        e[axis] = v;
        fill::<N>(axis + 1, left - v, e, out);
    }
}

/// Basis of homogeneous harmonic polynomials of degree `l`, orthonormalized
/// in coefficient space.
pub fn harmonic_polynomials<const N: usize>(l: usize) -> Vec<Poly<N>> {
    let cols = monomials::<N>(l);
    if l < 2 {
        return cols
            .iter()
            .map(|e| Poly {
                terms: vec![(1.0, *e)],
            })
            .collect();
    }
    let rows = monomials::<N>(l - 2);
    let row_index = |e: &[u8; N]| rows.iter().position(|r| r == e).unwrap();
    let (nr, nc) = (rows.len(), cols.len());
    let mut a = vec![vec![0.0f64; nc]; nr];
    for (j, e) in cols.iter().enumerate() {
        for i in 0..N {
            if e[i] >= 2 {
                let mut r = *e;
                r[i] -= 2;
                a[row_index(&r)][j] += (e[i] as f64) * (e[i] as f64 - 1.0);
            }
        }
    }
    // reduced row echelon form with partial pivoting
    let mut pivot_cols = Vec::new();
    let mut row = 0usize;
    for col in 0..nc {
        let (mut best, mut best_row) = (0.0f64, row);
        for r in row..nr {
            if a[r][col].abs() > best {
                best = a[r][col].abs();
                best_row = r;
            }
        }
        if best < 1e-9 {
            continue;
        }
        a.swap(row, best_row);
        let p = a[row][col];
        for v in a[row].iter_mut() {
            *v /= p;
        }
        for r in 0..nr {
            if r != row && a[r][col] != 0.0 {
                let f = a[r][col];
                for cc in 0..nc {
                    a[r][cc] -= f * a[row][cc];
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
        if row == nr {
            break;
        }
    }
    let mut kernel: Vec<Vec<f64>> = Vec::new();
    for free in 0..nc {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![0.0; nc];
        v[free] = 1.0;
        for (r, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -a[r][free];
        }
        kernel.push(v);
    }
    // modified Gram-Schmidt for conditioning
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for mut v in kernel {
        for u in &ortho {
            let d: f64 = v.iter().zip(u.iter()).map(|(a, b)| a * b).sum();
            for (vi, ui) in v.iter_mut().zip(u.iter()) {
                *vi -= d * ui;
            }
        }
        let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            for vi in v.iter_mut() {
                *vi /= n;
            }
            ortho.push(v);
        }
    }
    let expected = match N {
        2 => 2,
        3 => 2 * l + 1,
        _ => unreachable!(),
    };
    assert_eq!(
        ortho.len(),
        expected,
        "harmonic space dimension at degree {l}"
    );
    ortho
        .into_iter()
        .map(|v| Poly {
            terms: v
                .into_iter()
                .enumerate()
                .filter(|(_, c)| c.abs() > 1e-14)
                .map(|(j, c)| (c, cols[j]))
                .collect(),
        })
        .collect()
}

/// One basis function with its analytic gradient.
#[derive(Clone, Debug)]
pub enum BasisFunction<const N: usize> {
    /// p((x − origin)/scale)
    Interior {
        origin: Point<N>,
        poly: Poly<N>,
        grad: [Poly<N>; N],
    },
    /// p(ξ)/‖ξ‖^m with ξ = (x − pole)/scale and m = 2·deg + N − 2
    Kelvin {
        pole: Point<N>,
        poly: Poly<N>,
        grad: [Poly<N>; N],
        exponent: f64,
    },
    /// log ‖(x − pole)/scale‖ (plane only)
    LogPole { pole: Point<N> },
}

impl<const N: usize> BasisFunction<N> {
    fn origin(&self) -> &Point<N> {
        match self {
            BasisFunction::Interior { origin, .. } => origin,
            BasisFunction::Kelvin { pole, .. } | BasisFunction::LogPole { pole } => pole,
        }
    }

    pub fn value(&self, x: &Point<N>, scale: f64) -> f64 {
        let xi = la::scale(&la::sub(x, self.origin()), 1.0 / scale);
        match self {
            BasisFunction::Interior { poly, .. } => poly.eval(&xi),
            BasisFunction::Kelvin { poly, exponent, .. } => {
                poly.eval(&xi) * la::norm(&xi).powf(-exponent)
            }
            BasisFunction::LogPole { .. } => la::norm(&xi).ln(),
        }
    }

    pub fn gradient(&self, x: &Point<N>, scale: f64) -> Point<N> {
        let xi = la::scale(&la::sub(x, self.origin()), 1.0 / scale);
        let g = match self {
            BasisFunction::Interior { grad, .. } => Poly::grad_eval(grad, &xi),
            BasisFunction::Kelvin {
                poly,
                grad,
                exponent,
                ..
            } => {
                let r2 = la::dot(&xi, &xi);
                let rm = r2.sqrt().powf(-exponent);
                let gp = Poly::grad_eval(grad, &xi);
                let p = poly.eval(&xi);
                std::array::from_fn(|i| rm * (gp[i] - exponent * p * xi[i] / r2))
            }
            BasisFunction::LogPole { .. } => {
                let r2 = la::dot(&xi, &xi);
                la::scale(&xi, 1.0 / r2)
            }
        };
        la::scale(&g, 1.0 / scale)
    }
}

/// A harmonic basis over a domain: centered interior polynomials plus
/// singular terms at cavity centers.
#[derive(Clone, Debug)]
pub struct HarmonicBasis<const N: usize> {
    pub center: Point<N>,
    pub scale: f64,
    pub degree: usize,
    pub poles: Vec<Point<N>>,
    pub functions: Vec<BasisFunction<N>>,
}

impl<const N: usize> HarmonicBasis<N> {
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn value(&self, j: usize, x: &Point<N>) -> f64 {
        self.functions[j].value(x, self.scale)
    }

    pub fn gradient(&self, j: usize, x: &Point<N>) -> Point<N> {
        self.functions[j].gradient(x, self.scale)
    }

    /// h(x) = Σ c_j h_j(x).
    pub fn combine_value(&self, coeffs: &[f64], x: &Point<N>) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * self.value(j, x))
            .sum()
    }

    /// ∇h(x) = Σ c_j ∇h_j(x).
    pub fn combine_gradient(&self, coeffs: &[f64], x: &Point<N>) -> Point<N> {
        let mut g = [0.0; N];
        for (j, c) in coeffs.iter().enumerate() {
            if *c != 0.0 {
                let gj = self.gradient(j, x);
                for i in 0..N {
                    g[i] += c * gj[i];
                }
            }
        }
        g
    }
}

/// Assembles the basis for a domain. Simply connected specs get polynomial
/// functions only; annuli additionally get the singular monopole and
/// exterior multipoles at the cavity center.
pub fn build_basis<const N: usize>(spec: &DomainSpec, degree: usize) -> Result<HarmonicBasis<N>> {
    if degree < 2 {
        return Err(Error::Precondition(format!(
            "basis degree must be >= 2, got {degree}"
        )));
    }
    if degree > 24 {
        return Err(Error::Precondition(format!(
            "basis degree {degree} exceeds the conditioning cap of 24"
        )));
    }
    let shape: Shape<N> = spec.typed()?;
    let center = shape.centroid();
    let scale = shape.characteristic_radius();
    let mut functions = Vec::new();
    for l in 1..=degree {
        for poly in harmonic_polynomials::<N>(l) {
            let grad = poly.grad();
            functions.push(BasisFunction::Interior {
                origin: center,
                poly,
                grad,
            });
        }
    }
    let poles = shape.cavity_centers();
    let pole_degree = degree.min(3);
    for pole in &poles {
        if N == 2 {
            functions.push(BasisFunction::LogPole { pole: *pole });
        } else {
            functions.push(BasisFunction::Kelvin {
                pole: *pole,
                poly: Poly {
                    terms: vec![(1.0, [0u8; N])],
                },
                grad: std::array::from_fn(|_| Poly { terms: vec![] }),
                exponent: (N - 2) as f64,
            });
        }
        for l in 1..=pole_degree {
            for poly in harmonic_polynomials::<N>(l) {
                let grad = poly.grad();
                functions.push(BasisFunction::Kelvin {
                    pole: *pole,
                    poly,
                    grad,
                    exponent: (2 * l + N - 2) as f64,
                });
            }
        }
    }
    Ok(HarmonicBasis {
        center,
        scale,
        degree,
        poles,
        functions,
    })
}
