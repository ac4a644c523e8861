//! Field and measure containers tied to a grid domain.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::GridDomain;
use crate::la::Point;

/// A scalar grid field: one value per cell of the carrier domain.
#[derive(Clone, Debug)]
pub struct ScalarField<const N: usize> {
    pub carrier: Arc<GridDomain<N>>,
    pub values: Vec<f64>,
}

impl<const N: usize> ScalarField<N> {
    pub fn new(carrier: Arc<GridDomain<N>>, values: Vec<f64>) -> Result<Self> {
        if values.len() != carrier.len() {
            return Err(Error::Precondition(format!(
                "field has {} values for {} cells",
                values.len(),
                carrier.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition(
                "field contains non-finite values".into(),
            ));
        }
        Ok(ScalarField { carrier, values })
    }

    pub fn zeros(carrier: Arc<GridDomain<N>>) -> Self {
        let n = carrier.len();
        ScalarField {
            carrier,
            values: vec![0.0; n],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// A vector grid field with `N` components per cell.
#[derive(Clone, Debug)]
pub struct VectorField<const N: usize> {
    pub carrier: Arc<GridDomain<N>>,
    pub components: Vec<[f64; N]>,
}

impl<const N: usize> VectorField<N> {
    pub fn zeros(carrier: Arc<GridDomain<N>>) -> Self {
        let n = carrier.len();
        VectorField {
            carrier,
            components: vec![[0.0; N]; n],
        }
    }
}

/// A nonnegative density (mass per unit volume) on a grid, with optional
/// point atoms strictly inside the carrier.
#[derive(Clone, Debug)]
pub struct MeasureDensity<const N: usize> {
    pub carrier: Arc<GridDomain<N>>,
    pub density: Vec<f64>,
    pub atoms: Vec<(Point<N>, f64)>,
}

impl<const N: usize> MeasureDensity<N> {
    pub fn new(
        carrier: Arc<GridDomain<N>>,
        density: Vec<f64>,
        atoms: Vec<(Point<N>, f64)>,
    ) -> Result<Self> {
        if density.len() != carrier.len() {
            return Err(Error::Precondition(format!(
                "density has {} values for {} cells",
                density.len(),
                carrier.len()
            )));
        }
        if density.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Precondition(
                "density must be nonnegative and finite".into(),
            ));
        }
        for (p, m) in &atoms {
            if !(*m > 0.0) {
                return Err(Error::Precondition("atom masses must be positive".into()));
            }
            if !point_strictly_inside(&carrier, p) {
                return Err(Error::Precondition(format!(
                    "atom at {p:?} is not strictly inside the carrier"
                )));
            }
        }
        Ok(MeasureDensity {
            carrier,
            density,
            atoms,
        })
    }

    /// Uniform density `value` on the inside cells of the carrier.
    pub fn uniform(carrier: Arc<GridDomain<N>>, value: f64) -> Result<Self> {
        let density = carrier
            .inside
            .iter()
            .map(|b| if *b { value } else { 0.0 })
            .collect();
        Self::new(carrier, density, Vec::new())
    }

    /// Total mass: cell densities times cell measure plus atom masses.
    pub fn total_mass(&self) -> f64 {
        let cell = self.carrier.h().powi(N as i32);
        let grid: f64 = self.density.iter().sum::<f64>() * cell;
        grid + self.atoms.iter().map(|(_, m)| m).sum::<f64>()
    }

    /// Per-cell density with atoms deposited on their host cell
    /// (mass / h^N), the solver-facing representation.
    pub fn gridded(&self) -> Vec<f64> {
        let mut d = self.density.clone();
        let cell = self.carrier.h().powi(N as i32);
        for (p, m) in &self.atoms {
            let k = host_cell(&self.carrier, p);
            d[k] += m / cell;
        }
        d
    }

    /// Largest signed distance from any atom to the boundary (−∞ when there
    /// are no atoms). Negative values mean inside.
    pub fn atom_max_sdf(&self) -> f64 {
        self.atoms
            .iter()
            .map(|(p, _)| sdf_at(&self.carrier, p))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Multilinear interpolation of the stored signed distance at a point
/// (clamped to the grid).
pub fn sdf_at<const N: usize>(dom: &GridDomain<N>, p: &Point<N>) -> f64 {
    let geom = &dom.geom;
    let f = geom.fractional(p);
    let mut base = [0usize; N];
    let mut frac = [0.0; N];
    for i in 0..N {
        let c = f[i].clamp(0.0, (geom.shape[i] - 2) as f64);
        base[i] = c.floor() as usize;
        frac[i] = c - base[i] as f64;
    }
    let mut acc = 0.0;
    for corner in 0..(1usize << N) {
        let mut idx = base;
        let mut w = 1.0;
        for i in 0..N {
            if corner >> i & 1 == 1 {
                idx[i] += 1;
                w *= frac[i];
            } else {
                w *= 1.0 - frac[i];
            }
        }
        acc += w * dom.sdf[geom.index(&idx)];
    }
    acc
}

fn point_strictly_inside<const N: usize>(dom: &GridDomain<N>, p: &Point<N>) -> bool {
    let f = dom.geom.fractional(p);
    for i in 0..N {
        if f[i] < 0.0 || f[i] > (dom.geom.shape[i] - 1) as f64 {
            return false;
        }
    }
    sdf_at(dom, p) < 0.0
}

/// Index of the cell whose center is nearest to `p` (clamped to the grid).
pub fn host_cell<const N: usize>(dom: &GridDomain<N>, p: &Point<N>) -> usize {
    let f = dom.geom.fractional(p);
    let mut idx = [0usize; N];
    for i in 0..N {
        idx[i] = f[i].round().clamp(0.0, (dom.geom.shape[i] - 1) as f64) as usize;
    }
    dom.geom.index(&idx)
}
