//! Mollification with the standard compactly supported bump kernel.

use super::field::{MeasureDensity, ScalarField};
use crate::error::{Error, Result};
use crate::geometry::GridGeometry;

/// Discrete rotationally invariant bump kernel φ_ε sampled at cell offsets
/// within radius ε and normalized to unit total weight.
struct BumpKernel<const N: usize> {
    offsets: Vec<([isize; N], f64)>,
}

impl<const N: usize> BumpKernel<N> {
    fn new(epsilon: f64, h: f64) -> Result<Self> {
        if epsilon < 2.0 * h {
            return Err(Error::TooCoarse(format!(
                "mollifier radius {epsilon:.4} is below 2h = {:.4}",
                2.0 * h
            )));
        }
        let m = (epsilon / h).floor() as isize;
        let mut offsets = Vec::new();
        let mut total = 0.0;
        let mut off = [-m; N];
        'outer: loop {
            let mut r2 = 0.0;
            for i in 0..N {
                r2 += (off[i] as f64 * h).powi(2);
            }
            let t2 = r2 / (epsilon * epsilon);
            if t2 < 1.0 {
                let w = (-1.0 / (1.0 - t2)).exp();
                offsets.push((off, w));
                total += w;
            }
            let mut i = 0;
            loop {
                if i == N {
                    break 'outer;
                }
                off[i] += 1;
                if off[i] <= m {
                    break;
                }
                off[i] = -m;
                i += 1;
            }
        }
        for (_, w) in offsets.iter_mut() {
            *w /= total;
        }
        Ok(BumpKernel { offsets })
    }
}

fn shifted_index<const N: usize>(
    geom: &GridGeometry<N>,
    idx: &[usize; N],
    off: &[isize; N],
) -> Option<usize> {
    let mut j = [0usize; N];
    for i in 0..N {
        let v = idx[i] as isize + off[i];
        if v < 0 || v as usize >= geom.shape[i] {
            return None;
        }
        j[i] = v as usize;
    }
    Some(geom.index(&j))
}

/// Mollifies a density: atoms are deposited on their host cells first, then
/// the grid density is convolved with φ_ε (zero padding at the box faces).
/// Total mass is preserved to machine precision while the support stays
/// inside the grid.
pub fn mollify_density<const N: usize>(
    input: &MeasureDensity<N>,
    epsilon: f64,
) -> Result<MeasureDensity<N>> {
    let geom = input.carrier.geom.clone();
    let kernel = BumpKernel::<N>::new(epsilon, geom.h)?;
    let src = input.gridded();
    let mut out = vec![0.0; src.len()];
    for k in 0..src.len() {
        if src[k] == 0.0 {
            continue;
        }
        let idx = geom.unindex(k);
        for (off, w) in &kernel.offsets {
            if let Some(j) = shifted_index(&geom, &idx, off) {
                out[j] += w * src[k];
            }
        }
    }
    MeasureDensity::new(input.carrier.clone(), out, Vec::new())
}

/// Mollifies a scalar field. Near the box faces the kernel is renormalized to
/// the covered weight so constants are reproduced exactly.
pub fn mollify_field<const N: usize>(
    input: &ScalarField<N>,
    epsilon: f64,
) -> Result<ScalarField<N>> {
    let geom = input.carrier.geom.clone();
    let kernel = BumpKernel::<N>::new(epsilon, geom.h)?;
    let src = &input.values;
    let mut out = vec![0.0; src.len()];
    for k in 0..src.len() {
        let idx = geom.unindex(k);
        let mut acc = 0.0;
        let mut cover = 0.0;
        for (off, w) in &kernel.offsets {
            if let Some(j) = shifted_index(&geom, &idx, off) {
                acc += w * src[j];
                cover += w;
            }
        }
        out[k] = acc / cover;
    }
    ScalarField::new(input.carrier.clone(), out)
}
