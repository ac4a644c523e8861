//! The λ₁ solver: direct minimax estimation over harmonic gradient bases,
//! the constructive transport/balayage upper bound, and minimizer condition
//! checks.

mod basis;
mod conditions;
mod minimax;
mod prooftrace;

pub use basis::{build_basis, harmonic_polynomials, BasisFunction, HarmonicBasis, Poly};
pub use conditions::{
    check_minimizer_conditions, BasisCandidate, ConditionOptions, ConditionReport, GridCandidate,
    PotentialCandidate,
};
pub use minimax::{minimize_sup, residual_at, Lambda1Result, MinimaxOptions, MinimaxProblem};
pub use prooftrace::{
    cap_volume_fraction, proof_trace_upper_bound, ProofTrace, ProofTraceOptions, ProofTraceReport,
};

use crate::error::Result;
use crate::geometry::{boundary_samples, DomainSpec};
use crate::transport::HaltonSampler;

/// End-to-end direct estimate: builds the basis, samples the boundary
/// (bumping the count to keep at least 8 samples per basis function),
/// runs the homotopy and certifies on a 4×-densified superset.
pub fn solve_lambda1<const N: usize>(
    spec: &DomainSpec,
    degree: usize,
    boundary_count: usize,
    opts: &MinimaxOptions,
) -> Result<(Lambda1Result, HarmonicBasis<N>)> {
    let basis = build_basis::<N>(spec, degree)?;
    let count = boundary_count.max(8 * basis.len());
    let samples = boundary_samples::<N>(spec, count)?;
    let mut dense = boundary_samples::<N>(spec, 4 * count)?;
    dense.extend_from_slice(&samples);
    let result = minimize_sup(&basis, &samples, &dense, opts)?;
    Ok((result, basis))
}

/// Max residual over interior probe points for a solved coefficient vector
/// (the boundary max must dominate it up to discretization).
pub fn interior_residual_max<const N: usize>(
    spec: &DomainSpec,
    basis: &HarmonicBasis<N>,
    coefficients: &[f64],
    count: usize,
    seed: u64,
) -> Result<f64> {
    let shape = spec.typed::<N>()?;
    let (lo, hi) = shape.bbox();
    let mut halton = HaltonSampler::<N>::new(seed);
    let mut worst = 0.0f64;
    let mut found = 0usize;
    let mut guard = 0usize;
    while found < count && guard < 300 * count {
        guard += 1;
        let u = halton.next_point();
        let mut x = [0.0; N];
        for i in 0..N {
            x[i] = lo[i] + u[i] * (hi[i] - lo[i]);
        }
        if shape.contains(&x) {
            found += 1;
            worst = worst.max(residual_at(basis, coefficients, &x));
        }
    }
    Ok(worst)
}
