//! Discrete Brenier maps between uniform point clouds.
//!
//! A uniform sample of a domain D is transported onto a uniform sample of the
//! ball B(0, r_D) by an exact minimum-cost bijection under squared-Euclidean
//! cost. The dual prices of the assignment yield a max-affine convex
//! potential whose gradient realizes the map; its convex extension off the
//! cloud has Lipschitz constant at most the target radius.

mod assignment;
mod halton;

pub use assignment::solve_assignment_dense;
pub use halton::HaltonSampler;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Shape};
use crate::la::{self, Point};

/// A weighted point cloud with uniform weights 1/n.
#[derive(Clone, Debug)]
pub struct PointCloud<const N: usize> {
    pub points: Vec<Point<N>>,
}

impl<const N: usize> PointCloud<N> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Point<N> {
        let mut c = [0.0; N];
        for p in &self.points {
            for i in 0..N {
                c[i] += p[i];
            }
        }
        la::scale(&c, 1.0 / self.points.len().max(1) as f64)
    }

    /// Mean distance to the nearest other point (brute force).
    pub fn mean_nn_spacing(&self) -> f64 {
        let n = self.points.len();
        if n < 2 {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..n {
            let mut best = f64::INFINITY;
            for j in 0..n {
                if i != j {
                    best = best.min(la::dist2(&self.points[i], &self.points[j]));
                }
            }
            acc += best.sqrt();
        }
        acc / n as f64
    }
}

/// Deterministic low-discrepancy sample of `spec`: Halton points in the
/// bounding box, rejected into the domain. The same seed reproduces the same
/// cloud bit for bit.
pub fn sample_uniform<const N: usize>(
    spec: &DomainSpec,
    n: usize,
    seed: u64,
) -> Result<PointCloud<N>> {
    let shape = spec.typed::<N>()?;
    sample_uniform_shape(&shape, n, seed)
}

pub fn sample_uniform_shape<const N: usize>(
    shape: &Shape<N>,
    n: usize,
    seed: u64,
) -> Result<PointCloud<N>> {
    sample_where(shape, n, seed, |s, x| s.contains(x))
}

/// Uniform sample of the open `margin`-neighborhood {dist(·, Ω) < margin}.
pub fn sample_dilated_shape<const N: usize>(
    shape: &Shape<N>,
    margin: f64,
    n: usize,
    seed: u64,
) -> Result<PointCloud<N>> {
    sample_where(shape, n, seed, move |s, x| s.sdf(x) < margin)
}

fn sample_where<const N: usize>(
    shape: &Shape<N>,
    n: usize,
    seed: u64,
    accept: impl Fn(&Shape<N>, &Point<N>) -> bool,
) -> Result<PointCloud<N>> {
    if n < 1 {
        return Err(Error::Precondition("sample size must be >= 1".into()));
    }
    let (mut lo, mut hi) = shape.bbox();
    // pad a little so dilated sampling stays covered
    for i in 0..N {
        let ext = hi[i] - lo[i];
        lo[i] -= 0.35 * ext;
        hi[i] += 0.35 * ext;
    }
    let mut halton = HaltonSampler::<N>::new(seed);
    let mut points = Vec::with_capacity(n);
    let mut draws = 0usize;
    while points.len() < n {
        let u = halton.next_point();
        draws += 1;
        let mut x = [0.0; N];
        for i in 0..N {
            x[i] = lo[i] + u[i] * (hi[i] - lo[i]);
        }
        if accept(shape, &x) {
            points.push(x);
        }
        if draws > 200 && (points.len() as f64) < 0.01 * draws as f64 {
            return Err(Error::Precondition(
                "rejection efficiency below 1%: degenerate spec or bounding box".into(),
            ));
        }
    }
    Ok(PointCloud { points })
}

/// Uniform Halton sample of the ball B(center, r) by radial inversion
/// (no rejection), used for transport targets.
pub fn sample_ball<const N: usize>(
    center: &Point<N>,
    r: f64,
    n: usize,
    seed: u64,
) -> PointCloud<N> {
    let mut halton = HaltonSampler::<N>::new(seed);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let u = halton.next_point();
        let radius = r * u[0].powf(1.0 / N as f64);
        let mut dir = [0.0; N];
        if N == 2 {
            let t = 2.0 * std::f64::consts::PI * u[1];
            dir[0] = t.cos();
            dir[1] = t.sin();
        } else {
            let z = 1.0 - 2.0 * u[1];
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let t = 2.0 * std::f64::consts::PI * u[2];
            dir[0] = rho * t.cos();
            dir[1] = rho * t.sin();
            dir[2] = z;
        }
        points.push(la::axpy(center, radius, &dir));
    }
    PointCloud { points }
}

/// An optimal transport plan between equal-size uniform clouds.
#[derive(Clone, Debug)]
pub struct BrenierTransport<const N: usize> {
    pub source: PointCloud<N>,
    pub target: PointCloud<N>,
    /// assignment[i] = index of the target matched to source i (a bijection).
    pub assignment: Vec<usize>,
    /// Convex potential values at the source points, shifted so min v = 0.
    pub potential: Vec<f64>,
    /// Row duals of the min-cost formulation (for certificates).
    pub dual_u: Vec<f64>,
    /// Column duals.
    pub dual_v: Vec<f64>,
    /// Total squared cost Σ ‖x_i − y_{π(i)}‖².
    pub total_cost: f64,
}

impl<const N: usize> BrenierTransport<N> {
    /// Matched target of source point `i`.
    pub fn target_of(&self, i: usize) -> &Point<N> {
        &self.target.points[self.assignment[i]]
    }

    /// Max over (i, j) of the dual feasibility violation
    /// u_i + v_j − ‖x_i − y_j‖² (nonpositive up to roundoff at optimality).
    pub fn dual_feasibility_violation(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (i, x) in self.source.points.iter().enumerate() {
            for (j, y) in self.target.points.iter().enumerate() {
                worst = worst.max(self.dual_u[i] + self.dual_v[j] - la::dist2(x, y));
            }
        }
        worst
    }

    /// Counts violations of cyclical monotonicity over `cycles` random
    /// 3-cycles: Σ ⟨x, y_matched⟩ must not be beaten by any cyclic
    /// rearrangement by more than `tol`.
    pub fn monotonicity_violations(&self, cycles: usize, tol: f64, seed: u64) -> usize {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = self.source.len();
        let mut violations = 0;
        for _ in 0..cycles {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            let c = rng.gen_range(0..n);
            if a == b || b == c || a == c {
                continue;
            }
            let (xa, xb, xc) = (
                &self.source.points[a],
                &self.source.points[b],
                &self.source.points[c],
            );
            let (ya, yb, yc) = (self.target_of(a), self.target_of(b), self.target_of(c));
            let matched = la::dot(xa, ya) + la::dot(xb, yb) + la::dot(xc, yc);
            let rolled = la::dot(xa, yb) + la::dot(xb, yc) + la::dot(xc, ya);
            if rolled > matched + tol {
                violations += 1;
            }
        }
        violations
    }

    /// Max-affine convex extension w(x) = max_i [v_i + ⟨y_{π(i)}, x − x_i⟩].
    /// Its Lipschitz constant is bounded by max_i ‖y_{π(i)}‖.
    pub fn extend_convex(&self, x: &Point<N>) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for (i, xi) in self.source.points.iter().enumerate() {
            let y = self.target_of(i);
            best = best.max(self.potential[i] + la::dot(y, &la::sub(x, xi)));
        }
        best
    }

    /// Largest matched target norm (the Lipschitz bound of the extension).
    pub fn max_target_norm(&self) -> f64 {
        (0..self.source.len())
            .map(|i| la::norm(self.target_of(i)))
            .fold(0.0, f64::max)
    }
}

/// Solves the exact minimum-cost bijection between equal-size clouds under
/// squared-Euclidean cost and recovers the convex potential from the duals.
pub fn solve_assignment<const N: usize>(
    source: &PointCloud<N>,
    target: &PointCloud<N>,
) -> Result<BrenierTransport<N>> {
    let n = source.len();
    if n != target.len() {
        return Err(Error::Precondition(format!(
            "cloud sizes differ: {n} vs {}",
            target.len()
        )));
    }
    if n == 0 {
        return Err(Error::Precondition("empty clouds".into()));
    }
    if n > 5000 {
        return Err(Error::Precondition(
            "assignment capped at n = 5000 (exact regime)".into(),
        ));
    }
    let mut cost = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            cost[i * n + j] = la::dist2(&source.points[i], &target.points[j]);
        }
    }
    let sol = solve_assignment_dense(&cost, n)?;
    // the plan must be a bijection: every target used exactly once
    let mut used = vec![false; n];
    for i in 0..n {
        let j = sol.col_of_row[i];
        assert!(j < n && !used[j], "assignment is not a bijection");
        used[j] = true;
    }
    let mut total = 0.0;
    for i in 0..n {
        total += cost[i * n + sol.col_of_row[i]];
    }
    // Brenier potential from the duals: the c-transform pair for squared cost
    // is alpha_i = (|x_i|^2 - u_i)/2, psi_j = (|y_j|^2 - v_j)/2, with
    // v(x_i) = max_j(<y_j, x_i> - psi_j) attained at the matched column.
    let mut potential: Vec<f64> = (0..n)
        .map(|i| (la::dot(&source.points[i], &source.points[i]) - sol.u[i]) / 2.0)
        .collect();
    let min_v = potential.iter().cloned().fold(f64::INFINITY, f64::min);
    for v in potential.iter_mut() {
        *v -= min_v;
    }
    Ok(BrenierTransport {
        source: source.clone(),
        target: target.clone(),
        assignment: sol.col_of_row,
        potential,
        dual_u: sol.u,
        dual_v: sol.v,
        total_cost: total,
    })
}

/// Diagnostics of a transport plan: range of the matched targets, local
/// Laplacian/Hessian statistics of the potential from weighted quadratic
/// fits, and cyclical monotonicity sampling.
#[derive(Clone, Debug)]
pub struct TransportDiagnostics {
    pub max_target_norm: f64,
    pub target_radius: f64,
    /// Fraction of fitted interior points with Hessian trace ≥ N − 0.2.
    pub trace_pass_fraction: f64,
    /// Histogram summary of fitted Hessian determinants.
    pub det_mean: f64,
    pub det_stddev: f64,
    pub fitted_points: usize,
    pub skipped_points: usize,
    pub monotonicity_violations: usize,
}

/// Runs the local-fit diagnostics. `interior` marks source points far enough
/// from the domain boundary for an unbiased neighborhood fit.
pub fn brenier_diagnostics<const N: usize>(
    t: &BrenierTransport<N>,
    r_target: f64,
    interior: &[bool],
    seed: u64,
) -> Result<TransportDiagnostics> {
    let n = t.source.len();
    if n < 50 {
        return Err(Error::Precondition(
            "diagnostics need at least 50 points for local fits".into(),
        ));
    }
    if interior.len() != n {
        return Err(Error::Precondition("interior mask length mismatch".into()));
    }
    let k_neighbors = 2 * N + 6;
    let mut trace_pass = 0usize;
    let mut fitted = 0usize;
    let mut skipped = 0usize;
    let mut dets = Vec::new();

    // brute-force kNN per interior point
    let mut dist_idx: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        if !interior[i] {
            continue;
        }
        dist_idx.clear();
        for j in 0..n {
            if j != i {
                dist_idx.push((la::dist2(&t.source.points[i], &t.source.points[j]), j));
            }
        }
        dist_idx.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let neigh = &dist_idx[..k_neighbors.min(dist_idx.len())];
        let spacing =
            (neigh.iter().map(|(d, _)| d.sqrt()).sum::<f64>() / neigh.len() as f64).max(1e-12);
        let bandwidth = 2.0 * spacing;

        match fit_hessian::<N>(t, i, neigh, bandwidth) {
            Some(hess) => {
                fitted += 1;
                let mut tr = 0.0;
                for d in 0..N {
                    tr += hess[d][d];
                }
                if tr >= N as f64 - 0.2 {
                    trace_pass += 1;
                }
                dets.push(det_small::<N>(&hess));
            }
            None => skipped += 1,
        }
    }
    let det_mean = dets.iter().sum::<f64>() / dets.len().max(1) as f64;
    let det_var = dets
        .iter()
        .map(|d| (d - det_mean) * (d - det_mean))
        .sum::<f64>()
        / dets.len().max(1) as f64;
    Ok(TransportDiagnostics {
        max_target_norm: t.max_target_norm(),
        target_radius: r_target,
        trace_pass_fraction: trace_pass as f64 / fitted.max(1) as f64,
        det_mean,
        det_stddev: det_var.sqrt(),
        fitted_points: fitted,
        skipped_points: skipped,
        monotonicity_violations: t.monotonicity_violations(10_000, 1e-9, seed),
    })
}

/// Weighted least-squares quadratic fit of the potential around point `i`,
/// matched against its gradient data: the assignment provides exact
/// subgradients ∇v(x_j) = y_{π(j)}, so the local model
/// ∇v(x) ≈ g + H (x − x_i) is fitted to the matched targets. (Fitting
/// potential *values* instead would inherit the vertex noise of the dual
/// prices, which is of the same order as the quadratic signal.)
/// Returns the fitted symmetric Hessian or `None` on rank deficiency.
fn fit_hessian<const N: usize>(
    t: &BrenierTransport<N>,
    i: usize,
    neighbors: &[(f64, usize)],
    bandwidth: f64,
) -> Option<[[f64; N]; N]> {
    // unknowns: gradient at the center plus the symmetric Hessian
    let nq = N * (N + 1) / 2;
    let m = N + nq;
    let mut ata = vec![vec![0.0; m]; m];
    let mut atb = vec![0.0; m];
    let x0 = &t.source.points[i];
    let mut row = vec![0.0; m];
    let mut points: Vec<usize> = neighbors.iter().map(|(_, j)| *j).collect();
    points.push(i);
    // symmetric Hessian index helper (a <= b)
    let sym = |a: usize, b: usize| -> usize {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        a * N - a * (a + 1) / 2 + b
    };
    for &j in &points {
        let d = la::sub(&t.source.points[j], x0);
        let wgt = (-la::dot(&d, &d) / (2.0 * bandwidth * bandwidth)).exp();
        let y = t.target_of(j);
        // one equation per gradient component: y_a = g_a + Σ_b H_ab d_b
        for a in 0..N {
            for r in row.iter_mut() {
                *r = 0.0;
            }
            row[a] = 1.0;
            for b in 0..N {
                row[N + sym(a, b)] += d[b];
            }
            for p in 0..m {
                atb[p] += wgt * row[p] * y[a];
                for q in 0..m {
                    ata[p][q] += wgt * row[p] * row[q];
                }
            }
        }
    }
    let sol = la::cholesky_solve(&ata, &atb, 1e-12)?;
    let mut hess = [[0.0; N]; N];
    for a in 0..N {
        for b in 0..N {
            hess[a][b] = sol[N + sym(a, b)];
        }
    }
    Some(hess)
}

fn det_small<const N: usize>(m: &[[f64; N]; N]) -> f64 {
    match N {
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => f64::NAN,
    }
}

#[cfg(test)]
mod tests;
