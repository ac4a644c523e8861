//! Convex minimax over harmonic gradients by p-norm homotopy.
//!
//! Minimizes F(c) = max_i ‖(x_i − c₀) − Σ_j c_j ∇h_j(x_i)‖ over boundary
//! samples. F is convex; the solver minimizes the smooth surrogate
//! F_p = (Σ ‖r_i‖^p)^{1/p} for p = 2, 4, ..., 128 by gradient descent with
//! Armijo backtracking, warm-starting each stage, and reports the true
//! sample max at the best stage iterate (never the surrogate).

use super::basis::HarmonicBasis;
use crate::error::{Error, Result};
use crate::geometry::BoundaryPoint;
use crate::la::{self, Point};

#[derive(Clone, Debug)]
pub struct MinimaxOptions {
    /// Smoothing ladder.
    pub stages: Vec<f64>,
    /// Iteration cap per stage.
    pub max_iterations: usize,
    /// Gradient norm threshold (relative to the objective).
    pub gradient_tol: f64,
    /// Stage-to-stage relative improvement below which the homotopy stops.
    pub improvement_tol: f64,
}

impl Default for MinimaxOptions {
    fn default() -> Self {
        MinimaxOptions {
            stages: vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0],
            max_iterations: 6000,
            gradient_tol: 1e-12,
            improvement_tol: 1e-10,
        }
    }
}

/// Result of the minimax solve.
#[derive(Clone, Debug)]
pub struct Lambda1Result {
    /// True max of the residual profile over the optimization samples.
    pub value: f64,
    /// Max over the 4×-densified sample set (a superset of the
    /// optimization samples, so certificate ≥ value).
    pub certificate: f64,
    /// Coefficients in the original basis ordering.
    pub coefficients: Vec<f64>,
    /// ‖(x_i − c₀) − ∇h(x_i)‖ per optimization sample.
    pub residuals: Vec<f64>,
    /// (p, true max at that stage's kept iterate).
    pub stage_trace: Vec<(f64, f64)>,
}

/// Precomputed sample data: recentered targets and basis gradients.
pub struct MinimaxProblem<const N: usize> {
    pub targets: Vec<Point<N>>,
    /// grads[i * n_basis + j] = ∇h_j(x_i), with column normalization folded in.
    grads: Vec<Point<N>>,
    col_scale: Vec<f64>,
    n_basis: usize,
}

impl<const N: usize> MinimaxProblem<N> {
    pub fn new(basis: &HarmonicBasis<N>, samples: &[BoundaryPoint<N>]) -> Result<Self> {
        let n_basis = basis.len();
        if n_basis == 0 {
            return Err(Error::Precondition("empty basis".into()));
        }
        if samples.len() < 8 * n_basis {
            return Err(Error::Precondition(format!(
                "{} samples for {n_basis} basis functions; need at least 8 per function",
                samples.len()
            )));
        }
        let targets: Vec<Point<N>> = samples
            .iter()
            .map(|b| la::sub(&b.point, &basis.center))
            .collect();
        let mut grads = vec![[0.0; N]; samples.len() * n_basis];
        for (i, b) in samples.iter().enumerate() {
            for j in 0..n_basis {
                grads[i * n_basis + j] = basis.gradient(j, &b.point);
            }
        }
        // column normalization for conditioning
        let mut col_scale = vec![0.0f64; n_basis];
        for i in 0..samples.len() {
            for j in 0..n_basis {
                col_scale[j] = col_scale[j].max(la::norm(&grads[i * n_basis + j]));
            }
        }
        for s in col_scale.iter_mut() {
            if *s <= 0.0 {
                *s = 1.0;
            }
        }
        for i in 0..samples.len() {
            for j in 0..n_basis {
                grads[i * n_basis + j] = la::scale(&grads[i * n_basis + j], 1.0 / col_scale[j]);
            }
        }
        Ok(MinimaxProblem {
            targets,
            grads,
            col_scale,
            n_basis,
        })
    }

    pub fn residual(&self, c: &[f64], i: usize) -> Point<N> {
        let mut r = self.targets[i];
        for j in 0..self.n_basis {
            let g = &self.grads[i * self.n_basis + j];
            for a in 0..N {
                r[a] -= c[j] * g[a];
            }
        }
        r
    }

    /// True objective: max residual norm over the samples.
    pub fn true_max(&self, c: &[f64]) -> f64 {
        (0..self.targets.len())
            .map(|i| la::norm(&self.residual(c, i)))
            .fold(0.0, f64::max)
    }

    pub fn residual_norms(&self, c: &[f64]) -> Vec<f64> {
        (0..self.targets.len())
            .map(|i| la::norm(&self.residual(c, i)))
            .collect()
    }

    /// Smooth surrogate F_p and its gradient, computed in max-normalized
    /// form for stability at large p.
    pub fn surrogate(&self, c: &[f64], p: f64, grad_out: Option<&mut [f64]>) -> f64 {
        let n = self.targets.len();
        let mut norms = Vec::with_capacity(n);
        let mut residuals = Vec::with_capacity(n);
        let mut m = 0.0f64;
        for i in 0..n {
            let r = self.residual(c, i);
            let s = la::norm(&r);
            m = m.max(s);
            norms.push(s);
            residuals.push(r);
        }
        if m == 0.0 {
            if let Some(g) = grad_out {
                g.fill(0.0);
            }
            return 0.0;
        }
        let mut sum = 0.0;
        for s in &norms {
            sum += (s / m).powf(p);
        }
        let f = m * sum.powf(1.0 / p);
        if let Some(g) = grad_out {
            // dF/dc_j = -Σ_i (s_i/F)^{p-1} <r_i, g_ij> / s_i
            g.fill(0.0);
            let scale = sum.powf(-(p - 1.0) / p); // (M/F)^{p-1}
            for i in 0..n {
                let s = norms[i];
                if s <= 0.0 {
                    continue;
                }
                let w = (s / m).powf(p - 1.0) * scale / s;
                for j in 0..self.n_basis {
                    g[j] -= w * la::dot(&residuals[i], &self.grads[i * self.n_basis + j]);
                }
            }
        }
        f
    }

    /// Gradient descent with Armijo backtracking on F_p from `c`.
    fn descend(&self, c: &mut [f64], p: f64, opts: &MinimaxOptions) {
        let m = self.n_basis;
        let mut g = vec![0.0; m];
        let mut f = self.surrogate(c, p, Some(&mut g));
        let mut step = 0.1;
        let mut trial = vec![0.0; m];
        for _ in 0..opts.max_iterations {
            let g2: f64 = g.iter().map(|v| v * v).sum();
            let gn = g2.sqrt();
            if gn <= opts.gradient_tol * f.max(1e-30) {
                break;
            }
            // backtracking line search
            let mut accepted = false;
            let mut backtracks = 0;
            while backtracks < 60 {
                for j in 0..m {
                    trial[j] = c[j] - step * g[j];
                }
                let ft = self.surrogate(&trial, p, None);
                if ft <= f - 1e-4 * step * g2 {
                    c.copy_from_slice(&trial);
                    let fprev = f;
                    f = self.surrogate(c, p, Some(&mut g));
                    if backtracks == 0 {
                        step *= 1.5;
                    }
                    accepted = true;
                    if fprev - f <= 1e-15 * f.max(1e-30) {
                        // cost plateau: converged to line-search resolution
                        return;
                    }
                    break;
                }
                step *= 0.5;
                backtracks += 1;
            }
            if !accepted {
                break;
            }
        }
    }
}

/// Runs the homotopy on precomputed problems (`dense` is the certificate
/// sample set, a superset of the optimization set).
pub fn minimize_sup<const N: usize>(
    basis: &HarmonicBasis<N>,
    samples: &[BoundaryPoint<N>],
    dense_samples: &[BoundaryPoint<N>],
    opts: &MinimaxOptions,
) -> Result<Lambda1Result> {
    let problem = MinimaxProblem::new(basis, samples)?;
    let mut c = vec![0.0; problem.n_basis];
    let mut best_c = c.clone();
    let mut best_f = problem.true_max(&c);
    let mut stage_trace = Vec::new();
    let mut prev_kept = best_f;
    for (si, &p) in opts.stages.iter().enumerate() {
        problem.descend(&mut c, p, opts);
        let f_true = problem.true_max(&c);
        if !f_true.is_finite() {
            return Err(Error::NonConvergence {
                what: format!("minimax stage p = {p}"),
                residual: f_true,
                iterations: si,
            });
        }
        if f_true < best_f {
            best_f = f_true;
            best_c.copy_from_slice(&c);
        }
        // the kept iterate per stage is the best seen so far, which makes
        // the homotopy trace monotone by construction
        stage_trace.push((p, best_f));
        if si > 0 && (prev_kept - best_f).abs() <= opts.improvement_tol * best_f.max(1e-30) {
            break;
        }
        prev_kept = best_f;
    }

    // report in original (unnormalized) basis coordinates
    let coefficients: Vec<f64> = best_c
        .iter()
        .zip(problem.col_scale.iter())
        .map(|(c, s)| c / s)
        .collect();

    let residuals = problem.residual_norms(&best_c);
    let value = residuals.iter().cloned().fold(0.0, f64::max);

    // certificate: evaluate the frozen coefficients on the denser set
    let mut certificate = value;
    for b in dense_samples {
        let mut r = la::sub(&b.point, &basis.center);
        let g = basis.combine_gradient(&coefficients, &b.point);
        for a in 0..N {
            r[a] -= g[a];
        }
        certificate = certificate.max(la::norm(&r));
    }

    Ok(Lambda1Result {
        value,
        certificate,
        coefficients,
        residuals,
        stage_trace,
    })
}

/// Residual ‖(x − c₀) − ∇h(x)‖ of a coefficient vector at one point.
pub fn residual_at<const N: usize>(
    basis: &HarmonicBasis<N>,
    coefficients: &[f64],
    x: &Point<N>,
) -> f64 {
    let mut r = la::sub(x, &basis.center);
    let g = basis.combine_gradient(coefficients, x);
    for a in 0..N {
        r[a] -= g[a];
    }
    la::norm(&r)
}
