//! Command runners: each writes its artifacts into the output directory and
//! returns a short stdout summary.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anacon_core::balayage::{partial_balayage, BalayageOptions};
use anacon_core::gfd::write_gfd;
use anacon_core::lambda1::{
    build_basis, minimize_sup, proof_trace_upper_bound, MinimaxOptions, ProofTraceOptions,
};
use anacon_core::oracles::oracle_record;
use anacon_core::transport::{brenier_diagnostics, sample_ball, sample_uniform, solve_assignment};
use anacon_core::{
    boundary_samples, equivalent_radius, rasterize, rasterize_with, DomainSpec, MeasureDensity,
    ScalarField,
};

use crate::config::RunConfig;
use crate::{CliResult, Failure};

fn ensure_out(cfg: &RunConfig, out_override: Option<&Path>) -> CliResult<PathBuf> {
    let dir = out_override
        .map(Path::to_path_buf)
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("anacon-out"));
    std::fs::create_dir_all(&dir)
        .map_err(|e| Failure::Config(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Config(format!("serialization: {e}")))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

fn echo_config(cfg: &RunConfig, dir: &Path) -> CliResult<()> {
    write_json(&dir.join("config.echo.json"), cfg)
}

fn float_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&v.to_string());
    }
    out.push('\n');
}

/// `lambda1`: direct minimax estimate; emits `lambda1.json` (value,
/// certificate, degree, coefficients, residual CSV path) and `residual.csv`.
pub fn run_lambda1(cfg: &RunConfig, out: Option<&Path>) -> CliResult<String> {
    let dir = ensure_out(cfg, out)?;
    echo_config(cfg, &dir)?;
    let spec = cfg.require_domain()?;
    match spec.dim() {
        2 => lambda1_dim::<2>(cfg, spec, &dir),
        _ => lambda1_dim::<3>(cfg, spec, &dir),
    }
}

fn lambda1_dim<const N: usize>(
    cfg: &RunConfig,
    spec: &DomainSpec,
    dir: &Path,
) -> CliResult<String> {
    let basis = build_basis::<N>(spec, cfg.degree)?;
    let count = cfg.boundary_samples.max(8 * basis.len());
    let samples = boundary_samples::<N>(spec, count)?;
    let mut dense = boundary_samples::<N>(spec, 4 * count)?;
    dense.extend_from_slice(&samples);
    let opts = MinimaxOptions {
        improvement_tol: cfg.tolerances.optimizer,
        ..Default::default()
    };
    let result = minimize_sup(&basis, &samples, &dense, &opts)?;

    let mut csv = String::from(match N {
        2 => "x,y,residual\n",
        _ => "x,y,z,residual\n",
    });
    for (b, r) in samples.iter().zip(result.residuals.iter()) {
        let mut row: Vec<f64> = b.point.to_vec();
        row.push(*r);
        float_row(&mut csv, &row);
    }
    let csv_path = dir.join("residual.csv");
    std::fs::write(&csv_path, csv)
        .map_err(|e| Failure::Config(format!("cannot write residual.csv: {e}")))?;

    let json = serde_json::json!({
        "value": result.value,
        "certificate": result.certificate,
        "degree": cfg.degree,
        "coefficients": result.coefficients,
        "residual_csv_path": csv_path.to_string_lossy(),
    });
    write_json(&dir.join("lambda1.json"), &json)?;
    Ok(format!(
        "lambda1 = {:.6} (certificate {:.6}) over {} samples",
        result.value,
        result.certificate,
        samples.len()
    ))
}

/// `balayage`: sweeps a configured measure onto the uniform cap; emits η,
/// the deficiency and the saturated set in GFD1 plus a JSON mass report.
pub fn run_balayage(cfg: &RunConfig, out: Option<&Path>) -> CliResult<String> {
    let dir = ensure_out(cfg, out)?;
    echo_config(cfg, &dir)?;
    let spec = cfg.require_domain()?;
    match spec.dim() {
        2 => balayage_dim::<2>(cfg, spec, &dir),
        _ => balayage_dim::<3>(cfg, spec, &dir),
    }
}

fn balayage_dim<const N: usize>(
    cfg: &RunConfig,
    spec: &DomainSpec,
    dir: &Path,
) -> CliResult<String> {
    let bcfg = cfg
        .balayage
        .as_ref()
        .ok_or_else(|| Failure::Config("balayage requires a 'balayage' section".into()))?;
    let container = Arc::new(rasterize::<N>(spec, cfg.resolution)?);
    let nu = MeasureDensity::uniform(container.clone(), bcfg.nu_density.unwrap_or(N as f64))?;

    let mut density = vec![0.0; container.len()];
    if let Some(u) = &bcfg.mu_uniform {
        let sub = rasterize_with::<N>(&u.domain, &container.geom)?;
        for k in 0..container.len() {
            if sub.inside[k] {
                density[k] += u.density;
            }
        }
    }
    let mut atoms = Vec::new();
    for a in &bcfg.mu_atoms {
        if a.point.len() != N {
            return Err(Failure::Config("atom point dimension mismatch".into()));
        }
        let mut p = [0.0; N];
        p.copy_from_slice(&a.point);
        atoms.push((p, a.mass));
    }
    let mu = MeasureDensity::new(container.clone(), density, atoms)?;

    let opts = BalayageOptions {
        complementarity_tol: cfg.tolerances.complementarity,
        ..Default::default()
    };
    let result = partial_balayage(&container, &mu, &nu, &opts)?;

    let eta_field = ScalarField::new(container.clone(), result.eta.density.clone())?;
    write_gfd(&dir.join("eta.gfd"), &eta_field)?;
    write_gfd(&dir.join("deficiency.gfd"), &result.deficiency)?;
    let sat_field = ScalarField::new(
        container.clone(),
        result
            .saturated
            .iter()
            .map(|s| if *s { 1.0 } else { 0.0 })
            .collect(),
    )?;
    write_gfd(&dir.join("saturated.gfd"), &sat_field)?;

    let (_, components) = result.saturated_set(result.default_threshold());
    let json = serde_json::json!({
        "mu_total": result.mass.mu_total,
        "eta_total": result.mass.eta_total,
        "boundary_leakage": result.mass.boundary_leakage,
        "complementarity_residual": result.residual,
        "cap_excess": result.cap_excess,
        "saturated_cells": result.saturated.iter().filter(|s| **s).count(),
        "saturated_components": components,
    });
    write_json(&dir.join("mass_report.json"), &json)?;
    Ok(format!(
        "balayage: {} -> {} (leakage {:.3e}, residual {:.3e})",
        result.mass.mu_total, result.mass.eta_total, result.mass.boundary_leakage, result.residual
    ))
}

/// `brenier`: samples the domain and the volume-matched ball, solves the
/// assignment, and emits the plan as CSV plus diagnostics as JSON.
pub fn run_brenier(cfg: &RunConfig, out: Option<&Path>) -> CliResult<String> {
    let dir = ensure_out(cfg, out)?;
    echo_config(cfg, &dir)?;
    let spec = cfg.require_domain()?;
    match spec.dim() {
        2 => brenier_dim::<2>(cfg, spec, &dir),
        _ => brenier_dim::<3>(cfg, spec, &dir),
    }
}

fn brenier_dim<const N: usize>(
    cfg: &RunConfig,
    spec: &DomainSpec,
    dir: &Path,
) -> CliResult<String> {
    let shape = spec.typed::<N>()?;
    let volume = match shape.volume() {
        Ok(v) => v,
        Err(_) => rasterize::<N>(spec, cfg.resolution)?.volume(),
    };
    let r_d = equivalent_radius(volume, N)?;
    let n = cfg.transport_n;
    let source = sample_uniform::<N>(spec, n, cfg.seed)?;
    let target = sample_ball::<N>(&[0.0; N], r_d, n, cfg.seed + 1);
    let transport = solve_assignment(&source, &target)?;

    let spacing = if n > 1 {
        (volume / n as f64).powf(1.0 / N as f64)
    } else {
        0.0
    };
    let interior: Vec<bool> = source
        .points
        .iter()
        .map(|p| shape.sdf(p) < -2.5 * spacing)
        .collect();

    let mut csv = String::from(match N {
        2 => "source_index,target_index,sx,sy,tx,ty\n",
        _ => "source_index,target_index,sx,sy,sz,tx,ty,tz\n",
    });
    for i in 0..n {
        let j = transport.assignment[i];
        csv.push_str(&format!("{i},{j}"));
        for v in source.points[i].iter().chain(target.points[j].iter()) {
            csv.push(',');
            csv.push_str(&v.to_string());
        }
        csv.push('\n');
    }
    std::fs::write(dir.join("assignment.csv"), csv)
        .map_err(|e| Failure::Config(format!("cannot write assignment.csv: {e}")))?;

    let summary: String;
    if n >= 50 {
        let diag = brenier_diagnostics(&transport, r_d, &interior, cfg.seed)?;
        let json = serde_json::json!({
            "n": n,
            "r_target": r_d,
            "total_cost": transport.total_cost,
            "max_target_norm": diag.max_target_norm,
            "trace_pass_fraction": diag.trace_pass_fraction,
            "det_mean": diag.det_mean,
            "det_stddev": diag.det_stddev,
            "fitted_points": diag.fitted_points,
            "skipped_points": diag.skipped_points,
            "monotonicity_violations": diag.monotonicity_violations,
            "dual_feasibility_violation": transport.dual_feasibility_violation(),
        });
        write_json(&dir.join("diagnostics.json"), &json)?;
        summary = format!(
            "brenier: n = {n}, cost = {:.6}, monotonicity violations = {}",
            transport.total_cost, diag.monotonicity_violations
        );
    } else {
        let json = serde_json::json!({
            "n": n,
            "r_target": r_d,
            "total_cost": transport.total_cost,
            "dual_feasibility_violation": transport.dual_feasibility_violation(),
        });
        write_json(&dir.join("diagnostics.json"), &json)?;
        summary = format!("brenier: n = {n}, cost = {:.6}", transport.total_cost);
    }
    Ok(summary)
}

/// `proof-trace`: the constructive upper-bound pipeline with GFD dumps of
/// the mollified extension, the swept measure, the deficiency and the swept
/// potential.
pub fn run_proof_trace(cfg: &RunConfig, out: Option<&Path>) -> CliResult<String> {
    let dir = ensure_out(cfg, out)?;
    echo_config(cfg, &dir)?;
    let spec = cfg.require_domain()?;
    match spec.dim() {
        2 => proof_trace_dim::<2>(cfg, spec, &dir),
        _ => proof_trace_dim::<3>(cfg, spec, &dir),
    }
}

fn proof_trace_dim<const N: usize>(
    cfg: &RunConfig,
    spec: &DomainSpec,
    dir: &Path,
) -> CliResult<String> {
    let pt = cfg
        .proof_trace
        .clone()
        .unwrap_or_else(|| serde_json::from_str("{}").expect("default proof trace config"));
    let opts = ProofTraceOptions {
        resolution: cfg.resolution,
        n_transport: cfg.transport_n,
        seed: cfg.seed,
        radius_margin: pt.radius_margin,
        mu_smoothing: pt.mu_smoothing,
        boundary_count: cfg.boundary_samples.max(512),
    };
    let trace = proof_trace_upper_bound::<N>(spec, &opts)?;
    write_json(&dir.join("trace.json"), &trace.report)?;
    if let (Some(w), Some(bal), Some(green)) =
        (&trace.w_eps, &trace.balayage, &trace.green_potential)
    {
        write_gfd(&dir.join("w_eps.gfd"), w)?;
        let container = trace.container.as_ref().expect("container present");
        let eta_field = ScalarField::new(container.clone(), bal.eta.density.clone())?;
        write_gfd(&dir.join("eta.gfd"), &eta_field)?;
        write_gfd(&dir.join("deficiency.gfd"), &bal.deficiency)?;
        write_gfd(&dir.join("green.gfd"), green)?;
    }
    let r = &trace.report;
    if !r.omega_in_saturated {
        return Err(Failure::Check {
            check: "proof_trace_saturation".into(),
            margin: -(r.missing_omega_cells as f64),
            detail: format!(
                "{} Ω cells outside the saturated set: discretization too coarse",
                r.missing_omega_cells
            ),
        });
    }
    Ok(format!(
        "proof trace: bound = {:.6} (r_D = {:.6}, r_Ω = {:.6}{})",
        r.bound,
        r.r_d,
        r.r_omega,
        if r.short_circuit {
            ", short-circuit"
        } else {
            ""
        }
    ))
}

/// `oracle`: prints and writes the closed-form record for the domain.
pub fn run_oracle(cfg: &RunConfig, out: Option<&Path>) -> CliResult<String> {
    let dir = ensure_out(cfg, out)?;
    echo_config(cfg, &dir)?;
    let spec = cfg.require_domain()?;
    let record = oracle_record(spec)?;
    write_json(&dir.join("oracle.json"), &record)?;
    serde_json::to_string_pretty(&record).map_err(|e| Failure::Config(e.to_string()))
}

/// `verify --suite`: runs the built-in domains and emits the verification
/// report; fails (exit 1) when any check fails.
pub fn run_verify(
    cfg: &RunConfig,
    with_proof_trace: bool,
    out: Option<&Path>,
) -> CliResult<String> {
    let dir = ensure_out(cfg, out)?;
    echo_config(cfg, &dir)?;
    let report = crate::suite::run_suite(cfg, with_proof_trace)?;
    write_json(&dir.join("report.json"), &report)?;
    std::fs::write(dir.join("report.csv"), report.to_csv())
        .map_err(|e| Failure::Config(format!("cannot write report.csv: {e}")))?;
    if !report.pass {
        let first = report.failed_checks[0].clone();
        return Err(Failure::Check {
            check: first.clone(),
            margin: f64::NAN,
            detail: format!(
                "{} of {} checks failed, first: {first}; see report.json",
                report.failed_checks.len(),
                report.rows.iter().map(|r| r.checks.len()).sum::<usize>()
            ),
        });
    }
    let mut lines = String::new();
    for row in &report.rows {
        lines.push_str(&format!(
            "{}: lambda1 = {:.5}, r_omega = {:.5}, gap = {:+.5} [{}]\n",
            row.name,
            row.lambda1,
            row.r_omega,
            row.equality_gap,
            if row.passed() { "pass" } else { "FAIL" }
        ));
    }
    lines.push_str("verify: all checks passed");
    Ok(lines)
}
