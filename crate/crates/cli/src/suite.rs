//! The built-in verification suite: closed-form domains, bound checks and
//! equality-gap rules.

use anacon_core::lambda1::{
    interior_residual_max, minimize_sup, proof_trace_upper_bound, MinimaxOptions, ProofTraceOptions,
};
use anacon_core::oracles;
use anacon_core::{boundary_samples, equivalent_radius, DomainSpec};

use crate::config::RunConfig;
use crate::report::{CheckResult, SuiteRow, VerificationReport};
use crate::Failure;

#[derive(Clone, Debug)]
pub struct SuiteCase {
    pub name: &'static str,
    pub spec: DomainSpec,
    pub degree: usize,
    pub boundary_samples: usize,
    pub is_ball: bool,
}

/// The seven verification domains.
pub fn builtin_suite() -> Vec<SuiteCase> {
    vec![
        SuiteCase {
            name: "ball_2d",
            spec: DomainSpec::ball(2, &[0.0, 0.0], 1.0),
            degree: 4,
            boundary_samples: 512,
            is_ball: true,
        },
        SuiteCase {
            name: "ball_2d_offcenter",
            spec: DomainSpec::ball(2, &[0.3, -0.2], 1.0),
            degree: 4,
            boundary_samples: 512,
            is_ball: true,
        },
        SuiteCase {
            name: "ellipse_2d",
            spec: DomainSpec::ellipsoid(2, &[0.0, 0.0], &[0.5, 1.0]),
            degree: 6,
            boundary_samples: 512,
            is_ball: false,
        },
        SuiteCase {
            name: "ellipsoid_3d",
            spec: DomainSpec::ellipsoid(3, &[0.0; 3], &[1.0, 1.0, 0.5]),
            degree: 6,
            boundary_samples: 2048,
            is_ball: false,
        },
        SuiteCase {
            name: "annulus_2d",
            spec: DomainSpec::annulus(2, &[0.0, 0.0], 1.0, 2.0),
            degree: 4,
            boundary_samples: 512,
            is_ball: false,
        },
        SuiteCase {
            name: "annulus_3d",
            spec: DomainSpec::annulus(3, &[0.0; 3], 1.0, 2.0),
            degree: 4,
            boundary_samples: 2048,
            is_ball: false,
        },
        SuiteCase {
            name: "two_ball_union_2d",
            spec: DomainSpec::union_of_balls(2, &[(vec![-0.8, 0.0], 1.0), (vec![0.8, 0.0], 1.0)]),
            degree: 12,
            boundary_samples: 768,
            is_ball: false,
        },
    ]
}

fn thread_cap() -> usize {
    std::env::var("BALAYAGE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|v| *v >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|v| v.get())
                .unwrap_or(1)
        })
}

/// Runs the whole suite, optionally with the constructive bound on the
/// planar cases, distributing cases over at most `BALAYAGE_THREADS` workers.
/// The report is assembled in case-name order regardless of scheduling.
pub fn run_suite(cfg: &RunConfig, with_proof_trace: bool) -> Result<VerificationReport, Failure> {
    let cases = builtin_suite();
    let threads = thread_cap().min(cases.len()).max(1);
    let jobs: Vec<(usize, SuiteCase)> = cases.into_iter().enumerate().collect();
    let mut rows: Vec<(usize, Result<SuiteRow, Failure>)> = Vec::with_capacity(jobs.len());
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for chunk in 0..threads {
            let jobs = &jobs;
            let cfg = &cfg;
            handles.push(scope.spawn(move || {
                let mut out = Vec::new();
                for (idx, case) in jobs.iter().skip(chunk).step_by(threads) {
                    out.push((*idx, run_case(case, cfg, with_proof_trace)));
                }
                out
            }));
        }
        for h in handles {
            rows.extend(h.join().expect("suite worker panicked"));
        }
    });
    rows.sort_by_key(|(idx, _)| *idx);
    let mut out_rows = Vec::with_capacity(rows.len());
    for (_, r) in rows {
        out_rows.push(r?);
    }
    Ok(VerificationReport::assemble(
        cfg.seed,
        cfg.resolution,
        cfg.tolerances.verification,
        cfg.tolerances.oracle_match,
        out_rows,
    ))
}

pub fn run_case(
    case: &SuiteCase,
    cfg: &RunConfig,
    with_proof_trace: bool,
) -> Result<SuiteRow, Failure> {
    match case.spec.dim() {
        2 => run_case_dim::<2>(case, cfg, with_proof_trace),
        3 => run_case_dim::<3>(case, cfg, false),
        d => Err(Failure::Config(format!("unsupported dimension {d}"))),
    }
}

fn run_case_dim<const N: usize>(
    case: &SuiteCase,
    cfg: &RunConfig,
    with_proof_trace: bool,
) -> Result<SuiteRow, Failure> {
    let spec = &case.spec;
    let shape = spec.typed::<N>()?;
    let volume = shape.volume()?;
    let surface_area = shape.surface_area().ok();
    let r_omega = equivalent_radius(volume, N)?;
    let nv_over_p = surface_area.map(|p| N as f64 * volume / p);
    let oracle = oracles::oracle_lambda1(spec);

    let basis = anacon_core::lambda1::build_basis::<N>(spec, case.degree)?;
    let count = case.boundary_samples.max(8 * basis.len());
    let samples = boundary_samples::<N>(spec, count)?;
    let mut dense = boundary_samples::<N>(spec, 4 * count)?;
    dense.extend_from_slice(&samples);
    let opts = MinimaxOptions {
        improvement_tol: cfg.tolerances.optimizer,
        ..Default::default()
    };
    let result = minimize_sup(&basis, &samples, &dense, &opts)?;
    let lambda1 = result.value;
    let gap = r_omega - lambda1;

    let slack = cfg.tolerances.verification;
    let mut checks = Vec::new();
    checks.push(match nv_over_p {
        Some(lo) => CheckResult::gate("sandwich_lower", lambda1 - (lo - slack)),
        None => CheckResult::skip("sandwich_lower"),
    });
    checks.push(CheckResult::gate(
        "sandwich_upper",
        (r_omega + slack) - lambda1,
    ));
    checks.push(match oracle {
        Some(o) => CheckResult::gate(
            "oracle_match",
            cfg.tolerances.oracle_match - (lambda1 - o).abs() / o,
        ),
        None => CheckResult::skip("oracle_match"),
    });
    if case.is_ball {
        checks.push(CheckResult::gate(
            "gap_ball_equality",
            2.0 * slack - gap.abs(),
        ));
    } else {
        checks.push(CheckResult::gate("gap_nonball", gap - 20.0 * slack));
    }
    // post-hoc interior check: the boundary max dominates interior residuals
    let interior = interior_residual_max(spec, &basis, &result.coefficients, 4000, cfg.seed)?;
    checks.push(CheckResult::gate(
        "interior_below_boundary",
        1.02 * lambda1 - interior,
    ));
    checks.push(CheckResult::gate(
        "certificate_stability",
        0.01 * lambda1 - (result.certificate - lambda1).abs(),
    ));

    let (proof_trace_bound, omega_in_saturated) = if with_proof_trace && N == 2 {
        let trace = proof_trace_upper_bound::<N>(
            spec,
            &ProofTraceOptions {
                resolution: cfg.resolution,
                n_transport: cfg.transport_n.min(5000),
                seed: cfg.seed,
                ..Default::default()
            },
        )?;
        checks.push(CheckResult::gate(
            "proof_trace_bound",
            trace.report.r_d + 5.0 * slack - trace.report.bound,
        ));
        checks.push(CheckResult::gate(
            "proof_trace_saturation",
            if trace.report.omega_in_saturated {
                1.0
            } else {
                -1.0
            },
        ));
        (
            Some(trace.report.bound),
            Some(trace.report.omega_in_saturated),
        )
    } else {
        (None, None)
    };

    Ok(SuiteRow {
        name: case.name.to_string(),
        dim: N,
        volume,
        surface_area,
        nv_over_p,
        r_omega,
        lambda1,
        certificate: result.certificate,
        oracle_lambda1: oracle,
        oracle_note: oracles::oracle_lambda1_note(spec).map(String::from),
        equality_gap: gap,
        proof_trace_bound,
        omega_in_saturated,
        checks,
    })
}
