//! Verification report structures and CSV emission.

use serde::Serialize;

#[derive(Clone, Debug, Serialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    /// Signed slack: positive means the inequality holds with room.
    pub margin: f64,
}

impl CheckResult {
    pub fn gate(name: &str, margin: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            status: if margin >= 0.0 {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            margin,
        }
    }

    pub fn skip(name: &str) -> Self {
        CheckResult {
            name: name.to_string(),
            status: CheckStatus::Skip,
            margin: 0.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteRow {
    pub name: String,
    pub dim: usize,
    pub volume: f64,
    pub surface_area: Option<f64>,
    pub nv_over_p: Option<f64>,
    pub r_omega: f64,
    pub lambda1: f64,
    pub certificate: f64,
    pub oracle_lambda1: Option<f64>,
    pub oracle_note: Option<String>,
    pub equality_gap: f64,
    pub proof_trace_bound: Option<f64>,
    pub omega_in_saturated: Option<bool>,
    pub checks: Vec<CheckResult>,
}

impl SuiteRow {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub resolution: usize,
    pub verification_slack: f64,
    pub oracle_match_rel: f64,
    pub rows: Vec<SuiteRow>,
    pub pass: bool,
    pub failed_checks: Vec<String>,
}

impl VerificationReport {
    pub fn assemble(
        seed: u64,
        resolution: usize,
        verification_slack: f64,
        oracle_match_rel: f64,
        mut rows: Vec<SuiteRow>,
    ) -> Self {
        rows.sort_by(|a, b| a.name.cmp(&b.name));
        let mut failed = Vec::new();
        for row in &rows {
            for c in &row.checks {
                if c.status == CheckStatus::Fail {
                    failed.push(format!("{}/{}", row.name, c.name));
                }
            }
        }
        VerificationReport {
            seed,
            resolution,
            verification_slack,
            oracle_match_rel,
            pass: failed.is_empty(),
            failed_checks: failed,
            rows,
        }
    }

    /// Plot-ready CSV: one row per domain, empty fields for absent values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "name,dim,volume,surface_area,nv_over_p,r_omega,lambda1,certificate,\
             oracle_lambda1,equality_gap,proof_trace_bound,pass\n",
        );
        let opt = |v: &Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.name,
                r.dim,
                r.volume,
                opt(&r.surface_area),
                opt(&r.nv_over_p),
                r.r_omega,
                r.lambda1,
                r.certificate,
                opt(&r.oracle_lambda1),
                r.equality_gap,
                opt(&r.proof_trace_bound),
                r.passed(),
            ));
        }
        out
    }
}
