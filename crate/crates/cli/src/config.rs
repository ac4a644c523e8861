//! Run configuration: strict JSON schema with validated invariants.
//! Unknown keys are rejected so mistyped tolerance names cannot silently
//! pass.

use std::path::{Path, PathBuf};

use anacon_core::DomainSpec;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    #[serde(default = "defaults::resolution")]
    pub resolution: usize,
    #[serde(default = "defaults::degree")]
    pub degree: usize,
    #[serde(default = "defaults::boundary_samples")]
    pub boundary_samples: usize,
    #[serde(default = "defaults::transport_n")]
    pub transport_n: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "defaults::seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balayage: Option<BalayageConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proof_trace: Option<ProofTraceConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// LCP complementarity residual target.
    #[serde(default = "defaults::complementarity")]
    pub complementarity: f64,
    /// Relative stage-improvement cutoff of the minimax homotopy.
    #[serde(default = "defaults::optimizer")]
    pub optimizer: f64,
    /// Absolute slack of the verification inequalities.
    #[serde(default = "defaults::verification")]
    pub verification: f64,
    /// Relative tolerance for closed-form oracle matches.
    #[serde(default = "defaults::oracle_match")]
    pub oracle_match: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            complementarity: defaults::complementarity(),
            optimizer: defaults::optimizer(),
            verification: defaults::verification(),
            oracle_match: defaults::oracle_match(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BalayageConfig {
    /// Density cap; defaults to the dimension N.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_density: Option<f64>,
    /// Uniform part of μ: N·m restricted to a sub-domain times `density`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_uniform: Option<MuUniform>,
    /// Point atoms of μ.
    #[serde(default)]
    pub mu_atoms: Vec<AtomConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuUniform {
    pub domain: DomainSpec,
    pub density: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub point: Vec<f64>,
    pub mass: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProofTraceConfig {
    #[serde(default = "defaults::radius_margin")]
    pub radius_margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_smoothing: Option<f64>,
}

mod defaults {
    pub fn resolution() -> usize {
        96
    }
    pub fn degree() -> usize {
        6
    }
    pub fn boundary_samples() -> usize {
        512
    }
    pub fn transport_n() -> usize {
        1000
    }
    pub fn seed() -> u64 {
        42
    }
    pub fn complementarity() -> f64 {
        1e-9
    }
    pub fn optimizer() -> f64 {
        1e-10
    }
    pub fn verification() -> f64 {
        1e-3
    }
    pub fn oracle_match() -> f64 {
        2e-2
    }
    pub fn radius_margin() -> f64 {
        0.04
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("default config")
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Failure::Config(format!("cannot parse {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if let Some(d) = &self.domain {
            d.validate().map_err(|e| Failure::Config(e.to_string()))?;
        }
        if self.resolution < 16 {
            return Err(Failure::Config(format!(
                "resolution must be >= 16, got {}",
                self.resolution
            )));
        }
        if !(2..=24).contains(&self.degree) {
            return Err(Failure::Config(format!(
                "degree must lie in [2, 24], got {}",
                self.degree
            )));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("complementarity", t.complementarity),
            ("optimizer", t.optimizer),
            ("verification", t.verification),
            ("oracle_match", t.oracle_match),
        ] {
            if !(v > 0.0) {
                return Err(Failure::Config(format!(
                    "tolerance '{name}' must be positive"
                )));
            }
        }
        if let Some(pt) = &self.proof_trace {
            if !(pt.radius_margin > 0.0) {
                return Err(Failure::Config("radius_margin must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn require_domain(&self) -> Result<&DomainSpec, Failure> {
        self.domain
            .as_ref()
            .ok_or_else(|| Failure::Config("this command requires a 'domain' entry".into()))
    }
}
