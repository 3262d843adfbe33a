//! JSON experiment configs: a versioned schema, strict top-level fields, and
//! a canonical hash that ties every output file to the exact run recipe.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sparsetrig::{ClassSpec, ClassVariant, EtaMode, SolverConfig, DEFAULT_RADIUS_CAP};

use crate::error::{from_lib, AppError, Result};

/// Config files must declare this version; anything else is refused so old
/// recipes never run silently under changed semantics.
pub const SCHEMA_VERSION: u32 = 1;

fn default_gamma() -> f64 {
    (-1.0f64).exp()
}

fn default_eta_mode() -> EtaMode {
    EtaMode::ClassBound
}

fn default_phase_eta() -> f64 {
    1e-5
}

fn default_bpdn_samples() -> usize {
    40
}

fn default_index_cap() -> u128 {
    125
}

fn default_radius_cap() -> u64 {
    DEFAULT_RADIUS_CAP
}

/// `recover`: plan at each accuracy target and recover random class members.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoverConfig {
    pub schema_version: u32,
    pub spec: ClassSpec,
    /// Norm index of the reported error; p = 2 reports the L2 error.
    pub p: f64,
    /// Accuracy targets, one planning pass per entry, in emission order.
    pub epsilons: Vec<f64>,
    pub trials: u32,
    pub base_seed: u64,
    /// Failure-probability budget of the sample-count rule.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub c_universal: f64,
    /// Support size of the drawn ground-truth members.
    pub support_budget: usize,
    /// Ground-truth frequencies are drawn from [−max_freq, max_freq]^d.
    pub max_freq: u64,
    #[serde(default = "default_eta_mode")]
    pub eta_mode: EtaMode,
    #[serde(default)]
    pub solver: SolverConfig,
    pub out: PathBuf,
}

impl RecoverConfig {
    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema_version)?;
        if self.epsilons.is_empty() {
            return Err(AppError::Config("epsilons must be nonempty".into()));
        }
        if self.trials == 0 {
            return Err(AppError::Config("trials must be >= 1".into()));
        }
        self.solver.validate().map_err(from_lib)?;
        self.spec.validate().map_err(from_lib)?;
        Ok(())
    }
}

/// Node placement for the phase diagram.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    /// i.i.d. uniform nodes, fresh per trial.
    #[default]
    Iid,
    /// The tensor grid {j/g : 0 ≤ j < g}^d; every sample count must then be
    /// a d-th power g^d.
    Grid,
}

impl SamplingMode {
    pub fn name(self) -> &'static str {
        match self {
            SamplingMode::Iid => "iid",
            SamplingMode::Grid => "grid",
        }
    }
}

/// `phase-transition`: planted s-sparse truths on a cube window, swept over
/// a (sparsity, sample count) grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub schema_version: u32,
    pub d: usize,
    pub cube_radius: u64,
    pub sparsities: Vec<usize>,
    pub sample_counts: Vec<usize>,
    pub trials: u32,
    pub base_seed: u64,
    /// Noise radius of every solve. Zero is allowed, but exact-fit solves
    /// stop on the iteration budget instead of the gap certificate.
    #[serde(default = "default_phase_eta")]
    pub eta: f64,
    #[serde(default)]
    pub sampling: SamplingMode,
    #[serde(default)]
    pub solver: SolverConfig,
    pub out: PathBuf,
}

impl PhaseConfig {
    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema_version)?;
        if self.sparsities.is_empty() || self.sample_counts.is_empty() {
            return Err(AppError::Config(
                "sparsities and sample_counts must be nonempty".into(),
            ));
        }
        if self.trials == 0 {
            return Err(AppError::Config("trials must be >= 1".into()));
        }
        if self.sparsities.iter().any(|&s| s == 0) {
            return Err(AppError::Config("sparsity levels must be >= 1".into()));
        }
        if self.sample_counts.iter().any(|&m| m == 0) {
            return Err(AppError::Config("sample counts must be >= 1".into()));
        }
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return Err(AppError::Config(format!(
                "eta must be finite and >= 0, got {}",
                self.eta
            )));
        }
        if self.sampling == SamplingMode::Grid {
            for &m in &self.sample_counts {
                if grid_side(self.d, m).is_none() {
                    return Err(AppError::Config(format!(
                        "grid sampling in {} dimensions needs d-th-power sample \
                         counts; {m} is not one",
                        self.d
                    )));
                }
            }
        }
        self.solver.validate().map_err(from_lib)?;
        Ok(())
    }
}

/// The integer g with g^d = m, when one exists.
pub fn grid_side(d: usize, m: usize) -> Option<u64> {
    if d == 0 || m == 0 {
        return None;
    }
    let guess = (m as f64).powf(1.0 / d as f64).round() as u64;
    for g in guess.saturating_sub(1)..=guess + 1 {
        if g.checked_pow(d as u32).map(|v| v as u128) == Some(m as u128) {
            return Some(g);
        }
    }
    None
}

/// `lower-bound`: the linear-vs-nonlinear separation over a rank grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerConfig {
    pub schema_version: u32,
    pub d: usize,
    pub ranks: Vec<usize>,
    pub base_seed: u64,
    /// Sample budget for the l1 side.
    #[serde(default = "default_bpdn_samples")]
    pub bpdn_samples: usize,
    /// Refusal cap on #Λ = 5^d.
    #[serde(default = "default_index_cap")]
    pub index_cap: u128,
    #[serde(default)]
    pub solver: SolverConfig,
    pub out: PathBuf,
}

impl LowerConfig {
    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema_version)?;
        if self.ranks.is_empty() {
            return Err(AppError::Config("ranks must be nonempty".into()));
        }
        if self.bpdn_samples == 0 {
            return Err(AppError::Config("bpdn_samples must be >= 1".into()));
        }
        self.solver.validate().map_err(from_lib)?;
        Ok(())
    }
}

/// `bound-table`: tabulate truncation and sampling plans against the
/// closed-form complexity shapes, over the (spec × ε × p) cross product.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundTableConfig {
    pub schema_version: u32,
    pub specs: Vec<ClassSpec>,
    pub epsilons: Vec<f64>,
    /// Norm indices (each ≥ 2).
    pub ps: Vec<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub c_universal: f64,
    #[serde(default = "default_radius_cap")]
    pub radius_cap: u64,
    pub out: PathBuf,
}

impl BoundTableConfig {
    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema_version)?;
        if self.specs.is_empty() || self.epsilons.is_empty() || self.ps.is_empty() {
            return Err(AppError::Config(
                "specs, epsilons, and ps must be nonempty".into(),
            ));
        }
        for spec in &self.specs {
            spec.validate().map_err(from_lib)?;
            if matches!(spec.variant, ClassVariant::WienerBall) {
                return Err(AppError::Config(
                    "the wiener ball has no decaying projection bound, so no \
                     finite truncation exists; use log-class, mixed-sobolev, \
                     or hoelder"
                        .into(),
                ));
            }
        }
        for &p in &self.ps {
            if !p.is_finite() || !(p >= 2.0) {
                return Err(AppError::Config(format!(
                    "norm indices must be finite and >= 2, got {p}"
                )));
            }
        }
        for &eps in &self.epsilons {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(AppError::Config(format!(
                    "accuracy targets must lie in (0, 1), got {eps}"
                )));
            }
        }
        Ok(())
    }
}

fn check_schema(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(AppError::Config(format!(
            "unsupported schema_version {v}; this binary reads version {SCHEMA_VERSION}"
        )));
    }
    Ok(())
}

/// Reads and strictly deserializes a JSON config, naming the JSON path of
/// any violation.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de)
        .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))
}

/// SHA-256 over the canonical JSON of the effective config (command-line
/// overrides applied), with the output path excluded so the same experiment
/// hashes identically wherever its results land.
pub fn config_sha256<T: Serialize>(cfg: &T) -> Result<String> {
    let mut value = serde_json::to_value(cfg)
        .map_err(|e| AppError::Config(format!("cannot canonicalize config: {e}")))?;
    if let Some(map) = value.as_object_mut() {
        map.remove("out");
    }
    let mut hasher = Sha256::new();
    hasher.update(value.to_string().as_bytes());
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}
