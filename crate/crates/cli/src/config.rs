//! Experiment configuration: a JSON file describing the protocol, devices,
//! strategy, bound parameters and run shape.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qpv_core::devices::DeviceParams;
use qpv_core::protocol::ProtocolConfig;
use qpv_core::strategies::{EpsilonSchedule, MismatchAttackSpec, Strategy};
use qpv_core::verdict::{BoundParams, SecureRegion};

use crate::RunError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyConfig {
    Honest {
        p_err: f64,
    },
    BasisGuess {
        commit_rate: f64,
    },
    Mismatch(MismatchAttackSpec),
    AdaptiveMismatch {
        spec: MismatchAttackSpec,
        schedule: EpsilonSchedule,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RunConfig {
    /// Committed-round budget per trial (total rounds in plain mode).
    pub committed_target: u64,
    pub max_rounds: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionConfig {
    /// Ordered curve on the `(p_C, p_⊥, p_I)` simplex; the honest point
    /// comes from the bound parameters.
    pub curve: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LemmaConfig {
    pub gentle_instances: u64,
    pub decomposition_instances: u64,
    pub dilation_instances: u64,
    pub paths_instances: u64,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        Self {
            gentle_instances: 10_000,
            decomposition_instances: 1000,
            dilation_instances: 1000,
            paths_instances: 1000,
        }
    }
}

/// Detection sweep over attacker mismatch rates; each value ε runs to
/// `round(r/ε)` committed rounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub epsilon_values: Vec<f64>,
    pub r: f64,
    pub trials: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateSection {
    pub alpha_fiber_db_per_km: f64,
    pub nu_hz: f64,
    /// Input transmissions to tabulate.
    pub eta_v_values: Vec<f64>,
}

fn default_rate_sigma() -> f64 {
    4.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub protocol: ProtocolConfig,
    pub devices: DeviceParams,
    pub strategy: StrategyConfig,
    pub bounds: BoundParams,
    #[serde(default)]
    pub secure_region: Option<RegionConfig>,
    pub run: RunConfig,
    pub trials: u64,
    pub master_seed: u64,
    /// Width of the ⊥-rate consistency band in binomial standard
    /// deviations.
    #[serde(default = "default_rate_sigma")]
    pub rate_sigma: f64,
    /// Number of leading trials whose transcripts are exported as CSV.
    #[serde(default)]
    pub transcript_trials: u64,
    #[serde(default)]
    pub lemmas: LemmaConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub estimate: Option<EstimateSection>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&raw).map_err(|e| {
            RunError::Config(format!(
                "{}:{}:{}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        self.protocol
            .validate()
            .map_err(|e| RunError::Config(format!("protocol: {e}")))?;
        self.devices
            .validate()
            .map_err(|e| RunError::Config(format!("devices: {e}")))?;
        self.bounds
            .validate()
            .map_err(|e| RunError::Config(format!("bounds: {e}")))?;
        match &self.strategy {
            StrategyConfig::Mismatch(spec) | StrategyConfig::AdaptiveMismatch { spec, .. } => {
                spec.validate()
                    .map_err(|e| RunError::Config(format!("strategy: {e}")))?;
            }
            StrategyConfig::Honest { p_err } => {
                if !(0.0..=1.0).contains(p_err) {
                    return Err(RunError::Config(format!(
                        "strategy: p_err = {p_err} outside [0, 1]"
                    )));
                }
            }
            StrategyConfig::BasisGuess { commit_rate } => {
                if !(0.0..=1.0).contains(commit_rate) {
                    return Err(RunError::Config(format!(
                        "strategy: commit_rate = {commit_rate} outside [0, 1]"
                    )));
                }
            }
        }
        if self.run.committed_target == 0 {
            return Err(RunError::Config(
                "run.committed_target must be positive".into(),
            ));
        }
        if self.run.max_rounds < self.run.committed_target {
            return Err(RunError::Config(
                "run.max_rounds must be at least run.committed_target".into(),
            ));
        }
        if self.rate_sigma <= 0.0 {
            return Err(RunError::Config("rate_sigma must be positive".into()));
        }
        // Resolve the region eagerly so curve problems surface as config
        // diagnostics rather than mid-run failures.
        self.build_region()?;
        Ok(())
    }

    /// Fresh strategy instance for one trial.
    pub fn build_strategy(&self) -> Strategy {
        match &self.strategy {
            StrategyConfig::Honest { p_err } => Strategy::honest(self.devices, *p_err),
            StrategyConfig::BasisGuess { commit_rate } => Strategy::basis_guess(*commit_rate),
            StrategyConfig::Mismatch(spec) => Strategy::mismatch(*spec),
            StrategyConfig::AdaptiveMismatch { spec, schedule } => {
                Strategy::adaptive_mismatch(*spec, schedule.clone())
            }
        }
    }

    pub fn build_region(&self) -> Result<Option<SecureRegion>, RunError> {
        match &self.secure_region {
            None => Ok(None),
            Some(region) => {
                SecureRegion::from_curve(region.curve.clone(), self.bounds.honest_point())
                    .map(Some)
                    .map_err(|e| RunError::Config(format!("secure_region: {e}")))
            }
        }
    }

    /// Hash of the effective configuration, echoed in every report.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&canonical);
        let mut out = String::with_capacity(64);
        for b in digest {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }
}
