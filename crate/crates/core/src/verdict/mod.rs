//! Verifier-side statistics and closed-form security bounds: payoff scores,
//! Chernoff/Azuma thresholds, detection probabilities, round budgets, the
//! bipartite-graph combinatorics behind the robustness argument, and the
//! final accept/reject decision.

mod bounds;
mod decide;
mod graph;
mod montecarlo;
mod region;
mod score;

pub use bounds::{
    attacker_score_ceiling, chernoff_accept_floor, detection_probability_nonadaptive,
    no_error_catch_floor, round_budget, table1_bounds, Bound, DetectionBound, RoundBudget,
    Table1Bounds,
};
pub use decide::{decide, Decision, RejectReason};
pub use graph::{edge_removal_reach, good_rounds_subset, EdgeReachReport, GoodRounds};
pub use montecarlo::{
    sample_score_exceedance, sample_scores, wilson_interval, AnswerDistribution, ScoreKind,
};
pub use region::SecureRegion;
pub use score::{lossy_payoff, payoff, AnswerClass, ScoreState};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum VerdictError {
    #[error("parameter {name} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("security parameter k must be at least 2, got {k}")]
    KTooSmall { k: u32 },
    #[error("honest margin μ = {mu} is not positive; configuration infeasible")]
    InfeasibleHonestMargin { mu: f64 },
    #[error("loss answer passed to the loss-free payoff; use the lossy score")]
    LossInLosslessScore,
    #[error("secure-region curve needs at least two points")]
    CurveTooShort,
    #[error("curve point {index} is not on the probability simplex (sum {sum})")]
    PointOffSimplex { index: usize, sum: f64 },
    #[error("evaluation point must be strictly inside the simplex")]
    PointNotInterior,
    #[error("curve sweep angles are not strictly monotone at segment {index}")]
    CurveNotMonotone { index: usize },
    #[error("no orientation makes the honest point score positive on every facet")]
    InconsistentOrientation,
    #[error("subset fraction q = {q} outside (0, 1)")]
    BadSubsetFraction { q: f64 },
    #[error("transcript has no scored rounds")]
    NoScoredRounds,
    #[error("no canonical round budget for model {model:?}; pick S2 or S3")]
    NoBudgetForModel { model: SecurityModel },
}

/// The three analyzed security models: perfect commit coordination,
/// non-adaptive bounded mismatch, and adaptive strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SecurityModel {
    S1,
    S2,
    S3,
}

/// Inputs to the bound calculators and the decision rule.
///
/// `p_attack` is the externally sourced upper bound on the single-round
/// attack probability of the underlying protocol at transmission `eta_p`.
/// The per-round score bound `p_b` adds the model-dependent `6/k` overhead
/// for S2/S3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub p_attack: f64,
    pub p_err: f64,
    pub eta_p: f64,
    /// Score margin δ of the accept threshold `r·μ·(1−δ)`. Distinct from the
    /// protocol's time delay, which lives in the protocol config.
    pub delta_margin: f64,
    /// Security parameter k ≥ 2.
    pub k: u32,
    pub model: SecurityModel,
}

impl BoundParams {
    pub fn validate(&self) -> Result<(), VerdictError> {
        if !(self.p_attack > 0.0 && self.p_attack < 1.0) {
            return Err(VerdictError::OutOfRange {
                name: "p_attack",
                value: self.p_attack,
                range: "(0, 1)",
            });
        }
        if !(0.0..=1.0).contains(&self.p_err) {
            return Err(VerdictError::OutOfRange {
                name: "p_err",
                value: self.p_err,
                range: "[0, 1]",
            });
        }
        if !(0.0..=1.0).contains(&self.eta_p) {
            return Err(VerdictError::OutOfRange {
                name: "eta_p",
                value: self.eta_p,
                range: "[0, 1]",
            });
        }
        if !(self.delta_margin > 0.0 && self.delta_margin < 1.0) {
            return Err(VerdictError::OutOfRange {
                name: "delta_margin",
                value: self.delta_margin,
                range: "(0, 1)",
            });
        }
        if self.k < 2 {
            return Err(VerdictError::KTooSmall { k: self.k });
        }
        Ok(())
    }

    /// Per-round bound on the attackers' correctness probability.
    pub fn p_b(&self) -> f64 {
        match self.model {
            SecurityModel::S1 => self.p_attack,
            SecurityModel::S2 | SecurityModel::S3 => self.p_attack + 6.0 / f64::from(self.k),
        }
    }

    /// Honest score margin `μ = 1 − p_b − p_err`.
    pub fn mu(&self) -> f64 {
        1.0 - self.p_b() - self.p_err
    }

    /// Expected honest answer distribution `(p_C, p_⊥, p_I)` with loss
    /// independent of errors.
    pub fn honest_point(&self) -> [f64; 3] {
        [
            self.eta_p * (1.0 - self.p_err),
            1.0 - self.eta_p,
            self.eta_p * self.p_err,
        ]
    }
}
