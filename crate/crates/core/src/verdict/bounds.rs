//! Closed-form concentration bounds, detection probabilities and round
//! budgets.

use serde::{Deserialize, Serialize};

use super::{BoundParams, SecurityModel, VerdictError};

/// A bound value together with a vacuity flag. Vacuous bounds are reported
/// rather than silently clamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub vacuous: bool,
}

impl Bound {
    fn tight(value: f64) -> Self {
        Self {
            value,
            vacuous: false,
        }
    }

    fn vacuous(value: f64) -> Self {
        Self {
            value,
            vacuous: true,
        }
    }
}

/// Honest-prover acceptance floor from the bounded-range Chernoff bound:
/// `1 − exp(−r·δ²·μ²/w²)`, where `w` is the payoff range width (1 for the
/// loss-free score, 2 for the lossy score).
pub fn chernoff_accept_floor(
    mu: f64,
    delta_margin: f64,
    committed_rounds: u64,
    payoff_width: f64,
) -> Result<f64, VerdictError> {
    if mu <= 0.0 {
        return Err(VerdictError::InfeasibleHonestMargin { mu });
    }
    if !(0.0..1.0).contains(&delta_margin) {
        return Err(VerdictError::OutOfRange {
            name: "delta_margin",
            value: delta_margin,
            range: "[0, 1)",
        });
    }
    if payoff_width <= 0.0 {
        return Err(VerdictError::OutOfRange {
            name: "payoff_width",
            value: payoff_width,
            range: "(0, ∞)",
        });
    }
    let r = committed_rounds as f64;
    Ok(1.0 - (-(r * delta_margin * delta_margin * mu * mu) / (payoff_width * payoff_width)).exp())
}

/// Azuma supermartingale ceiling on the attackers' score:
/// `exp(−(r/2)·(μ(1−δ))²)`, with the adaptive model paying an extra `1/k`
/// inside the square. A non-positive argument makes the bound vacuous.
pub fn attacker_score_ceiling(
    mu: f64,
    delta_margin: f64,
    committed_rounds: u64,
    k: u32,
    model: SecurityModel,
) -> Bound {
    let shift = match model {
        SecurityModel::S1 | SecurityModel::S2 => 0.0,
        SecurityModel::S3 => 1.0 / f64::from(k),
    };
    let argument = mu * (1.0 - delta_margin) - shift;
    if argument <= 0.0 {
        return Bound::vacuous(1.0);
    }
    let r = committed_rounds as f64;
    Bound::tight((-(r / 2.0) * argument * argument).exp())
}

/// Error-free catch-probability floors: the probability that attackers
/// answer wrongly (or are caught by commits) in at least one of `r` rounds.
pub fn no_error_catch_floor(p_attack: f64, committed_rounds: u64, model: SecurityModel) -> Bound {
    let r = committed_rounds as f64;
    let (base, exponent) = match model {
        SecurityModel::S1 => (p_attack, r),
        SecurityModel::S2 => (p_attack + 24.0 * (5.0 / r).cbrt(), r),
        SecurityModel::S3 => {
            let term = (20.0 / r).powf(0.25);
            (p_attack + 12.0 * term, (1.0 - 2.0 * term) * r)
        }
    };
    if base >= 1.0 || exponent <= 0.0 {
        return Bound::vacuous(0.0);
    }
    Bound::tight(1.0 - base.powf(exponent))
}

/// One column of the summary table: the honest-prover floor and the three
/// attacker-model cells, selected by whether the prover error is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Bounds {
    /// Committed-round count the cells are evaluated at.
    pub committed_rounds: u64,
    /// True when the error-free column applies.
    pub error_free_column: bool,
    /// Honest-prover success floor.
    pub honest: Bound,
    /// Attacker cells. In the error-free column these are catch-probability
    /// floors; otherwise they are score-exceedance ceilings.
    pub s1: Bound,
    pub s2: Bound,
    pub s3: Bound,
}

/// Evaluates the tabulated bounds for the configured parameters at `r`
/// committed rounds.
pub fn table1_bounds(
    params: &BoundParams,
    committed_rounds: u64,
) -> Result<Table1Bounds, VerdictError> {
    params.validate()?;
    let r = committed_rounds as f64;
    let p = params.p_attack;
    let delta = params.delta_margin;

    if params.p_err == 0.0 {
        return Ok(Table1Bounds {
            committed_rounds,
            error_free_column: true,
            honest: Bound::tight(1.0),
            s1: no_error_catch_floor(p, committed_rounds, SecurityModel::S1),
            s2: no_error_catch_floor(p, committed_rounds, SecurityModel::S2),
            s3: no_error_catch_floor(p, committed_rounds, SecurityModel::S3),
        });
    }

    let azuma = |argument: f64| -> Bound {
        if argument <= 0.0 {
            Bound::vacuous(1.0)
        } else {
            Bound::tight((-(r / 2.0) * argument * argument).exp())
        }
    };
    let s2_term = 24.0 * (5.0 / r).cbrt();
    let s3_term = 12.0 * (20.0 / r).powf(0.25);

    let mu_model = match params.model {
        SecurityModel::S1 => 1.0 - p - params.p_err,
        SecurityModel::S2 => 1.0 - p - s2_term - params.p_err,
        SecurityModel::S3 => 1.0 - p - s3_term,
    };
    let honest = if mu_model > 0.0 {
        Bound::tight(1.0 - (-(r) * delta * delta * mu_model * mu_model).exp())
    } else {
        Bound::vacuous(0.0)
    };

    Ok(Table1Bounds {
        committed_rounds,
        error_free_column: false,
        honest,
        s1: azuma((1.0 - p - params.p_err) * (1.0 - delta)),
        s2: azuma((1.0 - p - s2_term - params.p_err) * (1.0 - delta)),
        s3: azuma((1.0 - p - s3_term) * (1.0 - delta) - (320.0 / r).powf(0.25)),
    })
}

/// Lower bounds on detecting a non-adaptive mismatch attacker over a number
/// of non-(0,0) rounds: the exact product form and the looser exponential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionBound {
    pub exact: f64,
    pub exponential: f64,
}

pub fn detection_probability_nonadaptive(alpha: f64, committed_rounds: u64) -> DetectionBound {
    let r = committed_rounds as f64;
    DetectionBound {
        exact: 1.0 - (1.0 - alpha).powf(r),
        exponential: 1.0 - (-alpha * r).exp(),
    }
}

/// Committed-round budget and estimation parameters for a security model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundBudget {
    pub model: SecurityModel,
    pub committed_rounds_target: u64,
    /// Conditional mismatch probability the budget controls: `1/(16k²)`.
    pub alpha: f64,
    /// Bound on the misbehaving-subset fraction: `2/k`.
    pub c_tilde: f64,
    /// `c̃ > 1/2` exceeds what the edge-removal argument supports; the
    /// budget is formally allowed but vacuous.
    pub vacuous: bool,
}

impl RoundBudget {
    pub fn expected_total_rounds(&self, p_commit: f64) -> f64 {
        self.committed_rounds_target as f64 / p_commit
    }
}

/// Budgets: `320k³` committed rounds for the non-adaptive model, `320k⁴`
/// for the adaptive one, with `α = 1/(16k²)` and `c̃ = 2/k`.
pub fn round_budget(k: u32, model: SecurityModel) -> Result<RoundBudget, VerdictError> {
    if k < 2 {
        return Err(VerdictError::KTooSmall { k });
    }
    let kf = f64::from(k);
    let committed_rounds_target = match model {
        SecurityModel::S2 => 320 * u64::from(k).pow(3),
        SecurityModel::S3 => 320 * u64::from(k).pow(4),
        SecurityModel::S1 => return Err(VerdictError::NoBudgetForModel { model }),
    };
    let c_tilde = 2.0 / kf;
    Ok(RoundBudget {
        model,
        committed_rounds_target,
        alpha: 1.0 / (16.0 * kf * kf),
        c_tilde,
        vacuous: c_tilde > 0.5,
    })
}
