//! Closed-form engineering estimators: the prover-lab transmission
//! decomposition, presence-detection signal-to-noise ratio, fiber length
//! for a target input transmission, and protocol duration.
//!
//! Dark-count convention: the probabilities `p_dc` and `p_dc_qnd` already
//! absorb the no-detection factors `(1 − η_meas)` and `(1 − η_V·η_det_qnd)`
//! respectively, so the decomposition below is exact, not a small-rate
//! approximation. The stochastic models in [`crate::devices`] sample with
//! the same convention.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::verdict::SecurityModel;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EstimateError {
    #[error("parameter {name} = {value} outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("presence detection has zero probability (no signal, no dark counts)")]
    ZeroDenominator,
    #[error("fiber transmission target {argument} is not in (0, 1]")]
    InfeasibleFiberTarget { argument: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("no canonical round budget for model {model:?}; pick S2 or S3")]
    NoBudgetForModel { model: SecurityModel },
}

/// Inputs to the closed-form estimators.
///
/// `eta_meas = eta_det · eta_equip · eta_surv` absorbs all losses after the
/// presence detection into one term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateInputs {
    /// Transmission from the verifier to the prover.
    pub eta_v: f64,
    /// Measurement detector efficiency.
    pub eta_det: f64,
    /// Presence-detection efficiency.
    pub eta_det_qnd: f64,
    /// Measurement dark-count probability per window.
    pub p_dc: f64,
    /// Presence-detection dark-count probability per window.
    pub p_dc_qnd: f64,
    /// Survival through the presence detection.
    pub eta_surv: f64,
    /// Transmission of the equipment between presence detection and
    /// measurement, including the delay loop.
    pub eta_equip: f64,
}

impl EstimateInputs {
    pub fn validate(&self) -> Result<(), EstimateError> {
        for (name, value) in [
            ("eta_v", self.eta_v),
            ("eta_det", self.eta_det),
            ("eta_det_qnd", self.eta_det_qnd),
            ("p_dc", self.p_dc),
            ("p_dc_qnd", self.p_dc_qnd),
            ("eta_surv", self.eta_surv),
            ("eta_equip", self.eta_equip),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(EstimateError::OutOfRange { name, value });
            }
        }
        Ok(())
    }

    /// Combined post-presence-detection measurement efficiency.
    pub fn eta_meas(&self) -> f64 {
        self.eta_det * self.eta_equip * self.eta_surv
    }

    /// Signal-to-dark-count ratio `γ = η_V / p_dc_qnd`.
    pub fn gamma_snr(&self) -> f64 {
        if self.p_dc_qnd == 0.0 {
            f64::INFINITY
        } else {
            self.eta_v / self.p_dc_qnd
        }
    }
}

/// Prover-lab transmission
/// `η_P = ((η_meas + p_dc)·η_V·η_det_qnd + p_dc·p_dc_qnd) / (η_V·η_det_qnd + p_dc_qnd)`.
pub fn eta_p_closed_form(inputs: &EstimateInputs) -> Result<f64, EstimateError> {
    inputs.validate()?;
    let signal = inputs.eta_v * inputs.eta_det_qnd;
    let denom = signal + inputs.p_dc_qnd;
    if denom <= 0.0 {
        return Err(EstimateError::ZeroDenominator);
    }
    Ok(((inputs.eta_meas() + inputs.p_dc) * signal + inputs.p_dc * inputs.p_dc_qnd) / denom)
}

/// Probability that the presence detector commits in one round
/// (real detection plus dark counts), with the same convention as
/// [`eta_p_closed_form`].
pub fn p_commit_closed_form(inputs: &EstimateInputs) -> f64 {
    inputs.eta_v * inputs.eta_det_qnd + inputs.p_dc_qnd
}

/// Signal-to-noise ratio of the presence detection: `γη / (γη + 1)`.
pub fn snr_qnd(gamma_snr: f64, eta_det_qnd: f64) -> f64 {
    if gamma_snr.is_infinite() {
        return 1.0;
    }
    let s = gamma_snr * eta_det_qnd;
    s / (s + 1.0)
}

/// High signal-to-noise approximation `η_P ≈ SNR_QND(γ) · η_meas`.
pub fn eta_p_snr_approx(gamma_snr: f64, eta_det_qnd: f64, eta_meas: f64) -> f64 {
    snr_qnd(gamma_snr, eta_det_qnd) * eta_meas
}

/// Fiber length (km) at which the input transmission drops to
/// `η_V = γ·p_dc_qnd`, from the attenuation law `η = 10^(−αL/10)`:
/// `L = −(10/α)·log₁₀(γ·p_dc_qnd)`.
pub fn fiber_length(
    alpha_db_per_km: f64,
    gamma_snr: f64,
    p_dc_qnd: f64,
) -> Result<f64, EstimateError> {
    if alpha_db_per_km <= 0.0 {
        return Err(EstimateError::NonPositive {
            name: "alpha_db_per_km",
            value: alpha_db_per_km,
        });
    }
    let argument = gamma_snr * p_dc_qnd;
    if argument <= 0.0 || argument > 1.0 {
        return Err(EstimateError::InfeasibleFiberTarget { argument });
    }
    Ok(-(10.0 / alpha_db_per_km) * argument.log10())
}

/// Expected protocol duration in seconds to collect the committed-round
/// budget of the given security model at round frequency `ν`.
pub fn protocol_duration(
    k: u32,
    p_commit: f64,
    nu_hz: f64,
    model: SecurityModel,
) -> Result<f64, EstimateError> {
    if p_commit <= 0.0 {
        return Err(EstimateError::NonPositive {
            name: "p_commit",
            value: p_commit,
        });
    }
    if nu_hz <= 0.0 {
        return Err(EstimateError::NonPositive {
            name: "nu_hz",
            value: nu_hz,
        });
    }
    let committed = match model {
        SecurityModel::S2 => 320.0 * f64::from(k).powi(3),
        SecurityModel::S3 => 320.0 * f64::from(k).powi(4),
        SecurityModel::S1 => return Err(EstimateError::NoBudgetForModel { model }),
    };
    Ok(committed / (p_commit * nu_hz))
}
