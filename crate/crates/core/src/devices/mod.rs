//! Stochastic device and channel models for the prover's laboratory:
//! transmission loss, click/no-click detectors with dark counts, the
//! linear-optical partial Bell-measurement presence detector, and the
//! pipelines that turn those pieces into commit/measure statistics.
//!
//! Two presence-detection models are provided. [`presence_pipeline`] is the
//! abstract model parameterized directly by the presence-detection
//! efficiency and dark-count probability; it samples with the same absorbed
//! dark-count convention as the closed forms in [`crate::estimate`], so the
//! two agree exactly in expectation. [`prover_lab_pipeline`] is the concrete
//! partial-BSM realization with four detectors and click-pattern
//! classification, used by the honest prover strategy.

mod bsm;

pub use bsm::bsm_classify;
pub use bsm::{bsm_commit_probability, partial_bsm, BsmOutcome, ClickPattern, PartialBsmResult};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimate::{self, EstimateInputs};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DeviceError {
    #[error("parameter {name} = {value} outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("absorbed dark-count probability {p_dc} exceeds 1 − {survival} (double counting)")]
    DarkCountConvention { p_dc: f64, survival: f64 },
    #[error("need at least {min} trials, got {got}")]
    TooFewTrials { got: u64, min: u64 },
    #[error("no committed rounds; transmission estimate undefined")]
    UndefinedEstimate,
}

/// Loss and detector parameters of the verifier-to-prover channel and the
/// prover's laboratory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Transmission verifier → prover.
    pub eta_v: f64,
    /// Measurement detector efficiency.
    pub eta_det: f64,
    /// Measurement dark-count probability per window (absorbed convention).
    pub p_dc: f64,
    /// Presence-detection efficiency.
    pub eta_det_qnd: f64,
    /// Presence-detection dark-count probability per window (absorbed
    /// convention).
    pub p_dc_qnd: f64,
    /// Survival of the photon through the presence detection.
    pub eta_surv: f64,
    /// Equipment transmission after the presence detection.
    pub eta_equip: f64,
    /// Survival through the delay loop bridging the time between commitment
    /// and arrival of the classical inputs.
    pub eta_delay: f64,
}

impl DeviceParams {
    /// Lossless, dark-count-free devices.
    pub fn perfect() -> Self {
        Self {
            eta_v: 1.0,
            eta_det: 1.0,
            p_dc: 0.0,
            eta_det_qnd: 1.0,
            p_dc_qnd: 0.0,
            eta_surv: 1.0,
            eta_equip: 1.0,
            eta_delay: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        for (name, value) in [
            ("eta_v", self.eta_v),
            ("eta_det", self.eta_det),
            ("p_dc", self.p_dc),
            ("eta_det_qnd", self.eta_det_qnd),
            ("p_dc_qnd", self.p_dc_qnd),
            ("eta_surv", self.eta_surv),
            ("eta_equip", self.eta_equip),
            ("eta_delay", self.eta_delay),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(DeviceError::OutOfRange { name, value });
            }
        }
        // The absorbed convention turns `p_dc` into the joint probability of
        // (no real detection) ∧ (dark count); it cannot exceed the
        // no-detection probability.
        let survival = self.eta_meas();
        if survival < 1.0 && self.p_dc > 1.0 - survival {
            return Err(DeviceError::DarkCountConvention {
                p_dc: self.p_dc,
                survival,
            });
        }
        let herald = self.eta_v * self.eta_det_qnd;
        if herald < 1.0 && self.p_dc_qnd > 1.0 - herald {
            return Err(DeviceError::DarkCountConvention {
                p_dc: self.p_dc_qnd,
                survival: herald,
            });
        }
        Ok(())
    }

    /// Combined efficiency of everything after the presence detection,
    /// including the delay loop.
    pub fn eta_meas(&self) -> f64 {
        self.eta_det * self.eta_equip * self.eta_surv * self.eta_delay
    }

    /// Probability the presence detection commits in one round.
    pub fn p_commit(&self) -> f64 {
        self.eta_v * self.eta_det_qnd + self.p_dc_qnd
    }

    /// Closed-form prover-lab transmission for these parameters.
    pub fn eta_p(&self) -> Result<f64, estimate::EstimateError> {
        estimate::eta_p_closed_form(&self.estimate_inputs())
    }

    /// Maps onto the estimator inputs; the delay-loop survival is folded
    /// into the equipment transmission.
    pub fn estimate_inputs(&self) -> EstimateInputs {
        EstimateInputs {
            eta_v: self.eta_v,
            eta_det: self.eta_det,
            eta_det_qnd: self.eta_det_qnd,
            p_dc: self.p_dc,
            p_dc_qnd: self.p_dc_qnd,
            eta_surv: self.eta_surv,
            eta_equip: self.eta_equip * self.eta_delay,
        }
    }
}

/// Parameters of the demonstrated cavity-based true photon presence
/// detector, usable as a drop-in presence-detection preset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QndParams {
    /// Probability the photon is in the output mode given heralding.
    /// Demonstrated values span roughly 0.25–0.55.
    pub eta_surv: f64,
    /// Heralding dark-count probability.
    pub p_dc_qnd: f64,
    /// Fidelity of the photon in the output mode.
    pub output_fidelity: f64,
}

impl QndParams {
    /// The demonstrated parameter set (survival at the midpoint of the
    /// reported 0.25–0.55 range).
    pub fn demonstrated() -> Self {
        Self {
            eta_surv: 0.4,
            p_dc_qnd: 0.03,
            output_fidelity: 0.96,
        }
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        for (name, value) in [
            ("eta_surv", self.eta_surv),
            ("p_dc_qnd", self.p_dc_qnd),
            ("output_fidelity", self.output_fidelity),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(DeviceError::OutOfRange { name, value });
            }
        }
        Ok(())
    }

    /// Answer-flip probability contributed by imperfect output fidelity,
    /// to be folded into the prover's error rate.
    pub fn error_contribution(&self) -> f64 {
        1.0 - self.output_fidelity
    }

    /// Device parameters using this presence detector.
    pub fn apply_to(&self, mut dev: DeviceParams) -> DeviceParams {
        dev.eta_surv = self.eta_surv;
        dev.p_dc_qnd = self.p_dc_qnd;
        dev
    }
}

/// Bernoulli survival draw.
pub fn sample_loss(p_survive: f64, rng: &mut impl Rng) -> bool {
    debug_assert!((0.0..=1.0).contains(&p_survive));
    rng.gen::<f64>() < p_survive
}

/// Click/no-click detector: clicks with probability `eta_det` when a photon
/// is present, otherwise with the dark-count probability. The no-detection
/// factor is absorbed into `p_dc` by convention.
pub fn detector_click(photon_present: bool, eta_det: f64, p_dc: f64, rng: &mut impl Rng) -> bool {
    if photon_present {
        sample_loss(eta_det, rng)
    } else {
        sample_loss(p_dc, rng)
    }
}

/// Teleportation correction implied by a conclusive partial Bell
/// measurement with a `|Φ+⟩` resource pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PauliCorrection {
    /// `Ψ+` outcome: X correction.
    X,
    /// `Ψ−` outcome: XZ correction.
    Xz,
}

impl PauliCorrection {
    pub fn from_outcome(outcome: BsmOutcome) -> Option<Self> {
        match outcome {
            BsmOutcome::PsiPlus => Some(Self::X),
            BsmOutcome::PsiMinus => Some(Self::Xz),
            BsmOutcome::Inconclusive => None,
        }
    }

    /// Whether the correction classically flips the measurement outcome in
    /// one of the two conjugate bases (index 0: computational, 1: Hadamard).
    /// X flips computational-basis outcomes and leaves Hadamard outcomes;
    /// XZ flips both.
    pub fn flips_outcome(self, basis_index: u32) -> bool {
        match self {
            Self::X => basis_index == 0,
            Self::Xz => true,
        }
    }
}

/// One pass of the prover's laboratory from input arrival to measurement
/// readiness, using the partial-BSM presence detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOutcome {
    /// Commitment bit: a conclusive Bell click pattern was observed.
    pub commit: bool,
    /// The heralding was genuine (a real two-photon coincidence, not dark
    /// counts), so a teleported photon exists.
    pub herald_real: bool,
    /// The measurement detector will click once the basis is chosen.
    pub photon_available: bool,
    /// The eventual click stems from the teleported photon rather than a
    /// measurement dark count; only then is the outcome correlated.
    pub measured_real: bool,
    /// Teleportation correction to apply classically after measuring.
    pub correction: Option<PauliCorrection>,
}

/// Prover-lab pipeline built on the partial Bell measurement: EPR
/// generation, two-photon interference, click classification, then
/// delay-loop, equipment and detection losses for the surviving photon.
pub fn prover_lab_pipeline(
    dev: &DeviceParams,
    input_arrived: bool,
    rng: &mut impl Rng,
) -> PipelineOutcome {
    let bsm = partial_bsm(input_arrived, dev.eta_det, dev.p_dc, rng);
    let commit = bsm.outcome != BsmOutcome::Inconclusive;
    let herald_real = commit && bsm.genuine_coincidence;
    let correction = PauliCorrection::from_outcome(bsm.outcome);
    if !commit {
        return PipelineOutcome {
            commit,
            herald_real: false,
            photon_available: false,
            measured_real: false,
            correction: None,
        };
    }
    let measured_real = herald_real
        && sample_loss(dev.eta_surv, rng)
        && sample_loss(dev.eta_delay, rng)
        && sample_loss(dev.eta_equip, rng)
        && sample_loss(dev.eta_det, rng);
    let photon_available = measured_real || sample_loss(dev.p_dc, rng);
    PipelineOutcome {
        commit,
        herald_real,
        photon_available,
        measured_real,
        correction,
    }
}

/// Abstract presence-detection outcome used for transmission estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PresenceOutcome {
    pub committed: bool,
    pub herald_real: bool,
    pub measured: bool,
    pub measured_real: bool,
}

/// Samples one round of the abstract presence-detection model.
///
/// Dark events are drawn conditionally on the real event failing, with the
/// absorbed probabilities rescaled, so that
/// `P[commit] = η_V·η_det_qnd + p_dc_qnd` and
/// `P[measured | real herald] = η_meas + p_dc` hold exactly.
pub fn presence_pipeline(dev: &DeviceParams, rng: &mut impl Rng) -> PresenceOutcome {
    let herald_signal = dev.eta_v * dev.eta_det_qnd;
    let herald_real = sample_loss(herald_signal, rng);
    let committed = if herald_real {
        true
    } else {
        let residual = 1.0 - herald_signal;
        residual > 0.0 && sample_loss((dev.p_dc_qnd / residual).min(1.0), rng)
    };
    if !committed {
        return PresenceOutcome {
            committed,
            herald_real,
            measured: false,
            measured_real: false,
        };
    }
    let (measured, measured_real) = if herald_real {
        let eta_meas = dev.eta_meas();
        if sample_loss(eta_meas, rng) {
            (true, true)
        } else {
            let residual = 1.0 - eta_meas;
            let dark = residual > 0.0 && sample_loss((dev.p_dc / residual).min(1.0), rng);
            (dark, false)
        }
    } else {
        (sample_loss(dev.p_dc, rng), false)
    };
    PresenceOutcome {
        committed,
        herald_real,
        measured,
        measured_real,
    }
}

/// Monte Carlo estimate of the prover-lab transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaPEstimate {
    pub eta_p_hat: f64,
    pub p_commit_hat: f64,
    pub eta_p_se: f64,
    pub p_commit_se: f64,
    pub trials: u64,
    pub committed: u64,
    pub measured: u64,
}

/// Minimum trial count for [`empirical_eta_p`].
pub const MIN_ETA_P_TRIALS: u64 = 10_000;

/// Estimates `η_P = P[measured | committed]` and the commit probability by
/// Monte Carlo over the abstract presence pipeline.
pub fn empirical_eta_p(
    dev: &DeviceParams,
    trials: u64,
    rng: &mut impl Rng,
) -> Result<EtaPEstimate, DeviceError> {
    dev.validate()?;
    if trials < MIN_ETA_P_TRIALS {
        return Err(DeviceError::TooFewTrials {
            got: trials,
            min: MIN_ETA_P_TRIALS,
        });
    }
    let mut committed = 0u64;
    let mut measured = 0u64;
    for _ in 0..trials {
        let outcome = presence_pipeline(dev, rng);
        if outcome.committed {
            committed += 1;
            if outcome.measured {
                measured += 1;
            }
        }
    }
    if committed == 0 {
        return Err(DeviceError::UndefinedEstimate);
    }
    let eta_p_hat = measured as f64 / committed as f64;
    let p_commit_hat = committed as f64 / trials as f64;
    Ok(EtaPEstimate {
        eta_p_hat,
        p_commit_hat,
        eta_p_se: (eta_p_hat * (1.0 - eta_p_hat) / committed as f64).sqrt(),
        p_commit_se: (p_commit_hat * (1.0 - p_commit_hat) / trials as f64).sqrt(),
        trials,
        committed,
        measured,
    })
}
