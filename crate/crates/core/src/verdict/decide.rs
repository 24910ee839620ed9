//! The verifiers' final accept/reject decision over a transcript.

use serde::{Deserialize, Serialize};

use crate::protocol::{RunOutcome, Transcript, Verdict};

use super::{BoundParams, SecureRegion, VerdictError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    MismatchCommit,
    MismatchAnswer,
    Timing,
    Inconclusive,
    ScoreBelowThreshold,
    LossRateInconsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Accept,
    Reject(RejectReason),
}

impl Decision {
    pub fn is_accept(&self) -> bool {
        matches!(self, Decision::Accept)
    }
}

/// Decides a completed or aborted transcript.
///
/// Any abort rejects immediately. Otherwise the committed rounds are scored
/// (loss-free score when no region is given, ruled-surface score otherwise)
/// and the transcript is accepted iff the score clears `r·μ·(1−δ)` and the
/// `⊥`-rate sits within `rate_sigma` binomial standard deviations of
/// `1 − η_P`.
///
/// The decision is a pure function of its inputs; replays are identical.
pub fn decide(
    transcript: &Transcript,
    params: &BoundParams,
    region: Option<&SecureRegion>,
    rate_sigma: f64,
) -> Result<Decision, VerdictError> {
    params.validate()?;
    let counts = &transcript.counts;
    if counts.get(Verdict::AbortMismatchCommit) > 0 {
        return Ok(Decision::Reject(RejectReason::MismatchCommit));
    }
    if counts.get(Verdict::AbortMismatchAnswer) > 0 {
        return Ok(Decision::Reject(RejectReason::MismatchAnswer));
    }
    if counts.get(Verdict::AbortTiming) > 0 {
        return Ok(Decision::Reject(RejectReason::Timing));
    }
    if matches!(transcript.outcome, RunOutcome::CapExceeded) {
        return Ok(Decision::Reject(RejectReason::Inconclusive));
    }

    let n_correct = counts.get(Verdict::Accept) as f64;
    let n_incorrect = counts.get(Verdict::Incorrect) as f64;
    let n_loss = counts.get(Verdict::Loss) as f64;
    let r = n_correct + n_incorrect + n_loss;
    if r == 0.0 {
        return Err(VerdictError::NoScoredRounds);
    }

    let (score, mu) = match region {
        None => {
            if n_loss > 0.0 {
                return Err(VerdictError::LossInLosslessScore);
            }
            let p_b = params.p_b();
            let mu = params.mu();
            if mu <= 0.0 {
                return Err(VerdictError::InfeasibleHonestMargin { mu });
            }
            (n_correct * (1.0 - p_b) - n_incorrect * p_b, mu)
        }
        Some(region) => {
            let honest = params.honest_point();
            let grad = region.gradient_at(honest)?;
            let mu = honest[0] * grad[0] + honest[1] * grad[1] + honest[2] * grad[2];
            if mu <= 0.0 {
                return Err(VerdictError::InfeasibleHonestMargin { mu });
            }
            (
                n_correct * grad[0] + n_loss * grad[1] + n_incorrect * grad[2],
                mu,
            )
        }
    };

    if score <= r * mu * (1.0 - params.delta_margin) {
        return Ok(Decision::Reject(RejectReason::ScoreBelowThreshold));
    }

    let expected_loss = 1.0 - params.eta_p;
    let observed_loss = n_loss / r;
    let band = rate_sigma * (params.eta_p * (1.0 - params.eta_p) / r).sqrt();
    if (observed_loss - expected_loss).abs() > band {
        return Ok(Decision::Reject(RejectReason::LossRateInconsistent));
    }
    Ok(Decision::Accept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::DeviceParams;
    use crate::protocol::{run_sequential, Geometry, Mode, ProtocolConfig, RunOptions};
    use crate::rng;
    use crate::strategies::Strategy;
    use crate::verdict::SecurityModel;

    fn commit_cfg() -> ProtocolConfig {
        ProtocolConfig {
            n: 8,
            m: 2,
            f_seed: 5,
            delay: 0.1,
            geometry: Geometry::symmetric(),
            mode: Mode::Commit,
        }
    }

    fn params(eta_p: f64, p_err: f64) -> BoundParams {
        BoundParams {
            p_attack: 0.75,
            p_err,
            eta_p,
            delta_margin: 0.5,
            k: 10,
            model: SecurityModel::S1,
        }
    }

    #[test]
    fn honest_noiseless_transcript_accepts() {
        let mut rng = rng::master(80);
        let cfg = commit_cfg();
        let mut strategy = Strategy::honest(DeviceParams::perfect(), 0.0);
        let opts = RunOptions::new(500, 100_000);
        let t = run_sequential(&cfg, &mut strategy, &opts, &mut rng).unwrap();
        let d = decide(&t, &params(1.0, 0.0), None, 4.0).unwrap();
        assert!(d.is_accept());
    }

    #[test]
    fn mismatch_abort_rejects() {
        let mut rng = rng::master(81);
        let cfg = commit_cfg();
        let spec = crate::strategies::MismatchAttackSpec {
            epsilon: 0.2,
            bad_fraction: 1.0,
            bad_set_seed: 0,
            p_commit_mimic: 1.0,
            p_respond: 1.0,
            p_answer: 1.0,
        };
        let mut strategy = Strategy::mismatch(spec);
        let opts = RunOptions::new(500, 100_000);
        let t = run_sequential(&cfg, &mut strategy, &opts, &mut rng).unwrap();
        let d = decide(&t, &params(1.0, 0.0), None, 4.0).unwrap();
        assert_eq!(d, Decision::Reject(RejectReason::MismatchCommit));
    }

    #[test]
    fn inconclusive_transcript_rejects() {
        let mut rng = rng::master(82);
        let cfg = commit_cfg();
        let mut strategy = Strategy::honest(DeviceParams::perfect(), 0.0);
        let opts = RunOptions::new(10_000, 40);
        let t = run_sequential(&cfg, &mut strategy, &opts, &mut rng).unwrap();
        let d = decide(&t, &params(1.0, 0.0), None, 4.0).unwrap();
        assert_eq!(d, Decision::Reject(RejectReason::Inconclusive));
    }

    #[test]
    fn lossy_honest_transcript_accepts_with_region() {
        let mut rng = rng::master(83);
        let cfg = commit_cfg();
        let dev = DeviceParams {
            eta_delay: 0.9,
            ..DeviceParams::perfect()
        };
        let p_err = 0.02;
        let mut strategy = Strategy::honest(dev, p_err);
        let opts = RunOptions::new(2000, 200_000);
        let t = run_sequential(&cfg, &mut strategy, &opts, &mut rng).unwrap();
        let region = SecureRegion::from_curve(
            vec![[0.5, 0.5, 0.0], [0.5, 0.0, 0.5]],
            params(0.9, p_err).honest_point(),
        )
        .unwrap();
        let d = decide(&t, &params(0.9, p_err), Some(&region), 4.0).unwrap();
        assert!(d.is_accept(), "got {d:?}");
    }

    #[test]
    fn loss_rate_violation_rejects() {
        // A source answering far more often than the declared η_P allows
        // clears the score threshold but trips the rate test.
        let mut rng = rng::master(84);
        let cfg = commit_cfg();
        let mut strategy = Strategy::honest(DeviceParams::perfect(), 0.0);
        let opts = RunOptions::new(1000, 200_000);
        let t = run_sequential(&cfg, &mut strategy, &opts, &mut rng).unwrap();
        let region = SecureRegion::from_curve(
            vec![[0.5, 0.5, 0.0], [0.5, 0.0, 0.5]],
            params(0.9, 0.0).honest_point(),
        )
        .unwrap();
        let d = decide(&t, &params(0.9, 0.0), Some(&region), 4.0).unwrap();
        assert_eq!(d, Decision::Reject(RejectReason::LossRateInconsistent));

        // Far more loss than declared sinks the score first.
        let mut rng = rng::master(184);
        let dev = DeviceParams {
            eta_delay: 0.5,
            ..DeviceParams::perfect()
        };
        let mut strategy = Strategy::honest(dev, 0.0);
        let t = run_sequential(&cfg, &mut strategy, &opts, &mut rng).unwrap();
        let d = decide(&t, &params(0.9, 0.0), Some(&region), 4.0).unwrap();
        assert!(matches!(d, Decision::Reject(_)), "got {d:?}");
    }

    #[test]
    fn decide_is_pure() {
        let mut rng = rng::master(85);
        let cfg = commit_cfg();
        let mut strategy = Strategy::honest(DeviceParams::perfect(), 0.02);
        let opts = RunOptions::new(300, 100_000);
        let t = run_sequential(&cfg, &mut strategy, &opts, &mut rng).unwrap();
        let p = params(1.0, 0.02);
        let a = decide(&t, &p, None, 4.0).unwrap();
        let b = decide(&t, &p, None, 4.0).unwrap();
        assert_eq!(a, b);
    }
}
