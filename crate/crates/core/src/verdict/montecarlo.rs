//! Monte Carlo sampling of final scores, used to validate the
//! concentration bounds against simulated honest and attacker behavior.
//!
//! Trials draw from child random streams of an explicit seed and are
//! aggregated order-independently, so parallel and serial execution give
//! identical results.

use rand::Rng;
use rayon::prelude::*;

use super::score::AnswerClass;
use super::{SecureRegion, VerdictError};
use crate::rng;

/// Distribution of answer classes for one scored round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnswerDistribution {
    pub p_correct: f64,
    pub p_loss: f64,
    pub p_incorrect: f64,
}

impl AnswerDistribution {
    pub fn new(p_correct: f64, p_loss: f64, p_incorrect: f64) -> Result<Self, VerdictError> {
        let sum = p_correct + p_loss + p_incorrect;
        if (sum - 1.0).abs() > 1e-9 || [p_correct, p_loss, p_incorrect].iter().any(|&p| p < 0.0) {
            return Err(VerdictError::OutOfRange {
                name: "answer distribution",
                value: sum,
                range: "simplex",
            });
        }
        Ok(Self {
            p_correct,
            p_loss,
            p_incorrect,
        })
    }

    /// Honest distribution with loss independent of errors.
    pub fn honest(eta_p: f64, p_err: f64) -> Result<Self, VerdictError> {
        Self::new(eta_p * (1.0 - p_err), 1.0 - eta_p, eta_p * p_err)
    }

    pub fn as_point(&self) -> [f64; 3] {
        [self.p_correct, self.p_loss, self.p_incorrect]
    }

    fn sample(&self, rng: &mut impl Rng) -> AnswerClass {
        let u: f64 = rng.gen();
        if u < self.p_correct {
            AnswerClass::Correct
        } else if u < self.p_correct + self.p_loss {
            AnswerClass::Loss
        } else {
            AnswerClass::Incorrect
        }
    }
}

/// Which score to accumulate.
#[derive(Debug, Clone, Copy)]
pub enum ScoreKind<'a> {
    /// Loss-free payoff with per-round correctness bound `p_b`; the
    /// distribution must put no mass on losses.
    Lossless { p_b: f64 },
    /// Ruled-surface payoff evaluated at a fixed point.
    Lossy {
        region: &'a SecureRegion,
        eval_point: [f64; 3],
    },
}

impl ScoreKind<'_> {
    /// Payoff components per answer class `(C, ⊥, I)`.
    fn components(&self) -> Result<[f64; 3], VerdictError> {
        match self {
            ScoreKind::Lossless { p_b } => {
                if !(*p_b > 0.0 && *p_b < 1.0) {
                    return Err(VerdictError::OutOfRange {
                        name: "p_b",
                        value: *p_b,
                        range: "(0, 1)",
                    });
                }
                Ok([1.0 - p_b, f64::NAN, -p_b])
            }
            ScoreKind::Lossy { region, eval_point } => region.gradient_at(*eval_point),
        }
    }
}

/// Samples `trials` independent final scores of `rounds`-round runs.
pub fn sample_scores(
    dist: &AnswerDistribution,
    kind: &ScoreKind,
    rounds: u64,
    trials: u64,
    seed: u64,
) -> Result<Vec<f64>, VerdictError> {
    if matches!(kind, ScoreKind::Lossless { .. }) && dist.p_loss > 0.0 {
        return Err(VerdictError::LossInLosslessScore);
    }
    let components = kind.components()?;
    let scores = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng::child(seed, trial);
            let mut total = 0.0;
            for _ in 0..rounds {
                total += match dist.sample(&mut rng) {
                    AnswerClass::Correct => components[0],
                    AnswerClass::Loss => components[1],
                    AnswerClass::Incorrect => components[2],
                };
            }
            total
        })
        .collect();
    Ok(scores)
}

/// Wilson score interval for a binomial proportion at `z` standard normal
/// units.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Fraction of trials whose final score reaches `threshold`.
pub fn sample_score_exceedance(
    dist: &AnswerDistribution,
    kind: &ScoreKind,
    rounds: u64,
    trials: u64,
    seed: u64,
    threshold: f64,
) -> Result<f64, VerdictError> {
    let scores = sample_scores(dist, kind, rounds, trials, seed)?;
    Ok(scores.iter().filter(|&&s| s >= threshold).count() as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verdict::chernoff_accept_floor;

    #[test]
    fn honest_mean_score_matches_mu() {
        let dist = AnswerDistribution::new(0.95, 0.0, 0.05).unwrap();
        let kind = ScoreKind::Lossless { p_b: 0.8 };
        let scores = sample_scores(&dist, &kind, 500, 2000, 7).unwrap();
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        let mu = 0.15 * 500.0;
        // σ of one run's score ≈ √(r·Var(T)) with Var(T) ≤ 0.25.
        let sigma = (500.0f64 * 0.25).sqrt() / (scores.len() as f64).sqrt();
        assert!((mean - mu).abs() < 4.0 * sigma, "mean {mean} vs {mu}");
    }

    #[test]
    fn lossless_kind_rejects_lossy_distribution() {
        let dist = AnswerDistribution::new(0.8, 0.1, 0.1).unwrap();
        let kind = ScoreKind::Lossless { p_b: 0.8 };
        assert!(sample_scores(&dist, &kind, 10, 10, 0).is_err());
    }

    #[test]
    fn honest_acceptance_beats_the_chernoff_floor() {
        let (p_b, p_err, delta) = (0.8, 0.05, 0.5);
        let mu = 1.0 - p_b - p_err;
        let rounds = 400;
        let dist = AnswerDistribution::honest(1.0, p_err).unwrap();
        let kind = ScoreKind::Lossless { p_b };
        let threshold = rounds as f64 * mu * (1.0 - delta);
        // Note `>` vs `≥` matters at zero measure only.
        let freq = sample_score_exceedance(&dist, &kind, rounds, 4000, 11, threshold).unwrap();
        let floor = chernoff_accept_floor(mu, delta, rounds, 1.0).unwrap();
        assert!(freq >= floor - 0.01, "freq {freq} below floor {floor}");
    }

    #[test]
    fn score_expectations_respect_the_surface() {
        let region = SecureRegion::from_curve(
            vec![[0.5, 0.5, 0.0], [0.5, 0.25, 0.25], [0.5, 0.0, 0.5]],
            [0.9, 0.05, 0.05],
        )
        .unwrap();
        let rounds = 400u64;
        let trials = 3000u64;

        // Honest point: the Monte Carlo mean matches μ̃ = p·∇F|_p.
        let honest = [0.9, 0.05, 0.05];
        let dist = AnswerDistribution::new(honest[0], honest[1], honest[2]).unwrap();
        let kind = ScoreKind::Lossy {
            region: &region,
            eval_point: honest,
        };
        let scores = sample_scores(&dist, &kind, rounds, trials, 21).unwrap();
        let mean = scores.iter().sum::<f64>() / trials as f64;
        let mu = region.expected_score(honest, honest).unwrap();
        assert!(mu > 0.0);
        let sigma = (rounds as f64).sqrt() / (trials as f64).sqrt();
        assert!(
            (mean - rounds as f64 * mu).abs() < 3.0 * sigma,
            "mean {mean}"
        );

        // Points with q·∇F|_q ≤ 0 have non-positive mean score when played
        // and scored at q.
        for q in [[0.4, 0.3, 0.3], [0.2, 0.5, 0.3], [0.45, 0.1, 0.45]] {
            let expectation = region.expected_score(q, q).unwrap();
            assert!(
                expectation <= 1e-12,
                "point {q:?} is not on the attacker side"
            );
            let dist = AnswerDistribution::new(q[0], q[1], q[2]).unwrap();
            let kind = ScoreKind::Lossy {
                region: &region,
                eval_point: q,
            };
            let scores = sample_scores(&dist, &kind, rounds, trials, 22).unwrap();
            let mean = scores.iter().sum::<f64>() / trials as f64;
            assert!(mean <= 3.0 * sigma, "attacker mean {mean} at {q:?}");
        }
    }

    #[test]
    fn parallel_sampling_is_deterministic() {
        let dist = AnswerDistribution::honest(0.9, 0.02).unwrap();
        let region =
            SecureRegion::from_curve(vec![[0.5, 0.5, 0.0], [0.5, 0.0, 0.5]], [0.88, 0.1, 0.02])
                .unwrap();
        let kind = ScoreKind::Lossy {
            region: &region,
            eval_point: [0.88, 0.1, 0.02],
        };
        let a = sample_scores(&dist, &kind, 100, 500, 3).unwrap();
        let b = sample_scores(&dist, &kind, 100, 500, 3).unwrap();
        assert_eq!(a, b);
    }
}
