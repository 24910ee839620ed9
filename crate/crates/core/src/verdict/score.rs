//! Per-round payoffs and the running score.

use serde::{Deserialize, Serialize};

use super::{SecureRegion, VerdictError};

/// Outcome class of a scored round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnswerClass {
    Correct,
    Loss,
    Incorrect,
}

/// Loss-free payoff: `1 − p_b` for a correct answer, `−p_b` for an
/// incorrect one. Loss answers are a contract violation here; they belong
/// to the lossy score.
pub fn payoff(answer: AnswerClass, p_b: f64) -> Result<f64, VerdictError> {
    if !(0.0..1.0).contains(&p_b) || p_b == 0.0 {
        return Err(VerdictError::OutOfRange {
            name: "p_b",
            value: p_b,
            range: "(0, 1)",
        });
    }
    match answer {
        AnswerClass::Correct => Ok(1.0 - p_b),
        AnswerClass::Incorrect => Ok(-p_b),
        AnswerClass::Loss => Err(VerdictError::LossInLosslessScore),
    }
}

/// Lossy payoff: the component of the secure-region surface normal at the
/// evaluation point that matches the answer class.
pub fn lossy_payoff(
    answer: AnswerClass,
    region: &SecureRegion,
    eval_point: [f64; 3],
) -> Result<f64, VerdictError> {
    let grad = region.gradient_at(eval_point)?;
    Ok(match answer {
        AnswerClass::Correct => grad[0],
        AnswerClass::Loss => grad[1],
        AnswerClass::Incorrect => grad[2],
    })
}

/// Running total score over committed rounds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreState {
    payoffs: Vec<f64>,
    total: f64,
}

impl ScoreState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, payoff: f64) {
        self.payoffs.push(payoff);
        self.total += payoff;
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn rounds(&self) -> u64 {
        self.payoffs.len() as u64
    }

    pub fn payoffs(&self) -> &[f64] {
        &self.payoffs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn payoff_values() {
        assert_abs_diff_eq!(
            payoff(AnswerClass::Correct, 0.8).unwrap(),
            0.2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            payoff(AnswerClass::Incorrect, 0.8).unwrap(),
            -0.8,
            epsilon = 1e-15
        );
        assert!(matches!(
            payoff(AnswerClass::Loss, 0.8),
            Err(VerdictError::LossInLosslessScore)
        ));
    }

    #[test]
    fn honest_expectation_is_mu() {
        // E[T] = (1−p_err)(1−p_b) − p_err·p_b = 1 − p_b − p_err.
        let (p_b, p_err) = (0.8, 0.05);
        let expectation = (1.0 - p_err) * payoff(AnswerClass::Correct, p_b).unwrap()
            + p_err * payoff(AnswerClass::Incorrect, p_b).unwrap();
        assert_abs_diff_eq!(expectation, 0.15, epsilon = 1e-12);
    }

    #[test]
    fn score_state_sums_exactly() {
        let mut s = ScoreState::new();
        for i in 0..100 {
            s.push(if i % 2 == 0 { 0.25 } else { -0.75 });
        }
        assert_eq!(s.rounds(), 100);
        assert_abs_diff_eq!(s.total(), s.payoffs().iter().sum::<f64>(), epsilon = 0.0);
        assert_abs_diff_eq!(s.total(), 50.0 * 0.25 - 50.0 * 0.75, epsilon = 1e-12);
    }
}
