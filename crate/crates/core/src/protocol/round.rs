//! Single-round state machines for the plain and committing protocols.

use rand::Rng;

use crate::devices::PauliCorrection;
use crate::qcore::linalg::{self, CMat};
use crate::qcore::{Basis, BellState, QcoreError};
use crate::strategies::{AnswerContext, CommitContext, Strategy};

use super::{
    schedule_round, Answer, BitString, Mode, ProtocolConfig, ProtocolError, RoundRecord,
    RoundTimes, Verdict,
};

/// The round's shared two-qubit state in the purified picture: the
/// verifier's kept half and the prover-side qubit. Measurements collapse
/// the state in place, so prover and verifier outcomes come out correlated.
///
/// This is a lean unvalidated variant of the `qcore` measurement path; the
/// states it tracks are conditioned projections of a Bell state.
pub struct QuantumRound {
    state: CMat,
    m: u32,
}

impl QuantumRound {
    /// Fresh EPR pair `|Φ+⟩`.
    pub fn fresh_epr(m: u32) -> Self {
        Self {
            state: BellState::PhiPlus.density().matrix().clone(),
            m,
        }
    }

    /// Applies a teleportation by-product Pauli to the prover-side qubit.
    pub fn apply_prover_pauli(&mut self, correction: PauliCorrection) {
        let x = CMat::from_row_slice(2, 2, &[0.0.into(), 1.0.into(), 1.0.into(), 0.0.into()]);
        let z = CMat::from_row_slice(2, 2, &[1.0.into(), 0.0.into(), 0.0.into(), (-1.0).into()]);
        let p = match correction {
            PauliCorrection::X => x,
            PauliCorrection::Xz => x * z,
        };
        let u = linalg::kron(&linalg::identity(2), &p);
        self.state = &u * &self.state * u.adjoint();
    }

    pub fn measure_prover(&mut self, basis: u32, rng: &mut impl Rng) -> Result<u8, QcoreError> {
        self.measure(false, basis, rng)
    }

    pub fn measure_verifier(&mut self, basis: u32, rng: &mut impl Rng) -> Result<u8, QcoreError> {
        self.measure(true, basis, rng)
    }

    fn measure(
        &mut self,
        verifier_side: bool,
        basis: u32,
        rng: &mut impl Rng,
    ) -> Result<u8, QcoreError> {
        let basis = Basis::equatorial(basis, self.m)?;
        let embed = |p: &CMat| {
            if verifier_side {
                linalg::kron(p, &linalg::identity(2))
            } else {
                linalg::kron(&linalg::identity(2), p)
            }
        };
        let proj0 = embed(&basis.projector(0));
        let mut p0 = linalg::trace_re(&(&proj0 * &self.state)).clamp(0.0, 1.0);
        if p0 < 1e-12 {
            p0 = 0.0;
        } else if p0 > 1.0 - 1e-12 {
            p0 = 1.0;
        }
        let outcome: u8 = if rng.gen::<f64>() < p0 { 0 } else { 1 };
        let proj = if outcome == 0 {
            proj0
        } else {
            embed(&basis.projector(1))
        };
        let prob = if outcome == 0 { p0 } else { 1.0 - p0 };
        self.state =
            linalg::hermitize(&(&proj * &self.state * &proj)).unscale(prob.max(f64::MIN_POSITIVE));
        Ok(outcome)
    }
}

fn check_delay(delay: f64) -> Result<(), ProtocolError> {
    if delay < 0.0 {
        return Err(ProtocolError::Causality { lead: -delay });
    }
    Ok(())
}

/// Executes one round of the plain protocol against the given strategy.
pub fn run_round_plain(
    cfg: &ProtocolConfig,
    strategy: &mut Strategy,
    round_index: usize,
    rng: &mut impl Rng,
) -> Result<RoundRecord, ProtocolError> {
    debug_assert_eq!(cfg.mode, Mode::Plain);
    let timetable = schedule_round(cfg, 0.0)?;
    let x = BitString::random(cfg.n, rng);
    let y = BitString::random(cfg.n, rng);
    let basis = cfg.basis(&x, &y)?;
    let mut qround = QuantumRound::fresh_epr(cfg.m);

    let ctx = AnswerContext {
        round_index,
        committed_so_far: 0,
        x: &x,
        y: &y,
        basis,
        cfg,
    };
    let decision = strategy.answer_decision(&ctx, &mut qround, rng);
    check_delay(decision.delay)?;

    let verifier_outcome = qround.measure_verifier(basis, rng)?;
    let tolerance = cfg.geometry.timing_tolerance;
    let verdict = if decision.delay > tolerance {
        Verdict::AbortTiming
    } else {
        classify_answers(decision.answer_v0, decision.answer_v1, verifier_outcome)
    };

    let times = RoundTimes {
        q_arrival: timetable.q_arrival,
        classical_arrival: timetable.classical_arrival,
        commit_v0: timetable.commit_v0,
        commit_v1: timetable.commit_v1,
        answer_v0: timetable.answer_v0 + decision.delay,
        answer_v1: timetable.answer_v1 + decision.delay,
    };
    Ok(RoundRecord {
        round_index,
        x,
        y,
        commit_a: true,
        commit_b: true,
        answer: decision.answer_v0,
        verifier_outcome,
        times,
        verdict,
    })
}

/// Executes one round of the committing protocol.
///
/// The commitment is collected at quantum-arrival time; only afterwards are
/// the classical inputs released to the prover side. On `(0,0)` the round
/// is discarded, on differing commits it aborts, and only `(1,1)` rounds
/// proceed to the answer phase.
pub fn run_round_commit(
    cfg: &ProtocolConfig,
    strategy: &mut Strategy,
    round_index: usize,
    committed_so_far: usize,
    rng: &mut impl Rng,
) -> Result<RoundRecord, ProtocolError> {
    debug_assert_eq!(cfg.mode, Mode::Commit);
    let timetable = schedule_round(cfg, 0.0)?;
    let x = BitString::random(cfg.n, rng);
    let y = BitString::random(cfg.n, rng);
    let mut qround = QuantumRound::fresh_epr(cfg.m);

    let commit_ctx = CommitContext {
        round_index,
        committed_so_far,
        x_intercepted: &x,
        y_intercepted: &y,
        cfg,
    };
    let commit = strategy.commit_decision(&commit_ctx, &mut qround, rng);
    check_delay(commit.delay)?;
    let tolerance = cfg.geometry.timing_tolerance;

    let mut times = RoundTimes {
        q_arrival: timetable.q_arrival,
        classical_arrival: timetable.classical_arrival,
        commit_v0: timetable.commit_v0 + commit.delay,
        commit_v1: timetable.commit_v1 + commit.delay,
        answer_v0: timetable.answer_v0,
        answer_v1: timetable.answer_v1,
    };
    let record =
        |answer: Answer, verifier_outcome: u8, times: RoundTimes, verdict: Verdict| RoundRecord {
            round_index,
            x: x.clone(),
            y: y.clone(),
            commit_a: commit.commit_v0,
            commit_b: commit.commit_v1,
            answer,
            verifier_outcome,
            times,
            verdict,
        };

    if !commit.commit_v0 && !commit.commit_v1 {
        return Ok(record(Answer::Loss, 0, times, Verdict::DiscardedNoCommit));
    }
    if commit.commit_v0 != commit.commit_v1 {
        return Ok(record(Answer::Loss, 0, times, Verdict::AbortMismatchCommit));
    }
    if commit.delay > tolerance {
        return Ok(record(Answer::Loss, 0, times, Verdict::AbortTiming));
    }

    let basis = cfg.basis(&x, &y)?;
    let ctx = AnswerContext {
        round_index,
        committed_so_far,
        x: &x,
        y: &y,
        basis,
        cfg,
    };
    let decision = strategy.answer_decision(&ctx, &mut qround, rng);
    check_delay(decision.delay)?;
    times.answer_v0 += decision.delay;
    times.answer_v1 += decision.delay;

    let verifier_outcome = qround.measure_verifier(basis, rng)?;
    let verdict = if decision.delay > tolerance {
        Verdict::AbortTiming
    } else {
        classify_answers(decision.answer_v0, decision.answer_v1, verifier_outcome)
    };
    Ok(record(decision.answer_v0, verifier_outcome, times, verdict))
}

fn classify_answers(answer_v0: Answer, answer_v1: Answer, verifier_outcome: u8) -> Verdict {
    if answer_v0 != answer_v1 {
        return Verdict::AbortMismatchAnswer;
    }
    match answer_v0 {
        Answer::Loss => Verdict::Loss,
        Answer::Bit(bit) if bit == verifier_outcome => Verdict::Accept,
        Answer::Bit(_) => Verdict::Incorrect,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::DeviceParams;
    use crate::protocol::Geometry;
    use crate::rng;

    fn plain_cfg() -> ProtocolConfig {
        ProtocolConfig {
            n: 8,
            m: 2,
            f_seed: 100,
            delay: 0.0,
            geometry: Geometry::symmetric(),
            mode: Mode::Plain,
        }
    }

    fn commit_cfg() -> ProtocolConfig {
        ProtocolConfig {
            delay: 0.1,
            mode: Mode::Commit,
            ..plain_cfg()
        }
    }

    #[test]
    fn honest_noiseless_plain_rounds_always_accept() {
        let mut rng = rng::master(50);
        let cfg = plain_cfg();
        let mut strategy = Strategy::honest(DeviceParams::perfect(), 0.0);
        for i in 0..2000 {
            let rec = run_round_plain(&cfg, &mut strategy, i, &mut rng).unwrap();
            assert_eq!(rec.verdict, Verdict::Accept);
            assert_eq!(rec.answer, Answer::Bit(rec.verifier_outcome));
        }
    }

    #[test]
    fn plain_loss_fraction_follows_transmission() {
        let mut rng = rng::master(51);
        let cfg = plain_cfg();
        let dev = DeviceParams {
            eta_v: 0.5,
            ..DeviceParams::perfect()
        };
        let mut strategy = Strategy::honest(dev, 0.0);
        let n = 100_000;
        let losses = (0..n)
            .filter(|&i| {
                run_round_plain(&cfg, &mut strategy, i, &mut rng)
                    .unwrap()
                    .verdict
                    == Verdict::Loss
            })
            .count() as f64;
        let freq = losses / n as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((freq - 0.5).abs() < 3.0 * sigma, "loss fraction {freq}");
    }

    #[test]
    fn basis_guess_attacker_answers_half_and_never_errs() {
        let mut rng = rng::master(52);
        let cfg = plain_cfg();
        let mut strategy = Strategy::basis_guess(1.0);
        let n = 100_000;
        let mut answered = 0u32;
        for i in 0..n {
            let rec = run_round_plain(&cfg, &mut strategy, i, &mut rng).unwrap();
            match rec.verdict {
                Verdict::Accept => answered += 1,
                Verdict::Loss => {}
                v => panic!("unexpected verdict {v:?}"),
            }
        }
        let freq = f64::from(answered) / n as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((freq - 0.5).abs() < 3.0 * sigma, "answer rate {freq}");
    }

    #[test]
    fn basis_guess_answer_rate_scales_with_basis_count() {
        let mut rng = rng::master(53);
        let cfg = ProtocolConfig {
            m: 3,
            ..plain_cfg()
        };
        let mut strategy = Strategy::basis_guess(1.0);
        let n = 30_000;
        let answered = (0..n)
            .filter(|&i| {
                run_round_plain(&cfg, &mut strategy, i, &mut rng)
                    .unwrap()
                    .verdict
                    == Verdict::Accept
            })
            .count() as f64;
        let freq = answered / n as f64;
        let expect = 1.0 / 3.0;
        let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
        assert!((freq - expect).abs() < 3.0 * sigma, "answer rate {freq}");
    }

    #[test]
    fn honest_commit_round_verdicts() {
        let mut rng = rng::master(54);
        let cfg = commit_cfg();
        let mut strategy = Strategy::honest(DeviceParams::perfect(), 0.0);
        let mut seen_commit = false;
        let mut seen_discard = false;
        for i in 0..500 {
            let rec = run_round_commit(&cfg, &mut strategy, i, 0, &mut rng).unwrap();
            match rec.verdict {
                Verdict::Accept => {
                    seen_commit = true;
                    assert!(rec.commit_a && rec.commit_b);
                }
                Verdict::DiscardedNoCommit => {
                    seen_discard = true;
                    assert!(!rec.commit_a && !rec.commit_b);
                }
                v => panic!("honest round produced {v:?}"),
            }
        }
        // A perfect partial BSM commits half the time, so both classes occur.
        assert!(seen_commit && seen_discard);
    }

    #[test]
    fn honest_prover_error_rate_shows_up_in_committed_rounds() {
        let mut rng = rng::master(55);
        let cfg = commit_cfg();
        let p_err = 0.05;
        let mut strategy = Strategy::honest(DeviceParams::perfect(), p_err);
        let mut committed = 0u32;
        let mut incorrect = 0u32;
        let mut i = 0;
        while committed < 40_000 {
            let rec =
                run_round_commit(&cfg, &mut strategy, i, committed as usize, &mut rng).unwrap();
            i += 1;
            match rec.verdict {
                Verdict::Accept => committed += 1,
                Verdict::Incorrect => {
                    committed += 1;
                    incorrect += 1;
                }
                Verdict::DiscardedNoCommit => {}
                v => panic!("unexpected {v:?}"),
            }
        }
        let freq = f64::from(incorrect) / f64::from(committed);
        let sigma = (p_err * (1.0 - p_err) / f64::from(committed)).sqrt();
        assert!((freq - p_err).abs() < 3.0 * sigma, "error rate {freq}");
    }

    #[test]
    fn delay_loop_loss_shows_up_as_loss_rate() {
        let mut rng = rng::master(56);
        let cfg = commit_cfg();
        let dev = DeviceParams {
            eta_delay: 0.9,
            ..DeviceParams::perfect()
        };
        let mut strategy = Strategy::honest(dev, 0.0);
        let mut committed = 0u32;
        let mut losses = 0u32;
        let mut i = 0;
        while committed < 40_000 {
            let rec =
                run_round_commit(&cfg, &mut strategy, i, committed as usize, &mut rng).unwrap();
            i += 1;
            match rec.verdict {
                Verdict::Accept => committed += 1,
                Verdict::Loss => {
                    committed += 1;
                    losses += 1;
                }
                Verdict::DiscardedNoCommit => {}
                v => panic!("unexpected {v:?}"),
            }
        }
        let freq = f64::from(losses) / f64::from(committed);
        let sigma = (0.1 * 0.9 / f64::from(committed)).sqrt();
        assert!((freq - 0.1).abs() < 3.0 * sigma, "loss rate {freq}");
    }

    #[test]
    fn mismatch_attacker_with_zero_epsilon_never_aborts() {
        let mut rng = rng::master(57);
        let cfg = commit_cfg();
        let spec = crate::strategies::MismatchAttackSpec {
            epsilon: 0.0,
            bad_fraction: 1.0,
            bad_set_seed: 1,
            p_commit_mimic: 0.6,
            p_respond: 1.0,
            p_answer: 1.0,
        };
        let mut strategy = Strategy::mismatch(spec);
        for i in 0..5000 {
            let rec = run_round_commit(&cfg, &mut strategy, i, 0, &mut rng).unwrap();
            assert_ne!(rec.verdict, Verdict::AbortMismatchCommit);
        }
    }

    #[test]
    fn late_answers_abort_on_timing() {
        let mut rng = rng::master(59);
        let cfg = commit_cfg();
        let mut strategy = Strategy::honest_with_delay(DeviceParams::perfect(), 0.0, 1e-3);
        let mut saw_timing = false;
        for i in 0..50 {
            let rec = run_round_commit(&cfg, &mut strategy, i, 0, &mut rng).unwrap();
            match rec.verdict {
                Verdict::AbortTiming => {
                    saw_timing = true;
                    assert!(rec.times.answer_v0 > 2.0 + cfg.geometry.timing_tolerance);
                }
                Verdict::DiscardedNoCommit => {}
                v => panic!("unexpected {v:?}"),
            }
        }
        assert!(saw_timing);
    }

    #[test]
    fn answers_before_classical_arrival_are_a_causality_error() {
        let mut rng = rng::master(159);
        let cfg = commit_cfg();
        let mut strategy = Strategy::honest_with_delay(DeviceParams::perfect(), 0.0, -0.05);
        let mut saw_error = false;
        for i in 0..50 {
            match run_round_commit(&cfg, &mut strategy, i, 0, &mut rng) {
                Err(ProtocolError::Causality { lead }) => {
                    saw_error = true;
                    assert!((lead - 0.05).abs() < 1e-12);
                    break;
                }
                Ok(rec) => assert_eq!(rec.verdict, Verdict::DiscardedNoCommit),
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(saw_error);
    }

    #[test]
    fn mismatch_attacker_conditional_mismatch_rate() {
        let mut rng = rng::master(58);
        let cfg = commit_cfg();
        let epsilon = 0.05;
        let spec = crate::strategies::MismatchAttackSpec {
            epsilon,
            bad_fraction: 1.0,
            bad_set_seed: 1,
            p_commit_mimic: 0.5,
            p_respond: 1.0,
            p_answer: 1.0,
        };
        let mut strategy = Strategy::mismatch(spec);
        let mut non_zero = 0u32;
        let mut mismatches = 0u32;
        for i in 0..100_000 {
            let rec = run_round_commit(&cfg, &mut strategy, i, 0, &mut rng).unwrap();
            match rec.verdict {
                Verdict::DiscardedNoCommit => {}
                Verdict::AbortMismatchCommit => {
                    non_zero += 1;
                    mismatches += 1;
                }
                _ => non_zero += 1,
            }
        }
        let freq = f64::from(mismatches) / f64::from(non_zero);
        let sigma = (epsilon * (1.0 - epsilon) / f64::from(non_zero)).sqrt();
        assert!(
            (freq - epsilon).abs() < 3.0 * sigma,
            "conditional mismatch rate {freq}"
        );
    }
}
