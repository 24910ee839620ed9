//! Prover and attacker behaviors driving the round machines.
//!
//! A strategy is queried in two phases. The commit phase fires when the
//! quantum signal reaches the strategy's position; in commit mode the
//! attackers have already intercepted their local classical input by then
//! (each sits between a verifier and the prover location), while the honest
//! prover's decision uses only his laboratory pipeline. The answer phase
//! fires once the classical inputs have arrived and, for the attacker pair,
//! one round of mutual communication has completed, so both sides know
//! `(x, y)`.
//!
//! Causality is enforced structurally: each phase only exposes information
//! that is available at that point of the timetable, and honest code never
//! touches the attacker-only fields. Emitting a message with a negative
//! delay makes the round machine fail with a causality error.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::devices::{prover_lab_pipeline, sample_loss, DeviceParams, PipelineOutcome};
use crate::protocol::{
    keyed_pair_predicate, Answer, BitString, Mode, ProtocolConfig, QuantumRound,
};

/// Commit-phase view. `x_intercepted`/`y_intercepted` are the classical
/// strings as seen by the V0-side and V1-side attacker respectively;
/// neither side knows the other's string yet. `committed_so_far` and
/// `round_index` summarize the history available to adaptive strategies.
pub struct CommitContext<'a> {
    pub round_index: usize,
    pub committed_so_far: usize,
    pub x_intercepted: &'a BitString,
    pub y_intercepted: &'a BitString,
    pub cfg: &'a ProtocolConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommitDecision {
    pub commit_v0: bool,
    pub commit_v1: bool,
    /// Extra emission delay relative to the timetable (negative values are
    /// causality violations).
    pub delay: f64,
}

impl CommitDecision {
    fn both(commit: bool) -> Self {
        Self {
            commit_v0: commit,
            commit_v1: commit,
            delay: 0.0,
        }
    }
}

/// Answer-phase view: both classical inputs and the basis `f(x, y)`.
pub struct AnswerContext<'a> {
    pub round_index: usize,
    pub committed_so_far: usize,
    pub x: &'a BitString,
    pub y: &'a BitString,
    pub basis: u32,
    pub cfg: &'a ProtocolConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnswerDecision {
    pub answer_v0: Answer,
    pub answer_v1: Answer,
    pub delay: f64,
}

impl AnswerDecision {
    fn broadcast(answer: Answer) -> Self {
        Self {
            answer_v0: answer,
            answer_v1: answer,
            delay: 0.0,
        }
    }
}

/// Honest prover: presence detection through the laboratory pipeline,
/// measurement in the basis `f(x, y)` with classical teleportation
/// correction, and an answer-flip error rate.
#[derive(Debug, Clone)]
pub struct HonestProver {
    pub dev: DeviceParams,
    pub p_err: f64,
    /// Extra processing delay before the answer broadcast. Values beyond
    /// the timing tolerance abort the round; negative values violate
    /// causality and fail the round machine.
    pub answer_delay: f64,
    pending: Option<PipelineOutcome>,
}

impl HonestProver {
    pub fn new(dev: DeviceParams, p_err: f64) -> Self {
        Self {
            dev,
            p_err,
            answer_delay: 0.0,
            pending: None,
        }
    }

    pub fn with_answer_delay(dev: DeviceParams, p_err: f64, answer_delay: f64) -> Self {
        Self {
            dev,
            p_err,
            answer_delay,
            pending: None,
        }
    }

    fn commit(&mut self, rng: &mut impl Rng) -> CommitDecision {
        let input_arrived = sample_loss(self.dev.eta_v, rng);
        let outcome = prover_lab_pipeline(&self.dev, input_arrived, rng);
        let commit = outcome.commit;
        self.pending = Some(outcome);
        CommitDecision::both(commit)
    }

    fn answer(
        &mut self,
        ctx: &AnswerContext,
        qround: &mut QuantumRound,
        rng: &mut impl Rng,
    ) -> AnswerDecision {
        let answer = match ctx.cfg.mode {
            Mode::Plain => {
                // No presence detection: the photon must survive the channel
                // and the measurement chain.
                if sample_loss(self.dev.eta_v, rng) && sample_loss(self.dev.eta_meas(), rng) {
                    Answer::Bit(self.measured_bit(ctx, None, qround, rng))
                } else {
                    Answer::Loss
                }
            }
            Mode::Commit => {
                let outcome = self.pending.take().expect("commit phase ran first");
                if !outcome.photon_available {
                    Answer::Loss
                } else if outcome.measured_real {
                    Answer::Bit(self.measured_bit(ctx, outcome.correction, qround, rng))
                } else {
                    // Dark-count click: an uncorrelated bit.
                    Answer::Bit(u8::from(rng.gen::<bool>()))
                }
            }
        };
        AnswerDecision {
            delay: self.answer_delay,
            ..AnswerDecision::broadcast(answer)
        }
    }

    fn measured_bit(
        &self,
        ctx: &AnswerContext,
        correction: Option<crate::devices::PauliCorrection>,
        qround: &mut QuantumRound,
        rng: &mut impl Rng,
    ) -> u8 {
        // For the two conjugate bases the teleportation correction is a
        // predictable outcome flip, applied classically after measuring. For
        // more bases the correction is applied actively before measurement,
        // which leaves the pair in its reference state; nothing to track.
        let mut bit = if let (Some(c), 2) = (correction, ctx.cfg.m) {
            qround.apply_prover_pauli(c);
            let raw = qround.measure_prover(ctx.basis, rng).expect("valid basis");
            raw ^ u8::from(c.flips_outcome(ctx.basis))
        } else {
            qround.measure_prover(ctx.basis, rng).expect("valid basis")
        };
        if sample_loss(self.p_err, rng) {
            bit ^= 1;
        }
        bit
    }
}

/// Lossy basis-guess attack: measure immediately in a uniformly guessed
/// basis, answer only when the guess turns out to match `f(x, y)`.
#[derive(Debug, Clone)]
pub struct BasisGuessAttacker {
    /// Rate of non-(0,0) commitments, chosen to mimic the honest commit
    /// rate (commit mode only).
    pub commit_rate: f64,
    pending: Option<(u32, u8)>,
}

impl BasisGuessAttacker {
    pub fn new(commit_rate: f64) -> Self {
        Self {
            commit_rate,
            pending: None,
        }
    }

    fn guess_and_measure(
        &mut self,
        m: u32,
        qround: &mut QuantumRound,
        rng: &mut impl Rng,
    ) -> (u32, u8) {
        let guess = rng.gen_range(0..m);
        let bit = qround.measure_prover(guess, rng).expect("valid basis");
        (guess, bit)
    }

    fn commit(
        &mut self,
        ctx: &CommitContext,
        qround: &mut QuantumRound,
        rng: &mut impl Rng,
    ) -> CommitDecision {
        let commit = sample_loss(self.commit_rate, rng);
        self.pending = commit.then(|| self.guess_and_measure(ctx.cfg.m, qround, rng));
        CommitDecision::both(commit)
    }

    fn answer(
        &mut self,
        ctx: &AnswerContext,
        qround: &mut QuantumRound,
        rng: &mut impl Rng,
    ) -> AnswerDecision {
        let (guess, bit) = match self.pending.take() {
            Some(p) => p,
            // Plain mode: the guess happens at interception time, before the
            // remote input is known; it uses no classical information.
            None => self.guess_and_measure(ctx.cfg.m, qround, rng),
        };
        if guess == ctx.basis {
            AnswerDecision::broadcast(Answer::Bit(bit))
        } else {
            AnswerDecision::broadcast(Answer::Loss)
        }
    }
}

/// Parameters of the commit-mismatch attacker family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MismatchAttackSpec {
    /// Conditional probability of differing commits on misbehaving pairs,
    /// given a non-(0,0) round.
    pub epsilon: f64,
    /// Expected fraction of input pairs on which the attackers misbehave
    /// (the complement of the well-behaved set); 1.0 means everywhere.
    pub bad_fraction: f64,
    /// Key of the misbehaving-subset predicate.
    pub bad_set_seed: u64,
    /// Rate of non-(0,0) rounds, mimicking the honest commit rate.
    pub p_commit_mimic: f64,
    /// Probability of answering (vs `⊥`) on committed rounds, mimicking the
    /// prover-lab transmission.
    pub p_respond: f64,
    /// Probability the answer is correct, given that one is sent.
    pub p_answer: f64,
}

impl MismatchAttackSpec {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("bad_fraction", self.bad_fraction),
            ("p_commit_mimic", self.p_commit_mimic),
            ("p_respond", self.p_respond),
            ("p_answer", self.p_answer),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} = {v} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Attacker pair that risks differing commitments on a keyed subset of
/// input pairs.
#[derive(Debug, Clone)]
pub struct MismatchAttacker {
    pub spec: MismatchAttackSpec,
}

impl MismatchAttacker {
    pub fn new(spec: MismatchAttackSpec) -> Self {
        Self { spec }
    }

    fn commit_with_epsilon(
        spec: &MismatchAttackSpec,
        epsilon: f64,
        ctx: &CommitContext,
        rng: &mut impl Rng,
    ) -> CommitDecision {
        if !sample_loss(spec.p_commit_mimic, rng) {
            return CommitDecision::both(false);
        }
        let misbehaves = spec.bad_fraction >= 1.0
            || keyed_pair_predicate(
                spec.bad_set_seed,
                ctx.x_intercepted,
                ctx.y_intercepted,
                spec.bad_fraction,
            );
        if misbehaves && sample_loss(epsilon, rng) {
            if rng.gen::<bool>() {
                CommitDecision {
                    commit_v0: true,
                    commit_v1: false,
                    delay: 0.0,
                }
            } else {
                CommitDecision {
                    commit_v0: false,
                    commit_v1: true,
                    delay: 0.0,
                }
            }
        } else {
            CommitDecision::both(true)
        }
    }

    fn answer_policy(
        spec: &MismatchAttackSpec,
        ctx: &AnswerContext,
        qround: &mut QuantumRound,
        rng: &mut impl Rng,
    ) -> AnswerDecision {
        if !sample_loss(spec.p_respond, rng) {
            return AnswerDecision::broadcast(Answer::Loss);
        }
        // After the communication round both attackers know f(x, y); they
        // measure in the right basis and degrade correctness on purpose.
        let mut bit = qround.measure_prover(ctx.basis, rng).expect("valid basis");
        if !sample_loss(spec.p_answer, rng) {
            bit ^= 1;
        }
        AnswerDecision::broadcast(Answer::Bit(bit))
    }
}

/// Round-indexed mismatch schedule for adaptive attackers. The index is the
/// number of non-(0,0) rounds survived so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonSchedule {
    Constant(f64),
    /// `epsilon` for the first `rounds` committed rounds, zero afterwards.
    FrontLoaded {
        epsilon: f64,
        rounds: usize,
    },
    /// Explicit per-round values; zero beyond the end.
    Sequence(Vec<f64>),
}

impl EpsilonSchedule {
    pub fn epsilon(&self, committed_index: usize) -> f64 {
        match self {
            EpsilonSchedule::Constant(e) => *e,
            EpsilonSchedule::FrontLoaded { epsilon, rounds } => {
                if committed_index < *rounds {
                    *epsilon
                } else {
                    0.0
                }
            }
            EpsilonSchedule::Sequence(seq) => seq.get(committed_index).copied().unwrap_or(0.0),
        }
    }
}

/// Mismatch attacker whose per-round mismatch probability follows a
/// schedule over the committed-round index.
#[derive(Debug, Clone)]
pub struct AdaptiveMismatchAttacker {
    pub spec: MismatchAttackSpec,
    pub schedule: EpsilonSchedule,
}

impl AdaptiveMismatchAttacker {
    pub fn new(spec: MismatchAttackSpec, schedule: EpsilonSchedule) -> Self {
        Self { spec, schedule }
    }
}

/// The implemented strategy families.
pub enum Strategy {
    Honest(HonestProver),
    BasisGuess(BasisGuessAttacker),
    Mismatch(MismatchAttacker),
    AdaptiveMismatch(AdaptiveMismatchAttacker),
}

impl Strategy {
    pub fn honest(dev: DeviceParams, p_err: f64) -> Self {
        Strategy::Honest(HonestProver::new(dev, p_err))
    }

    pub fn honest_with_delay(dev: DeviceParams, p_err: f64, answer_delay: f64) -> Self {
        Strategy::Honest(HonestProver::with_answer_delay(dev, p_err, answer_delay))
    }

    pub fn basis_guess(commit_rate: f64) -> Self {
        Strategy::BasisGuess(BasisGuessAttacker::new(commit_rate))
    }

    pub fn mismatch(spec: MismatchAttackSpec) -> Self {
        Strategy::Mismatch(MismatchAttacker::new(spec))
    }

    pub fn adaptive_mismatch(spec: MismatchAttackSpec, schedule: EpsilonSchedule) -> Self {
        Strategy::AdaptiveMismatch(AdaptiveMismatchAttacker::new(spec, schedule))
    }

    pub fn commit_decision(
        &mut self,
        ctx: &CommitContext,
        qround: &mut QuantumRound,
        rng: &mut impl Rng,
    ) -> CommitDecision {
        match self {
            Strategy::Honest(s) => s.commit(rng),
            Strategy::BasisGuess(s) => s.commit(ctx, qround, rng),
            Strategy::Mismatch(s) => {
                MismatchAttacker::commit_with_epsilon(&s.spec, s.spec.epsilon, ctx, rng)
            }
            Strategy::AdaptiveMismatch(s) => {
                let eps = s.schedule.epsilon(ctx.committed_so_far);
                MismatchAttacker::commit_with_epsilon(&s.spec, eps, ctx, rng)
            }
        }
    }

    pub fn answer_decision(
        &mut self,
        ctx: &AnswerContext,
        qround: &mut QuantumRound,
        rng: &mut impl Rng,
    ) -> AnswerDecision {
        match self {
            Strategy::Honest(s) => s.answer(ctx, qround, rng),
            Strategy::BasisGuess(s) => s.answer(ctx, qround, rng),
            Strategy::Mismatch(s) => MismatchAttacker::answer_policy(&s.spec, ctx, qround, rng),
            Strategy::AdaptiveMismatch(s) => {
                MismatchAttacker::answer_policy(&s.spec, ctx, qround, rng)
            }
        }
    }
}
