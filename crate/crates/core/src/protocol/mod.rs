//! Geometry/timing model and round state machines for the plain and
//! committing protocol variants, plus the keyed basis function `f`.

mod round;
mod sequential;
mod timing;

pub use round::{run_round_commit, run_round_plain, QuantumRound};
pub use sequential::{run_sequential, RunOptions, RunOutcome, Transcript, VerdictCounts};
pub use timing::{schedule_round, Timetable};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ProtocolError {
    #[error("input strings have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least one classical input bit")]
    EmptyInput,
    #[error("need at least two bases, got {m}")]
    TooFewBases { m: u32 },
    #[error("positions must satisfy v0 < p < v1 (got {v0}, {p}, {v1})")]
    BadGeometry { v0: f64, p: f64, v1: f64 },
    #[error("quantum speed fraction {fraction} outside (0, 1]")]
    BadQuantumSpeed { fraction: f64 },
    #[error("timing tolerance must be non-negative, got {tolerance}")]
    BadTolerance { tolerance: f64 },
    #[error("commit mode requires a positive delay, got {delay}")]
    NonPositiveDelay { delay: f64 },
    #[error("strategy emitted a message {lead:.3e} before its enabling input was available")]
    Causality { lead: f64 },
    #[error("round budget must be positive")]
    EmptyBudget,
    #[error(transparent)]
    Quantum(#[from] crate::qcore::QcoreError),
}

/// A packed little-endian bit string of fixed length.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitString {
    bytes: Vec<u8>,
    n_bits: usize,
}

impl BitString {
    pub fn zeros(n_bits: usize) -> Self {
        Self {
            bytes: vec![0; n_bits.div_ceil(8)],
            n_bits,
        }
    }

    pub fn random(n_bits: usize, rng: &mut impl rand::Rng) -> Self {
        let mut bytes = vec![0u8; n_bits.div_ceil(8)];
        rng.fill_bytes(&mut bytes);
        let tail = n_bits % 8;
        if tail != 0 {
            *bytes.last_mut().expect("non-empty for n_bits > 0") &= (1 << tail) - 1;
        }
        Self { bytes, n_bits }
    }

    /// Builds from the low bits of `value` (for exhaustive small-n sweeps).
    pub fn from_value(value: u64, n_bits: usize) -> Self {
        let mut s = Self::zeros(n_bits);
        for i in 0..n_bits.min(64) {
            if value >> i & 1 == 1 {
                s.set_bit(i, true);
            }
        }
        s
    }

    pub fn len(&self) -> usize {
        self.n_bits
    }

    pub fn is_empty(&self) -> bool {
        self.n_bits == 0
    }

    pub fn bit(&self, index: usize) -> bool {
        self.bytes[index / 8] >> (index % 8) & 1 == 1
    }

    pub fn set_bit(&mut self, index: usize, value: bool) {
        let mask = 1u8 << (index % 8);
        if value {
            self.bytes[index / 8] |= mask;
        } else {
            self.bytes[index / 8] &= !mask;
        }
    }

    pub fn flip_bit(&mut self, index: usize) {
        self.bytes[index / 8] ^= 1 << (index % 8);
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn to_hex(&self) -> String {
        let mut out = String::with_capacity(self.bytes.len() * 2);
        for b in self.bytes.iter().rev() {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }
}

/// Keyed pseudorandom basis function `f(x, y) ∈ {0, …, m−1}`.
///
/// A seeded cryptographic mixer stands in for the uniformly random function:
/// evaluation is O(n) and needs no 2^{2n} table, while flipping any input
/// bit decorrelates the output.
pub fn eval_f(seed: u64, x: &BitString, y: &BitString, m: u32) -> Result<u32, ProtocolError> {
    if x.len() != y.len() {
        return Err(ProtocolError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if m < 2 {
        return Err(ProtocolError::TooFewBases { m });
    }
    let mut hasher = Sha256::new();
    hasher.update(b"qpv-basis-fn");
    hasher.update(seed.to_le_bytes());
    hasher.update((x.len() as u64).to_le_bytes());
    hasher.update(x.as_bytes());
    hasher.update(y.as_bytes());
    let digest = hasher.finalize();
    let word = u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"));
    Ok((word % u64::from(m)) as u32)
}

/// Keyed predicate over input pairs hitting an expected fraction of
/// `{0,1}^n × {0,1}^n`; used by attackers to pick the misbehaving subset.
pub fn keyed_pair_predicate(seed: u64, x: &BitString, y: &BitString, fraction: f64) -> bool {
    let mut hasher = Sha256::new();
    hasher.update(b"qpv-pair-subset");
    hasher.update(seed.to_le_bytes());
    hasher.update((x.len() as u64).to_le_bytes());
    hasher.update(x.as_bytes());
    hasher.update(y.as_bytes());
    let digest = hasher.finalize();
    let word = u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"));
    (word as f64) < fraction * (u64::MAX as f64)
}

/// Positions on a line, in km, with light speed fixed at one unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub v0_km: f64,
    pub p_km: f64,
    pub v1_km: f64,
    /// Quantum signal speed as a fraction of light speed, in (0, 1].
    pub quantum_speed_fraction: f64,
    /// Maximum deviation from the expected arrival times.
    pub timing_tolerance: f64,
}

impl Geometry {
    /// Symmetric kilometer-scale layout used by most examples.
    pub fn symmetric() -> Self {
        Self {
            v0_km: 0.0,
            p_km: 1.0,
            v1_km: 2.0,
            quantum_speed_fraction: 1.0,
            timing_tolerance: 1e-9,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if !(self.v0_km < self.p_km && self.p_km < self.v1_km) {
            return Err(ProtocolError::BadGeometry {
                v0: self.v0_km,
                p: self.p_km,
                v1: self.v1_km,
            });
        }
        if !(self.quantum_speed_fraction > 0.0 && self.quantum_speed_fraction <= 1.0) {
            return Err(ProtocolError::BadQuantumSpeed {
                fraction: self.quantum_speed_fraction,
            });
        }
        if self.timing_tolerance < 0.0 {
            return Err(ProtocolError::BadTolerance {
                tolerance: self.timing_tolerance,
            });
        }
        Ok(())
    }

    pub fn dist_v0(&self) -> f64 {
        self.p_km - self.v0_km
    }

    pub fn dist_v1(&self) -> f64 {
        self.v1_km - self.p_km
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Plain,
    Commit,
}

/// Static parameters of one protocol instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Classical input bits per side.
    pub n: usize,
    /// Number of measurement bases.
    pub m: u32,
    /// Key of the basis function.
    pub f_seed: u64,
    /// Time between quantum and classical arrival at the prover
    /// (commit mode only).
    pub delay: f64,
    pub geometry: Geometry,
    pub mode: Mode,
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.n == 0 {
            return Err(ProtocolError::EmptyInput);
        }
        if self.m < 2 {
            return Err(ProtocolError::TooFewBases { m: self.m });
        }
        if self.mode == Mode::Commit && self.delay <= 0.0 {
            return Err(ProtocolError::NonPositiveDelay { delay: self.delay });
        }
        self.geometry.validate()
    }

    pub fn basis(&self, x: &BitString, y: &BitString) -> Result<u32, ProtocolError> {
        eval_f(self.f_seed, x, y, self.m)
    }
}

/// Answer sent back to a verifier: a measurement bit or `⊥` (photon loss).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Answer {
    Bit(u8),
    Loss,
}

impl std::fmt::Display for Answer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Answer::Bit(b) => write!(f, "{b}"),
            Answer::Loss => write!(f, "⊥"),
        }
    }
}

/// Per-round outcome class.
///
/// `Incorrect` covers a consistent, timely answer that disagrees with the
/// verifier's reference outcome; it feeds the score rather than aborting
/// the run. The mismatch verdicts compare what the two verifiers received.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Incorrect,
    Loss,
    AbortTiming,
    AbortMismatchAnswer,
    AbortMismatchCommit,
    DiscardedNoCommit,
}

impl Verdict {
    pub const ALL: [Verdict; 7] = [
        Verdict::Accept,
        Verdict::Incorrect,
        Verdict::Loss,
        Verdict::AbortTiming,
        Verdict::AbortMismatchAnswer,
        Verdict::AbortMismatchCommit,
        Verdict::DiscardedNoCommit,
    ];

    pub fn index(self) -> usize {
        match self {
            Verdict::Accept => 0,
            Verdict::Incorrect => 1,
            Verdict::Loss => 2,
            Verdict::AbortTiming => 3,
            Verdict::AbortMismatchAnswer => 4,
            Verdict::AbortMismatchCommit => 5,
            Verdict::DiscardedNoCommit => 6,
        }
    }

    pub fn is_abort(self) -> bool {
        matches!(
            self,
            Verdict::AbortTiming | Verdict::AbortMismatchAnswer | Verdict::AbortMismatchCommit
        )
    }

    /// Rounds that count towards the committed-round budget and the score.
    pub fn is_scored(self) -> bool {
        matches!(self, Verdict::Accept | Verdict::Incorrect | Verdict::Loss)
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Accept => "accept",
            Verdict::Incorrect => "incorrect",
            Verdict::Loss => "loss",
            Verdict::AbortTiming => "abort_timing",
            Verdict::AbortMismatchAnswer => "abort_mismatch_answer",
            Verdict::AbortMismatchCommit => "abort_mismatch_commit",
            Verdict::DiscardedNoCommit => "discarded_no_commit",
        }
    }
}

/// Message arrival times of one round (same clock as the timetable).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundTimes {
    pub q_arrival: f64,
    pub classical_arrival: f64,
    pub commit_v0: f64,
    pub commit_v1: f64,
    pub answer_v0: f64,
    pub answer_v1: f64,
}

/// Everything the verifiers record about one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round_index: usize,
    pub x: BitString,
    pub y: BitString,
    pub commit_a: bool,
    pub commit_b: bool,
    /// Answer as received by V0 (V1's copy equals it unless the verdict is
    /// an answer mismatch).
    pub answer: Answer,
    /// The verifier's reference measurement outcome; meaningful only on
    /// scored rounds.
    pub verifier_outcome: u8,
    pub times: RoundTimes,
    pub verdict: Verdict,
}
