//! Sequential repetition of the committing protocol.

use std::io;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::strategies::Strategy;

use super::{run_round_commit, ProtocolConfig, ProtocolError, RoundRecord, Verdict};

/// Stop rule and bookkeeping options for a sequential run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Target number of committed (scored) rounds.
    pub committed_target: u64,
    /// Cap on total rounds before the run is declared inconclusive.
    pub max_rounds: u64,
    /// Keep per-round records (memory grows with the round count).
    pub keep_records: bool,
}

impl RunOptions {
    pub fn new(committed_target: u64, max_rounds: u64) -> Self {
        Self {
            committed_target,
            max_rounds,
            keep_records: false,
        }
    }
}

/// How a sequential run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunOutcome {
    /// The committed-round budget was reached without an abort.
    CompletedBudget,
    /// A round aborted the run (mismatching commits or answers, or timing).
    Aborted { verdict: Verdict, at_round: u64 },
    /// The round cap was exhausted before the budget: inconclusive.
    CapExceeded,
}

/// Tally of rounds per verdict class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VerdictCounts([u64; 7]);

impl VerdictCounts {
    pub fn add(&mut self, verdict: Verdict) {
        self.0[verdict.index()] += 1;
    }

    pub fn get(&self, verdict: Verdict) -> u64 {
        self.0[verdict.index()]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    /// Rounds counted towards the score: accepts, incorrects and losses.
    pub fn scored(&self) -> u64 {
        self.get(Verdict::Accept) + self.get(Verdict::Incorrect) + self.get(Verdict::Loss)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Verdict, u64)> + '_ {
        Verdict::ALL.iter().map(|&v| (v, self.get(v)))
    }
}

/// Result of one sequential run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    /// Per-round records; empty unless the run kept them.
    pub records: Vec<RoundRecord>,
    pub counts: VerdictCounts,
    pub committed_rounds: u64,
    pub total_rounds: u64,
    pub outcome: RunOutcome,
}

impl Transcript {
    /// Recomputes the verdict tally from the stored records.
    pub fn recount(&self) -> VerdictCounts {
        let mut counts = VerdictCounts::default();
        for rec in &self.records {
            counts.add(rec.verdict);
        }
        counts
    }

    /// Writes one CSV row per stored round. Columns:
    /// `trial_id,round_idx,x_hex,y_hex,c_A,c_B,answer,v,verdict,t_commit,t_answer`.
    pub fn write_csv<W: io::Write>(&self, trial_id: u64, out: &mut W) -> io::Result<()> {
        for rec in &self.records {
            writeln!(
                out,
                "{trial_id},{},{},{},{},{},{},{},{},{:.9},{:.9}",
                rec.round_index,
                rec.x.to_hex(),
                rec.y.to_hex(),
                u8::from(rec.commit_a),
                u8::from(rec.commit_b),
                rec.answer,
                rec.verifier_outcome,
                rec.verdict.name(),
                rec.times.commit_v0,
                rec.times.answer_v0,
            )?;
        }
        Ok(())
    }

    pub const CSV_HEADER: &'static str =
        "trial_id,round_idx,x_hex,y_hex,c_A,c_B,answer,v,verdict,t_commit,t_answer";
}

/// Runs the committing protocol until the committed-round budget is met,
/// an abort fires, or the round cap is exhausted.
pub fn run_sequential(
    cfg: &ProtocolConfig,
    strategy: &mut Strategy,
    opts: &RunOptions,
    rng: &mut impl Rng,
) -> Result<Transcript, ProtocolError> {
    if opts.committed_target == 0 {
        return Err(ProtocolError::EmptyBudget);
    }
    let mut records = Vec::new();
    let mut counts = VerdictCounts::default();
    let mut committed: u64 = 0;
    let mut total: u64 = 0;
    let outcome = loop {
        let record = run_round_commit(cfg, strategy, total as usize, committed as usize, rng)?;
        let verdict = record.verdict;
        counts.add(verdict);
        total += 1;
        if opts.keep_records {
            records.push(record);
        }
        if verdict.is_abort() {
            break RunOutcome::Aborted {
                verdict,
                at_round: total - 1,
            };
        }
        if verdict.is_scored() {
            committed += 1;
            if committed >= opts.committed_target {
                break RunOutcome::CompletedBudget;
            }
        }
        if total >= opts.max_rounds {
            break RunOutcome::CapExceeded;
        }
    };
    Ok(Transcript {
        records,
        counts,
        committed_rounds: committed,
        total_rounds: total,
        outcome,
    })
}
