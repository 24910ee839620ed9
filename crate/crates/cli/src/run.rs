//! Execution of the five subcommands against a loaded configuration.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use qpv_core::estimate::{
    eta_p_closed_form, fiber_length, p_commit_closed_form, protocol_duration, snr_qnd,
};
use qpv_core::protocol::{
    run_round_plain, run_sequential, Mode, RunOptions, RunOutcome, Transcript, Verdict,
    VerdictCounts,
};
use qpv_core::qcore::verify::{
    gentle_measurement_sweep, instrument_decomposition_sweep, paths_between_strings_sweep,
    stinespring_recovery_sweep, SuiteReport,
};
use qpv_core::rng;
use qpv_core::strategies::Strategy;
use qpv_core::verdict::{
    attacker_score_ceiling, chernoff_accept_floor, decide, detection_probability_nonadaptive,
    round_budget, table1_bounds, wilson_interval, Bound, Decision, DetectionBound, RejectReason,
    RoundBudget, SecureRegion, SecurityModel, Table1Bounds,
};

use crate::config::{ExperimentConfig, StrategyConfig, SweepConfig};
use crate::RunError;

/// Runs a closure on a rayon pool with the requested worker count
/// (0 = library default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    pool.install(f)
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub config_hash: String,
    pub master_seed: u64,
    pub trials: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub inconclusive_trials: u64,
    pub accept_frequency: f64,
    pub accept_wilson_3sigma: [f64; 2],
    pub reject_reasons: BTreeMap<String, u64>,
    pub verdict_totals: BTreeMap<String, u64>,
    pub committed_rounds_total: u64,
    pub total_rounds: u64,
}

pub struct SimulateOutput {
    pub summary: SimulateSummary,
    /// Transcript CSV (header plus one row per exported round).
    pub transcript_csv: String,
}

struct TrialOutput {
    decision: Decision,
    counts: VerdictCounts,
    committed: u64,
    total: u64,
    csv: Option<String>,
}

fn reason_name(reason: RejectReason) -> &'static str {
    match reason {
        RejectReason::MismatchCommit => "mismatch_commit",
        RejectReason::MismatchAnswer => "mismatch_answer",
        RejectReason::Timing => "timing",
        RejectReason::Inconclusive => "inconclusive",
        RejectReason::ScoreBelowThreshold => "score_below_threshold",
        RejectReason::LossRateInconsistent => "loss_rate_inconsistent",
    }
}

fn run_trial(
    cfg: &ExperimentConfig,
    region: Option<&SecureRegion>,
    trial: u64,
) -> Result<TrialOutput, RunError> {
    let mut rng = rng::child(cfg.master_seed, trial);
    let mut strategy = cfg.build_strategy();
    let keep = trial < cfg.transcript_trials;

    let transcript = match cfg.protocol.mode {
        Mode::Commit => {
            let opts = RunOptions {
                committed_target: cfg.run.committed_target,
                max_rounds: cfg.run.max_rounds,
                keep_records: keep,
            };
            run_sequential(&cfg.protocol, &mut strategy, &opts, &mut rng)?
        }
        Mode::Plain => {
            let mut counts = VerdictCounts::default();
            let mut records = Vec::new();
            for index in 0..cfg.run.committed_target {
                let record =
                    run_round_plain(&cfg.protocol, &mut strategy, index as usize, &mut rng)?;
                counts.add(record.verdict);
                if keep {
                    records.push(record);
                }
            }
            let committed_rounds = counts.scored();
            Transcript {
                records,
                counts,
                committed_rounds,
                total_rounds: cfg.run.committed_target,
                outcome: RunOutcome::CompletedBudget,
            }
        }
    };

    let decision = decide(&transcript, &cfg.bounds, region, cfg.rate_sigma)?;
    let csv = keep.then(|| {
        let mut buf = Vec::new();
        transcript
            .write_csv(trial, &mut buf)
            .expect("write to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    });
    Ok(TrialOutput {
        decision,
        counts: transcript.counts,
        committed: transcript.committed_rounds,
        total: transcript.total_rounds,
        csv,
    })
}

pub fn simulate(cfg: &ExperimentConfig, workers: usize) -> Result<SimulateOutput, RunError> {
    let region = cfg.build_region()?;
    let trials: Vec<TrialOutput> = with_workers(workers, || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|trial| run_trial(cfg, region.as_ref(), trial))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut summary = SimulateSummary {
        config_hash: cfg.hash(),
        master_seed: cfg.master_seed,
        trials: cfg.trials,
        accepted: 0,
        rejected: 0,
        inconclusive_trials: 0,
        accept_frequency: 0.0,
        accept_wilson_3sigma: [0.0, 1.0],
        reject_reasons: BTreeMap::new(),
        verdict_totals: Verdict::ALL
            .iter()
            .map(|v| (v.name().to_string(), 0))
            .collect(),
        committed_rounds_total: 0,
        total_rounds: 0,
    };
    let mut transcript_csv = String::new();
    transcript_csv.push_str(Transcript::CSV_HEADER);
    transcript_csv.push('\n');

    for trial in &trials {
        match trial.decision {
            Decision::Accept => summary.accepted += 1,
            Decision::Reject(reason) => {
                summary.rejected += 1;
                *summary
                    .reject_reasons
                    .entry(reason_name(reason).to_string())
                    .or_insert(0) += 1;
                if reason == RejectReason::Inconclusive {
                    summary.inconclusive_trials += 1;
                }
            }
        }
        for (verdict, count) in trial.counts.iter() {
            *summary
                .verdict_totals
                .get_mut(verdict.name())
                .expect("all keys present") += count;
        }
        summary.committed_rounds_total += trial.committed;
        summary.total_rounds += trial.total;
        if let Some(csv) = &trial.csv {
            transcript_csv.push_str(csv);
        }
    }
    if cfg.trials > 0 {
        summary.accept_frequency = summary.accepted as f64 / cfg.trials as f64;
        let (lo, hi) = wilson_interval(summary.accepted, cfg.trials, 3.0);
        summary.accept_wilson_3sigma = [lo, hi];
    }
    Ok(SimulateOutput {
        summary,
        transcript_csv,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub config_hash: String,
    pub model: SecurityModel,
    pub k: u32,
    pub p_attack: f64,
    pub p_err: f64,
    pub eta_p: f64,
    pub delta_margin: f64,
    pub p_b: f64,
    pub mu: f64,
    pub committed_rounds: u64,
    pub budget: Option<RoundBudget>,
    pub expected_total_rounds: Option<f64>,
    pub duration_seconds: Option<f64>,
    pub table1: Table1Bounds,
    pub detection: Option<DetectionBound>,
    pub honest_floor: f64,
    pub attacker_ceiling: Bound,
}

pub fn bounds_report(cfg: &ExperimentConfig) -> Result<BoundsReport, RunError> {
    let params = &cfg.bounds;
    params.validate()?;
    let budget = match params.model {
        SecurityModel::S1 => None,
        model => Some(round_budget(params.k, model)?),
    };
    let committed_rounds = budget
        .as_ref()
        .map(|b| b.committed_rounds_target)
        .unwrap_or(cfg.run.committed_target);
    let p_commit = p_commit_closed_form(&cfg.devices.estimate_inputs());
    let expected_total_rounds = budget.as_ref().map(|b| b.expected_total_rounds(p_commit));
    let duration_seconds = match (&cfg.estimate, params.model) {
        (Some(est), SecurityModel::S2 | SecurityModel::S3) => Some(protocol_duration(
            params.k,
            p_commit,
            est.nu_hz,
            params.model,
        )?),
        _ => None,
    };
    let mu = params.mu();
    let honest_floor = if mu > 0.0 {
        chernoff_accept_floor(mu, params.delta_margin, committed_rounds, 1.0)?
    } else {
        0.0
    };
    Ok(BoundsReport {
        config_hash: cfg.hash(),
        model: params.model,
        k: params.k,
        p_attack: params.p_attack,
        p_err: params.p_err,
        eta_p: params.eta_p,
        delta_margin: params.delta_margin,
        p_b: params.p_b(),
        mu,
        committed_rounds,
        budget,
        expected_total_rounds,
        duration_seconds,
        table1: table1_bounds(params, committed_rounds)?,
        detection: budget
            .as_ref()
            .map(|b| detection_probability_nonadaptive(b.alpha, b.committed_rounds_target)),
        honest_floor,
        attacker_ceiling: attacker_score_ceiling(
            mu,
            params.delta_margin,
            committed_rounds,
            params.k,
            params.model,
        ),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaSuiteEntry {
    pub name: &'static str,
    pub instances: usize,
    pub violations: usize,
    pub worst_margin: f64,
    pub passed: bool,
}

impl LemmaSuiteEntry {
    fn from_report(name: &'static str, report: SuiteReport) -> Self {
        Self {
            name,
            instances: report.instances,
            violations: report.violations,
            worst_margin: report.worst_margin,
            passed: report.passed(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub config_hash: String,
    pub master_seed: u64,
    pub suites: Vec<LemmaSuiteEntry>,
    pub all_passed: bool,
}

pub fn verify_lemmas(cfg: &ExperimentConfig) -> LemmaReport {
    let counts = cfg.lemmas;
    let mut rng = rng::master(cfg.master_seed);
    let suites = vec![
        LemmaSuiteEntry::from_report(
            "gentle_measurement",
            gentle_measurement_sweep(counts.gentle_instances as usize, &mut rng),
        ),
        LemmaSuiteEntry::from_report(
            "instrument_decomposition",
            instrument_decomposition_sweep(counts.decomposition_instances as usize, &mut rng),
        ),
        LemmaSuiteEntry::from_report(
            "stinespring_recovery",
            stinespring_recovery_sweep(counts.dilation_instances as usize, &mut rng),
        ),
        LemmaSuiteEntry::from_report(
            "paths_between_strings",
            paths_between_strings_sweep(counts.paths_instances as usize, &mut rng),
        ),
    ];
    let all_passed = suites.iter().all(|s| s.passed);
    LemmaReport {
        config_hash: cfg.hash(),
        master_seed: cfg.master_seed,
        suites,
        all_passed,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub committed_target: u64,
    pub trials: u64,
    pub detected: u64,
    pub empirical: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub exact_bound: f64,
    pub exponential_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub config_hash: String,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "epsilon,committed_target,trials,detected,empirical,wilson_lo,wilson_hi,exact_bound,exponential_bound\n",
        );
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.6},{:.6},{:.6},{:.9},{:.9}\n",
                row.epsilon,
                row.committed_target,
                row.trials,
                row.detected,
                row.empirical,
                row.wilson_lo,
                row.wilson_hi,
                row.exact_bound,
                row.exponential_bound,
            ));
        }
        out
    }
}

/// Detection-rate sweep over mismatch probabilities, pairing the empirical
/// frequency with the analytic floors.
pub fn sweep(cfg: &ExperimentConfig, workers: usize) -> Result<SweepReport, RunError> {
    let sweep_cfg: &SweepConfig = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| RunError::Config("sweep section missing".into()))?;
    let base_spec = match &cfg.strategy {
        StrategyConfig::Mismatch(spec) => *spec,
        _ => {
            return Err(RunError::Config(
                "sweep requires a mismatch strategy".into(),
            ))
        }
    };
    if cfg.protocol.mode != Mode::Commit {
        return Err(RunError::Config("sweep requires commit mode".into()));
    }

    let mut rows = Vec::with_capacity(sweep_cfg.epsilon_values.len());
    for (case, &epsilon) in sweep_cfg.epsilon_values.iter().enumerate() {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(RunError::Config(format!(
                "sweep epsilon {epsilon} outside [0, 1]"
            )));
        }
        let committed_target = (sweep_cfg.r / epsilon).round().max(1.0) as u64;
        let spec = qpv_core::strategies::MismatchAttackSpec {
            epsilon,
            ..base_spec
        };
        let detected: u64 = with_workers(workers, || {
            (0..sweep_cfg.trials)
                .into_par_iter()
                .filter(|&trial| {
                    let mut rng = rng::child(cfg.master_seed.wrapping_add(case as u64), trial);
                    let mut strategy = Strategy::mismatch(spec);
                    let opts = RunOptions::new(committed_target, committed_target * 1000);
                    let t = run_sequential(&cfg.protocol, &mut strategy, &opts, &mut rng)
                        .expect("round machine");
                    matches!(
                        t.outcome,
                        RunOutcome::Aborted {
                            verdict: Verdict::AbortMismatchCommit,
                            ..
                        }
                    )
                })
                .count() as u64
        });
        let empirical = detected as f64 / sweep_cfg.trials as f64;
        let (wilson_lo, wilson_hi) = wilson_interval(detected, sweep_cfg.trials, 3.0);
        let bound = detection_probability_nonadaptive(epsilon, committed_target);
        rows.push(SweepRow {
            epsilon,
            committed_target,
            trials: sweep_cfg.trials,
            detected,
            empirical,
            wilson_lo,
            wilson_hi,
            exact_bound: bound.exact,
            exponential_bound: bound.exponential,
        });
    }
    Ok(SweepReport {
        config_hash: cfg.hash(),
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateRow {
    pub eta_v: f64,
    pub gamma_snr: f64,
    pub eta_meas: f64,
    pub snr: f64,
    pub eta_p: f64,
    pub p_commit: f64,
    pub fiber_length_km: Option<f64>,
    pub duration_seconds: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub config_hash: String,
    pub rows: Vec<EstimateRow>,
}

impl EstimateReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "eta_v,gamma_snr,eta_meas,snr,eta_p,p_commit,fiber_length_km,duration_seconds\n",
        );
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.9}")).unwrap_or_default();
        for row in &self.rows {
            out.push_str(&format!(
                "{},{:.6},{:.9},{:.9},{:.9},{:.9},{},{}\n",
                row.eta_v,
                row.gamma_snr,
                row.eta_meas,
                row.snr,
                row.eta_p,
                row.p_commit,
                opt(row.fiber_length_km),
                opt(row.duration_seconds),
            ));
        }
        out
    }
}

/// Parameter table over the configured input-transmission sweep.
pub fn estimate(cfg: &ExperimentConfig) -> Result<EstimateReport, RunError> {
    let section = cfg
        .estimate
        .as_ref()
        .ok_or_else(|| RunError::Config("estimate section missing".into()))?;
    let mut rows = Vec::with_capacity(section.eta_v_values.len());
    for &eta_v in &section.eta_v_values {
        let mut devices = cfg.devices;
        devices.eta_v = eta_v;
        devices
            .validate()
            .map_err(|e| RunError::Config(format!("estimate devices: {e}")))?;
        let inputs = devices.estimate_inputs();
        let gamma = inputs.gamma_snr();
        let p_commit = p_commit_closed_form(&inputs);
        let duration_seconds = match cfg.bounds.model {
            SecurityModel::S1 => None,
            model => Some(protocol_duration(
                cfg.bounds.k,
                p_commit,
                section.nu_hz,
                model,
            )?),
        };
        rows.push(EstimateRow {
            eta_v,
            gamma_snr: gamma,
            eta_meas: inputs.eta_meas(),
            snr: snr_qnd(gamma, inputs.eta_det_qnd),
            eta_p: eta_p_closed_form(&inputs)?,
            p_commit,
            fiber_length_km: fiber_length(section.alpha_fiber_db_per_km, gamma, inputs.p_dc_qnd)
                .ok(),
            duration_seconds,
        });
    }
    Ok(EstimateReport {
        config_hash: cfg.hash(),
        rows,
    })
}
