//! Detection statistics for adaptive (round-indexed) mismatch schedules.

use rayon::prelude::*;

use qpv_core::protocol::{
    run_sequential, Geometry, Mode, ProtocolConfig, RunOptions, RunOutcome, Verdict,
};
use qpv_core::rng;
use qpv_core::strategies::{EpsilonSchedule, MismatchAttackSpec, Strategy};

fn commit_cfg() -> ProtocolConfig {
    ProtocolConfig {
        n: 8,
        m: 2,
        f_seed: 77,
        delay: 0.1,
        geometry: Geometry::symmetric(),
        mode: Mode::Commit,
    }
}

fn spec() -> MismatchAttackSpec {
    MismatchAttackSpec {
        epsilon: 0.0, // overridden by the schedule
        bad_fraction: 1.0,
        bad_set_seed: 2,
        p_commit_mimic: 1.0,
        p_respond: 1.0,
        p_answer: 1.0,
    }
}

fn detection_frequency(schedule: EpsilonSchedule, target: u64, trials: u64, seed: u64) -> f64 {
    let cfg = commit_cfg();
    let detected = (0..trials)
        .into_par_iter()
        .filter(|&trial| {
            let mut rng = rng::child(seed, trial);
            let mut strategy = Strategy::adaptive_mismatch(spec(), schedule.clone());
            let opts = RunOptions::new(target, target * 100);
            let t = run_sequential(&cfg, &mut strategy, &opts, &mut rng).unwrap();
            matches!(
                t.outcome,
                RunOutcome::Aborted {
                    verdict: Verdict::AbortMismatchCommit,
                    ..
                }
            )
        })
        .count();
    detected as f64 / trials as f64
}

#[test]
fn zero_schedule_is_never_detected() {
    let freq = detection_frequency(EpsilonSchedule::Constant(0.0), 200, 200, 90);
    assert_eq!(freq, 0.0);
}

#[test]
fn front_loaded_schedule_matches_product_formula() {
    // ε = α on the first r/2 committed rounds, zero afterwards: detection
    // probability 1 − (1−α)^{r/2}.
    let alpha = 0.05;
    let r = 100u64;
    let trials = 4000u64;
    let schedule = EpsilonSchedule::FrontLoaded {
        epsilon: alpha,
        rounds: (r / 2) as usize,
    };
    let freq = detection_frequency(schedule, r, trials, 91);
    let expected = 1.0 - (1.0 - alpha).powi((r / 2) as i32);
    let sigma = (expected * (1.0 - expected) / trials as f64).sqrt();
    assert!(
        (freq - expected).abs() <= 3.5 * sigma,
        "detection {freq} vs {expected} (3.5σ = {})",
        3.5 * sigma
    );
}

#[test]
fn undetected_runs_respect_the_mismatch_budget() {
    // With Σ εᵢ = ln(1/δ) spread evenly over r rounds the undetected
    // probability is Π(1−εᵢ) ≤ e^{−Σεᵢ} = δ, and approaches δ from below
    // as r grows (the gap is O(Σε²)). Both sides are checked.
    let delta = 0.3f64;
    let r = 200u64;
    let trials = 4000u64;
    let eps = (1.0 / delta).ln() / r as f64;
    let schedule = EpsilonSchedule::Sequence(vec![eps; r as usize]);
    let undetected = 1.0 - detection_frequency(schedule, r, trials, 92);

    let exact = (1.0 - eps).powi(r as i32);
    assert!(exact <= delta, "product form must sit below the budget");
    assert!(delta - exact < 0.005, "and approach it at this r");

    let sigma = (delta * (1.0 - delta) / trials as f64).sqrt();
    assert!(
        undetected <= delta + 3.0 * sigma,
        "undetected {undetected} above budget δ = {delta}"
    );
    assert!(
        (undetected - delta).abs() <= 0.005 + 3.0 * sigma,
        "undetected {undetected} inconsistent with budget δ = {delta}"
    );
}
