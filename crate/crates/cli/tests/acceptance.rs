//! Acceptance criterion 11: a seeded experiment re-run serially and with
//! eight workers yields identical summary statistics and transcripts.

use std::path::Path;

use qpv_cli::{run, ExperimentConfig};

fn load_example(name: &str) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    ExperimentConfig::load(&path).expect("example config loads")
}

#[test]
fn criterion_11_seeded_runs_are_worker_count_independent() {
    let mut cfg = load_example("honest_commit.json");
    cfg.trials = 200;
    cfg.run.committed_target = 300;

    let serial = run::simulate(&cfg, 1).unwrap();
    let parallel = run::simulate(&cfg, 8).unwrap();

    let serial_json = serde_json::to_string_pretty(&serial.summary).unwrap();
    let parallel_json = serde_json::to_string_pretty(&parallel.summary).unwrap();
    let summaries_match = serial_json == parallel_json;
    let transcripts_match = serial.transcript_csv == parallel.transcript_csv;

    // Re-running with the same seed must also be byte-identical.
    let rerun = run::simulate(&cfg, 8).unwrap();
    let rerun_json = serde_json::to_string_pretty(&rerun.summary).unwrap();
    let reruns_match = rerun_json == parallel_json;

    let pass = summaries_match && transcripts_match && reruns_match;
    let status = if pass { "PASS" } else { "FAIL" };
    println!(
        "{status} criterion 11: determinism — serial vs 8 workers summaries match: {summaries_match}, transcripts match: {transcripts_match}, rerun identical: {reruns_match}"
    );
    assert!(pass);
    assert!(
        serial.summary.accepted > 0,
        "honest runs should mostly accept"
    );
}
