//! Randomized verification suites for the quantum facts the security
//! argument relies on: measurement disturbance, instrument decomposition,
//! unitary dilation recovery, and closeness of post-commit states.
//!
//! Each suite draws its instances from an explicit random stream, so runs
//! are reproducible, and returns a report with the number of violations and
//! the worst observed margin. A small numerical slack ([`NUMERICAL_SLACK`])
//! absorbs double-precision noise in bounds that are saturated exactly.

use rand::Rng;

use super::linalg::{self, CMat};
use super::ops::{
    decompose_instrument, gentle_post_state, stinespring_dilate, trace_norm_distance,
};
use super::random::{random_density, random_effect, random_high_prob_effect, random_instrument};
use super::types::{DensityMatrix, MeasurementOperator};

/// Slack added to analytically exact inequalities before counting a
/// violation.
pub const NUMERICAL_SLACK: f64 = 1e-9;

/// Entrywise tolerance for reconstruction identities.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteReport {
    /// Number of randomized instances checked.
    pub instances: usize,
    /// Instances whose checked inequality or identity failed.
    pub violations: usize,
    /// Worst observed margin. For inequalities this is `lhs − rhs` (negative
    /// means slack remained); for identities, the largest deviation.
    pub worst_margin: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks that a measurement accepting a state with probability `1 − ε`
/// disturbs it by at most `2√ε` in trace norm.
///
/// Instances alternate between unconstrained random effects and effects
/// close to the identity (small ε), over dimensions 2–8. For each pair the
/// disturbance budget is taken as `ε = 1 − tr(Mρ)` exactly.
pub fn gentle_measurement_sweep(instances: usize, rng: &mut impl Rng) -> SuiteReport {
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut done = 0;
    while done < instances {
        let dim = 2 + done % 7;
        let rho = random_density(dim, rng);
        let effect = if done % 2 == 0 {
            random_effect(dim, rng)
        } else {
            random_high_prob_effect(dim, rng.gen_range(0.0..0.2), rng)
        };
        let prob = effect.probability_on(&rho);
        if prob < 1e-12 {
            continue;
        }
        let eps = (1.0 - prob).max(0.0);
        let (post, _) = gentle_post_state(&rho, &effect).expect("probability checked above");
        let dist = trace_norm_distance(&rho, &post).expect("equal dims");
        let margin = dist - 2.0 * eps.sqrt();
        worst = worst.max(margin);
        if margin > NUMERICAL_SLACK {
            violations += 1;
        }
        done += 1;
    }
    SuiteReport {
        instances,
        violations,
        worst_margin: worst,
    }
}

/// Checks the decomposition of an instrument branch into a POVM element
/// followed by a channel: `I_i(ρ) = E_i(√M_i ρ √M_i)` entrywise, with `E_i`
/// trace preserving.
pub fn instrument_decomposition_sweep(instances: usize, rng: &mut impl Rng) -> SuiteReport {
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let dim = 2 + i % 7;
        let kraus_per = 1 + i % 3;
        let instrument = random_instrument(dim, 2, kraus_per, rng);
        let mut bad = false;
        for outcome in 0..2 {
            let (effect, channel) = match decompose_instrument(&instrument, outcome) {
                Ok(pair) => pair,
                Err(_) => {
                    bad = true;
                    continue;
                }
            };
            let tp_dev = linalg::max_abs_diff(
                &channel
                    .kraus()
                    .iter()
                    .fold(CMat::zeros(dim, dim), |acc, k| acc + k.adjoint() * k),
                &linalg::identity(dim),
            );
            worst = worst.max(tp_dev);
            if tp_dev > RECONSTRUCTION_TOL {
                bad = true;
            }
            let root = linalg::sqrt_psd(effect.matrix());
            for _ in 0..3 {
                let rho = random_density(dim, rng);
                let direct = instrument.apply_raw(outcome, rho.matrix());
                let reconstructed = channel.apply_raw(&(&root * rho.matrix() * &root));
                let dev = linalg::max_abs_diff(&direct, &reconstructed);
                worst = worst.max(dev);
                if dev > RECONSTRUCTION_TOL {
                    bad = true;
                }
            }
        }
        if bad {
            violations += 1;
        }
    }
    SuiteReport {
        instances,
        violations,
        worst_margin: worst,
    }
}

/// Checks unitary dilation recovery end to end: the channel from a
/// decomposed instrument branch is dilated, and
/// `I_1(ρ) = Tr_E[U(√M ρ √M ⊗ |0⟩⟨0|)U†]` must hold entrywise.
pub fn stinespring_recovery_sweep(instances: usize, rng: &mut impl Rng) -> SuiteReport {
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let dim = 2 + i % 3;
        let instrument = random_instrument(dim, 2, 1 + i % 2, rng);
        let (effect, channel) = decompose_instrument(&instrument, 1).expect("valid instrument");
        let dilation = stinespring_dilate(&channel).expect("channel is trace preserving");
        let root = linalg::sqrt_psd(effect.matrix());
        let mut bad = false;
        for _ in 0..3 {
            let rho = random_density(dim, rng);
            let direct = instrument.apply_raw(1, rho.matrix());
            let via_unitary = dilation.apply_raw(&(&root * rho.matrix() * &root));
            let dev = linalg::max_abs_diff(&direct, &via_unitary);
            worst = worst.max(dev);
            if dev > RECONSTRUCTION_TOL {
                bad = true;
            }
        }
        if bad {
            violations += 1;
        }
    }
    SuiteReport {
        instances,
        violations,
        worst_margin: worst,
    }
}

/// Conditional commit-mismatch probabilities of a product commit
/// measurement on a bipartite state, for one ordered pair of effects.
fn mismatch_probabilities(
    rho: &CMat,
    effect_a: &MeasurementOperator,
    effect_b: &MeasurementOperator,
    d_a: usize,
    d_b: usize,
) -> (f64, f64) {
    let ia = linalg::identity(d_a);
    let ib = linalg::identity(d_b);
    // State conditioned on A committing.
    let root_a = linalg::kron(&linalg::sqrt_psd(effect_a.matrix()), &ib);
    let cond_a = {
        let raw = &root_a * rho * &root_a;
        let p = linalg::trace_re(&raw);
        raw.unscale(p)
    };
    let b_not = linalg::kron(&ia, &(ib.clone() - effect_b.matrix()));
    let p_b_not_given_a = linalg::trace_re(&(&b_not * &cond_a)).clamp(0.0, 1.0);
    // State conditioned on B committing.
    let root_b = linalg::kron(&ia, &linalg::sqrt_psd(effect_b.matrix()));
    let cond_b = {
        let raw = &root_b * rho * &root_b;
        let p = linalg::trace_re(&raw);
        raw.unscale(p)
    };
    let a_not = linalg::kron(&(ia.clone() - effect_a.matrix()), &ib);
    let p_a_not_given_b = linalg::trace_re(&(&a_not * &cond_b)).clamp(0.0, 1.0);
    (p_b_not_given_a, p_a_not_given_b)
}

/// Post-commit state for a product effect pair on a bipartite state.
fn post_commit_state(
    rho: &CMat,
    effect_a: &MeasurementOperator,
    effect_b: &MeasurementOperator,
) -> DensityMatrix {
    let root = linalg::kron(
        &linalg::sqrt_psd(effect_a.matrix()),
        &linalg::sqrt_psd(effect_b.matrix()),
    );
    let raw = &root * rho * &root;
    let p = linalg::trace_re(&raw);
    DensityMatrix::new(linalg::hermitize(&raw).unscale(p)).expect("conditioned state")
}

/// Checks that when the three input pairs `(x,y)`, `(x',y)`, `(x',y')` all
/// have conditional commit-mismatch probability at most ε, the post-commit
/// states of the endpoints differ by at most `8√ε` in trace norm.
///
/// Commit effects are drawn close to the identity so that ε stays small and
/// the bound is non-vacuous.
pub fn paths_between_strings_sweep(instances: usize, rng: &mut impl Rng) -> SuiteReport {
    let dims = [(2, 2), (2, 3), (3, 2), (3, 3), (2, 4), (4, 2)];
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..instances {
        let (d_a, d_b) = dims[i % dims.len()];
        let rho = random_density(d_a * d_b, rng);
        let s = rng.gen_range(0.0..0.05);
        let m_x = random_high_prob_effect(d_a, s, rng);
        let m_xp = random_high_prob_effect(d_a, s, rng);
        let m_y = random_high_prob_effect(d_b, s, rng);
        let m_yp = random_high_prob_effect(d_b, s, rng);

        // Conditional mismatch probabilities for the three pairs on the path
        // (x,y) → (x',y) → (x',y'); ε is their maximum.
        let (e1, e2) = mismatch_probabilities(rho.matrix(), &m_x, &m_y, d_a, d_b);
        let (e3, e4) = mismatch_probabilities(rho.matrix(), &m_xp, &m_y, d_a, d_b);
        let (e5, e6) = mismatch_probabilities(rho.matrix(), &m_xp, &m_yp, d_a, d_b);
        let eps = [e1, e2, e3, e4, e5, e6].into_iter().fold(0.0_f64, f64::max);

        let rho_xy = post_commit_state(rho.matrix(), &m_x, &m_y);
        let rho_xpyp = post_commit_state(rho.matrix(), &m_xp, &m_yp);
        let dist = trace_norm_distance(&rho_xy, &rho_xpyp).expect("equal dims");
        let margin = dist - 8.0 * eps.sqrt();
        worst = worst.max(margin);
        if margin > NUMERICAL_SLACK {
            violations += 1;
        }
    }
    SuiteReport {
        instances,
        violations,
        worst_margin: worst,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random::random_channel;
    use crate::rng;

    #[test]
    fn gentle_sweep_small_run_passes() {
        let mut rng = rng::master(31);
        let report = gentle_measurement_sweep(200, &mut rng);
        assert!(report.passed(), "worst margin {}", report.worst_margin);
    }

    #[test]
    fn decomposition_sweep_small_run_passes() {
        let mut rng = rng::master(32);
        let report = instrument_decomposition_sweep(50, &mut rng);
        assert!(report.passed(), "worst deviation {}", report.worst_margin);
    }

    #[test]
    fn stinespring_sweep_small_run_passes() {
        let mut rng = rng::master(33);
        let report = stinespring_recovery_sweep(30, &mut rng);
        assert!(report.passed(), "worst deviation {}", report.worst_margin);
    }

    #[test]
    fn paths_sweep_small_run_passes() {
        let mut rng = rng::master(34);
        let report = paths_between_strings_sweep(60, &mut rng);
        assert!(report.passed(), "worst margin {}", report.worst_margin);
    }

    #[test]
    fn trace_norm_is_a_metric_on_sampled_triples() {
        let mut rng = rng::master(35);
        for _ in 0..200 {
            let dim = 2 + rng.gen_range(0..3);
            let a = random_density(dim, &mut rng);
            let b = random_density(dim, &mut rng);
            let c = random_density(dim, &mut rng);
            let ab = trace_norm_distance(&a, &b).unwrap();
            let bc = trace_norm_distance(&b, &c).unwrap();
            let ac = trace_norm_distance(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-10);
            assert!((ab - trace_norm_distance(&b, &a).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn channels_do_not_increase_trace_distance() {
        let mut rng = rng::master(36);
        for _ in 0..100 {
            let dim = 2 + rng.gen_range(0..7);
            let channel = random_channel(dim, 1 + rng.gen_range(0..3), &mut rng);
            let rho = random_density(dim, &mut rng);
            let sigma = random_density(dim, &mut rng);
            let before = trace_norm_distance(&rho, &sigma).unwrap();
            let after = linalg::trace_norm(
                &(channel.apply_raw(rho.matrix()) - channel.apply_raw(sigma.matrix())),
            );
            assert!(after <= before + 1e-10, "{after} > {before}");
        }
    }
}
