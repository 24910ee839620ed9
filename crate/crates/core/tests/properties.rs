//! Property tests for the algebraic pieces: bit strings, the keyed basis
//! function, payoffs, detection bounds and subset extraction.

use proptest::prelude::*;

use qpv_core::protocol::{eval_f, BitString};
use qpv_core::verdict::{
    detection_probability_nonadaptive, good_rounds_subset, payoff, wilson_interval, AnswerClass,
};

proptest! {
    #[test]
    fn bitstring_value_roundtrip(value in 0u64..u64::MAX, extra in 0usize..32) {
        let n_bits = 64 + extra;
        let s = BitString::from_value(value, n_bits);
        prop_assert_eq!(s.len(), n_bits);
        for i in 0..64 {
            prop_assert_eq!(s.bit(i), value >> i & 1 == 1);
        }
        for i in 64..n_bits {
            prop_assert!(!s.bit(i));
        }
        prop_assert_eq!(s.to_hex().len(), n_bits.div_ceil(8) * 2);
    }

    #[test]
    fn bitstring_flip_is_involutive(value in any::<u64>(), index in 0usize..48) {
        let mut s = BitString::from_value(value, 48);
        let before = s.clone();
        s.flip_bit(index % 48);
        prop_assert_ne!(&s, &before);
        s.flip_bit(index % 48);
        prop_assert_eq!(s, before);
    }

    #[test]
    fn eval_f_stays_in_range_and_is_deterministic(
        seed in any::<u64>(),
        x in any::<u64>(),
        y in any::<u64>(),
        m in 2u32..17,
    ) {
        let xs = BitString::from_value(x, 64);
        let ys = BitString::from_value(y, 64);
        let a = eval_f(seed, &xs, &ys, m).unwrap();
        prop_assert!(a < m);
        prop_assert_eq!(a, eval_f(seed, &xs, &ys, m).unwrap());
    }

    #[test]
    fn payoff_is_bounded_and_centered(p_b in 0.01f64..0.99) {
        let win = payoff(AnswerClass::Correct, p_b).unwrap();
        let lose = payoff(AnswerClass::Incorrect, p_b).unwrap();
        prop_assert!((win - lose - 1.0).abs() < 1e-12);
        // The boundary strategy answering correctly with probability p_b
        // has zero expected payoff.
        prop_assert!((p_b * win + (1.0 - p_b) * lose).abs() < 1e-12);
    }

    #[test]
    fn detection_exact_dominates_exponential(alpha in 0.0f64..1.0, rounds in 1u64..5000) {
        let d = detection_probability_nonadaptive(alpha, rounds);
        prop_assert!(d.exact >= d.exponential - 1e-12);
        prop_assert!((0.0..=1.0).contains(&d.exact));
        prop_assert!((0.0..=1.0).contains(&d.exponential));
    }

    #[test]
    fn good_rounds_selection_obeys_the_threshold(
        eps in prop::collection::vec(0.0f64..0.2, 4..50),
        q_scaled in 1usize..9,
    ) {
        let q = q_scaled as f64 / 10.0;
        let g = good_rounds_subset(&eps, q).unwrap();
        prop_assert_eq!(g.indices.len(), (q * eps.len() as f64).floor() as usize);
        for &i in &g.indices {
            prop_assert!(eps[i] <= g.threshold + 1e-12);
        }
    }

    #[test]
    fn wilson_interval_brackets_the_estimate(successes in 0u64..1000, extra in 0u64..1000) {
        let trials = successes + extra;
        prop_assume!(trials > 0);
        let (lo, hi) = wilson_interval(successes, trials, 3.0);
        let p = successes as f64 / trials as f64;
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!((0.0..=1.0).contains(&hi));
        prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
    }
}
