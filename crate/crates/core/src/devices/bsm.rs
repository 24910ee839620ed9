//! Linear-optical partial Bell-state measurement: a 50/50 beam splitter,
//! two polarizing beam splitters and four single-photon detectors.
//!
//! `Ψ−` sends one photon into each arm, triggering the detector pairs
//! (D1, D3) or (D2, D4); `Ψ+` sends both into one arm, triggering (D1, D2)
//! or (D3, D4). `Φ±` bunch both photons onto a single detector. Only the
//! four two-click `Ψ±` patterns are conclusive, so the scheme caps at 50%
//! efficiency even with perfect detectors.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{detector_click, sample_loss};

/// Click pattern of the four detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClickPattern {
    pub d1: bool,
    pub d2: bool,
    pub d3: bool,
    pub d4: bool,
}

impl ClickPattern {
    pub fn new(d1: bool, d2: bool, d3: bool, d4: bool) -> Self {
        Self { d1, d2, d3, d4 }
    }

    pub fn count(&self) -> u32 {
        u32::from(self.d1) + u32::from(self.d2) + u32::from(self.d3) + u32::from(self.d4)
    }

    fn get(&self, idx: usize) -> bool {
        match idx {
            0 => self.d1,
            1 => self.d2,
            2 => self.d3,
            _ => self.d4,
        }
    }

    fn set(&mut self, idx: usize, value: bool) {
        match idx {
            0 => self.d1 = value,
            1 => self.d2 = value,
            2 => self.d3 = value,
            _ => self.d4 = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BsmOutcome {
    PsiMinus,
    PsiPlus,
    Inconclusive,
}

/// Classifies a click pattern. Exactly (D1, D3) or (D2, D4) → `Ψ−`;
/// exactly (D1, D2) or (D3, D4) → `Ψ+`; anything else is a no-detection
/// event.
pub fn bsm_classify(pattern: ClickPattern) -> BsmOutcome {
    if pattern.count() != 2 {
        return BsmOutcome::Inconclusive;
    }
    match (pattern.d1, pattern.d2, pattern.d3, pattern.d4) {
        (true, false, true, false) | (false, true, false, true) => BsmOutcome::PsiMinus,
        (true, true, false, false) | (false, false, true, true) => BsmOutcome::PsiPlus,
        _ => BsmOutcome::Inconclusive,
    }
}

/// Result of one partial Bell measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartialBsmResult {
    pub outcome: BsmOutcome,
    pub pattern: ClickPattern,
    /// The conclusive pattern came from both photons being detected, rather
    /// than from dark counts filling in.
    pub genuine_coincidence: bool,
}

// Detector index pairs for each conclusive routing.
const PSI_MINUS_ROUTES: [(usize, usize); 2] = [(0, 2), (1, 3)];
const PSI_PLUS_ROUTES: [(usize, usize); 2] = [(0, 1), (2, 3)];

/// Samples the partial Bell measurement. The local EPR half is always
/// present; the protocol input photon enters only if `input_present`. Each
/// detector dark-counts independently with probability `p_dc` per window.
pub fn partial_bsm(
    input_present: bool,
    eta_det: f64,
    p_dc: f64,
    rng: &mut impl Rng,
) -> PartialBsmResult {
    let mut real = ClickPattern::default();
    let mut expected_pair: Option<(usize, usize)> = None;

    if input_present {
        // Two photons interfere: the Bell outcome decides the routing.
        let branch = rng.gen::<f64>();
        if branch < 0.25 {
            let route = PSI_MINUS_ROUTES[usize::from(rng.gen::<bool>())];
            expected_pair = Some(route);
            real.set(route.0, sample_loss(eta_det, rng));
            real.set(route.1, sample_loss(eta_det, rng));
        } else if branch < 0.5 {
            let route = PSI_PLUS_ROUTES[usize::from(rng.gen::<bool>())];
            expected_pair = Some(route);
            real.set(route.0, sample_loss(eta_det, rng));
            real.set(route.1, sample_loss(eta_det, rng));
        } else {
            // Φ±: both photons bunch onto one detector.
            let det = rng.gen_range(0..4);
            let click = 1.0 - (1.0 - eta_det) * (1.0 - eta_det);
            real.set(det, sample_loss(click, rng));
        }
    } else {
        // Only the EPR half: it exits towards a uniformly random detector.
        let det = rng.gen_range(0..4);
        real.set(det, sample_loss(eta_det, rng));
    }

    let mut pattern = real;
    for idx in 0..4 {
        if !pattern.get(idx) {
            pattern.set(idx, detector_click(false, eta_det, p_dc, rng));
        }
    }

    let outcome = bsm_classify(pattern);
    let genuine_coincidence = match (outcome, expected_pair) {
        (BsmOutcome::Inconclusive, _) | (_, None) => false,
        (_, Some((a, b))) => real.get(a) && real.get(b) && pattern == real,
    };
    PartialBsmResult {
        outcome,
        pattern,
        genuine_coincidence,
    }
}

/// Analytic probability that the click pattern classifies as conclusive,
/// by enumeration over Bell branches, routings, and the 16 click patterns.
pub fn bsm_commit_probability(input_present: bool, eta_det: f64, p_dc: f64) -> f64 {
    let conclusive_given_probs = |click_probs: [f64; 4]| -> f64 {
        let mut total = 0.0;
        for bits in 0..16u32 {
            let pattern =
                ClickPattern::new(bits & 1 != 0, bits & 2 != 0, bits & 4 != 0, bits & 8 != 0);
            if bsm_classify(pattern) == BsmOutcome::Inconclusive {
                continue;
            }
            let mut p = 1.0;
            for idx in 0..4 {
                let c = click_probs[idx];
                p *= if pattern.get(idx) { c } else { 1.0 - c };
            }
            total += p;
        }
        total
    };

    // Click probability of a detector that a single real photon heads to.
    let hit = eta_det + (1.0 - eta_det) * p_dc;
    let dark = p_dc;

    if !input_present {
        // EPR half alone, uniform over the four detectors; by symmetry one
        // representative suffices.
        return conclusive_given_probs([hit, dark, dark, dark]);
    }

    let mut total = 0.0;
    for routes in [PSI_MINUS_ROUTES, PSI_PLUS_ROUTES] {
        for (a, b) in routes {
            let mut probs = [dark; 4];
            probs[a] = hit;
            probs[b] = hit;
            total += 0.125 * conclusive_given_probs(probs);
        }
    }
    // Φ± branches: both photons on one detector.
    let bunched = 1.0 - (1.0 - eta_det) * (1.0 - eta_det);
    let bunched_hit = bunched + (1.0 - bunched) * p_dc;
    for det in 0..4 {
        let mut probs = [dark; 4];
        probs[det] = bunched_hit;
        total += 0.125 * conclusive_given_probs(probs);
    }
    total
}
