//! Operations on quantum objects: distances, conditioned post-states,
//! instrument decomposition, Stinespring dilation, and Born-rule sampling.

use num_complex::Complex64;
use rand::Rng;

use super::linalg::{self, CMat, CVec};
use super::types::{
    kraus_sum, DensityMatrix, KrausChannel, MeasurementOperator, QuantumInstrument,
};
use super::QcoreError;

/// `‖ρ − σ‖₁`, the sum of singular values of the difference.
pub fn trace_norm_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, QcoreError> {
    if rho.dim() != sigma.dim() {
        return Err(QcoreError::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    Ok(linalg::trace_norm(&(rho.matrix() - sigma.matrix())))
}

/// Post-measurement state `√M ρ √M / tr(Mρ)` and the outcome probability.
///
/// If the outcome identifies the state with probability `1 − ε`, the result
/// is within `2√ε` of `ρ` in trace norm.
pub fn gentle_post_state(
    rho: &DensityMatrix,
    effect: &MeasurementOperator,
) -> Result<(DensityMatrix, f64), QcoreError> {
    if rho.dim() != effect.dim() {
        return Err(QcoreError::DimensionMismatch {
            left: rho.dim(),
            right: effect.dim(),
        });
    }
    let prob = effect.probability_on(rho);
    if prob < 1e-14 {
        return Err(QcoreError::DegenerateConditioning { probability: prob });
    }
    let root = linalg::sqrt_psd(effect.matrix());
    let raw = &root * rho.matrix() * &root;
    let state = DensityMatrix::new(linalg::hermitize(&raw).unscale(prob))?;
    Ok((state, prob))
}

/// Splits one branch of an instrument into its POVM element `M` and a
/// quantum channel `E` with `I_i(ρ) = E(√M ρ √M)`.
///
/// The channel's Kraus operators are `K_j (√M)⁻` together with the
/// completion element `𝟙 − P`, where `P` projects onto the support of `M`.
pub fn decompose_instrument(
    instrument: &QuantumInstrument,
    outcome: usize,
) -> Result<(MeasurementOperator, KrausChannel), QcoreError> {
    if outcome >= instrument.n_outcomes() {
        return Err(QcoreError::InvalidOutcome {
            outcome,
            n_outcomes: instrument.n_outcomes(),
        });
    }
    let dim = instrument.dim();
    let m = linalg::hermitize(&kraus_sum(instrument.kraus_set(outcome), dim));
    let pinv_root = linalg::pinv_sqrt(&m);
    let support = linalg::support_projector(&m);

    let mut kraus: Vec<CMat> = instrument
        .kraus_set(outcome)
        .iter()
        .map(|k| k * &pinv_root)
        .collect();
    kraus.push(linalg::identity(dim) - support);

    let effect = MeasurementOperator::new(m)?;
    let channel = KrausChannel::new(kraus)?;
    Ok((effect, channel))
}

/// A unitary dilation of a channel: `E(ρ) = Tr_E[U (ρ ⊗ |0⟩⟨0|_E) U†]`.
#[derive(Debug, Clone)]
pub struct StinespringDilation {
    unitary: CMat,
    sys_dim: usize,
    env_dim: usize,
}

impl StinespringDilation {
    pub fn unitary(&self) -> &CMat {
        &self.unitary
    }

    pub fn sys_dim(&self) -> usize {
        self.sys_dim
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    /// Recovers the channel action on a raw (possibly sub-normalized) input.
    pub fn apply_raw(&self, rho: &CMat) -> CMat {
        let env0 = {
            let mut e = CMat::zeros(self.env_dim, self.env_dim);
            e[(0, 0)] = Complex64::new(1.0, 0.0);
            e
        };
        let joint = linalg::kron(rho, &env0);
        let evolved = &self.unitary * joint * self.unitary.adjoint();
        linalg::partial_trace_env(&evolved, self.sys_dim, self.env_dim)
    }
}

/// Dilates a channel with `r` Kraus operators to a unitary on an
/// `r`-dimensional environment, completing the isometry
/// `V|ψ⟩ = Σ_j K_j|ψ⟩ ⊗ |j⟩` to a unitary by Gram–Schmidt.
pub fn stinespring_dilate(channel: &KrausChannel) -> Result<StinespringDilation, QcoreError> {
    let d = channel.dim();
    let r = channel.kraus().len();
    let total = d * r;

    let mut unitary = CMat::zeros(total, total);
    // Columns at environment index 0 are fixed by the isometry.
    for s in 0..d {
        for (j, k) in channel.kraus().iter().enumerate() {
            for sp in 0..d {
                unitary[(sp * r + j, s * r)] = k[(sp, s)];
            }
        }
    }

    let fixed: Vec<usize> = (0..d).map(|s| s * r).collect();
    let mut filled: Vec<usize> = fixed.clone();
    let free: Vec<usize> = (0..total).filter(|c| c % r != 0).collect();
    let mut candidates = 0..total;
    for &col in &free {
        // Orthogonalize canonical basis vectors against everything placed so
        // far (two passes for numerical stability), skipping near-dependent
        // candidates.
        let v = loop {
            let cand = candidates
                .next()
                .ok_or(QcoreError::DilationCompletionFailed)?;
            let mut v = CVec::zeros(total);
            v[cand] = Complex64::new(1.0, 0.0);
            for _ in 0..2 {
                for &placed in &filled {
                    let u = unitary.column(placed);
                    let overlap = u.dotc(&v);
                    v -= CVec::from(u) * overlap;
                }
            }
            let norm = v.norm();
            if norm > 1e-8 {
                break v.unscale(norm);
            }
        };
        unitary.set_column(col, &v);
        filled.push(col);
    }

    Ok(StinespringDilation {
        unitary,
        sys_dim: d,
        env_dim: r,
    })
}

/// Which half of a two-qubit joint state an operation acts on. The first
/// tensor factor is the verifier's kept qubit, the second the prover's.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitSide {
    Verifier,
    Prover,
}

/// One of `m` single-qubit bases, equally spaced on the Bloch circle
/// through Z and X at angles `πj/m`. Index 0 is the computational basis;
/// for `m = 2`, index 1 is the Hadamard basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Basis {
    theta: f64,
}

impl Basis {
    pub fn equatorial(index: u32, m: u32) -> Result<Self, QcoreError> {
        if m < 2 || index >= m {
            return Err(QcoreError::InvalidBasis { index, m });
        }
        Ok(Self {
            theta: std::f64::consts::PI * f64::from(index) / f64::from(m),
        })
    }

    pub fn bloch_angle(&self) -> f64 {
        self.theta
    }

    /// Basis vectors `(|b₀⟩, |b₁⟩)`.
    pub fn vectors(&self) -> (CVec, CVec) {
        let (c, s) = ((self.theta / 2.0).cos(), (self.theta / 2.0).sin());
        let amp = |x: f64| Complex64::new(x, 0.0);
        (
            CVec::from_vec(vec![amp(c), amp(s)]),
            CVec::from_vec(vec![amp(s), amp(-c)]),
        )
    }

    /// Rank-one projector onto outcome 0 or 1.
    pub fn projector(&self, outcome: u8) -> CMat {
        let (b0, b1) = self.vectors();
        let v = if outcome == 0 { b0 } else { b1 };
        &v * v.adjoint()
    }
}

/// Born-rule measurement of one qubit of a two-qubit state in an equatorial
/// basis. Returns the sampled outcome and the renormalized post-state.
pub fn measure_qubit_in_basis(
    joint: &DensityMatrix,
    basis_index: u32,
    side: QubitSide,
    m: u32,
    rng: &mut impl Rng,
) -> Result<(u8, DensityMatrix), QcoreError> {
    if joint.dim() != 4 {
        return Err(QcoreError::NotTwoQubits { dim: joint.dim() });
    }
    let basis = Basis::equatorial(basis_index, m)?;
    let embed = |p: &CMat| match side {
        QubitSide::Verifier => linalg::kron(p, &linalg::identity(2)),
        QubitSide::Prover => linalg::kron(&linalg::identity(2), p),
    };
    let proj0 = embed(&basis.projector(0));
    let mut p0 = linalg::trace_re(&(&proj0 * joint.matrix())).clamp(0.0, 1.0);
    // Snap near-deterministic outcomes so exact correlations stay exact.
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
    let raw = &proj * joint.matrix() * &proj;
    let post = DensityMatrix::new(linalg::hermitize(&raw).unscale(prob))?;
    Ok((outcome, post))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::types::BellState;
    use crate::rng;
    use approx::assert_abs_diff_eq;

    fn pure(amps: &[f64]) -> DensityMatrix {
        let v = CVec::from_iterator(amps.len(), amps.iter().map(|&x| Complex64::new(x, 0.0)));
        DensityMatrix::from_pure(&v).unwrap()
    }

    #[test]
    fn identical_states_have_zero_distance() {
        let rho = pure(&[1.0, 0.0]);
        assert_abs_diff_eq!(
            trace_norm_distance(&rho, &rho).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn orthogonal_pure_states_have_distance_two() {
        let rho = pure(&[1.0, 0.0]);
        let sigma = pure(&[0.0, 1.0]);
        assert_abs_diff_eq!(
            trace_norm_distance(&rho, &sigma).unwrap(),
            2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn plus_vs_zero_distance_is_sqrt_two() {
        // Analytic pure-state formula: 2√(1 − |⟨ψ|φ⟩|²) = √2 at overlap 1/2.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = pure(&[s, s]);
        let zero = pure(&[1.0, 0.0]);
        assert_abs_diff_eq!(
            trace_norm_distance(&plus, &zero).unwrap(),
            std::f64::consts::SQRT_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let rho = pure(&[1.0, 0.0]);
        let sigma = DensityMatrix::maximally_mixed(3);
        assert!(trace_norm_distance(&rho, &sigma).is_err());
    }

    #[test]
    fn identity_measurement_does_not_disturb() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rho = pure(&[s, s]);
        let (post, prob) = gentle_post_state(&rho, &MeasurementOperator::identity(2)).unwrap();
        assert_abs_diff_eq!(prob, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            trace_norm_distance(&rho, &post).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn gentle_bound_saturates_for_plus_measured_by_zero_projector() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = pure(&[s, s]);
        let zero_proj =
            MeasurementOperator::new(Basis::equatorial(0, 2).unwrap().projector(0)).unwrap();
        let (post, prob) = gentle_post_state(&plus, &zero_proj).unwrap();
        assert_abs_diff_eq!(prob, 0.5, epsilon = 1e-12);
        let dist = trace_norm_distance(&plus, &post).unwrap();
        // ε = 1/2, and 2√ε = √2 is attained exactly.
        assert_abs_diff_eq!(dist, std::f64::consts::SQRT_2, epsilon = 1e-10);
    }

    #[test]
    fn degenerate_conditioning_is_an_error() {
        let zero = pure(&[1.0, 0.0]);
        let one_proj =
            MeasurementOperator::new(Basis::equatorial(0, 2).unwrap().projector(1)).unwrap();
        assert!(matches!(
            gentle_post_state(&zero, &one_proj),
            Err(QcoreError::DegenerateConditioning { .. })
        ));
    }

    #[test]
    fn scalar_loss_map_decomposes_to_identity_channel() {
        let eta: f64 = 0.36;
        let dim = 2;
        let k_lost = linalg::identity(dim).scale((1.0 - eta).sqrt());
        let k_kept = linalg::identity(dim).scale(eta.sqrt());
        let instrument = QuantumInstrument::new(vec![vec![k_lost], vec![k_kept]]).unwrap();
        let (effect, channel) = decompose_instrument(&instrument, 1).unwrap();
        assert!(linalg::max_abs_diff(effect.matrix(), &linalg::identity(dim).scale(eta)) < 1e-12);
        // E(√M ρ √M) must reproduce ηρ.
        let rho = DensityMatrix::maximally_mixed(dim);
        let root = linalg::sqrt_psd(effect.matrix());
        let reconstructed = channel.apply_raw(&(&root * rho.matrix() * &root));
        assert!(linalg::max_abs_diff(&reconstructed, &rho.matrix().scale(eta)) < 1e-12);
    }

    #[test]
    fn projective_instrument_decomposition_acts_as_identity_on_support() {
        let p0 = Basis::equatorial(0, 2).unwrap().projector(0);
        let p1 = Basis::equatorial(0, 2).unwrap().projector(1);
        let instrument = QuantumInstrument::new(vec![vec![p0.clone()], vec![p1]]).unwrap();
        let (effect, channel) = decompose_instrument(&instrument, 0).unwrap();
        assert!(linalg::max_abs_diff(effect.matrix(), &p0) < 1e-12);
        let reconstructed = channel.apply_raw(&p0);
        assert!(linalg::max_abs_diff(&reconstructed, &p0) < 1e-12);
    }

    #[test]
    fn identity_channel_dilates_and_recovers_exactly() {
        let channel = KrausChannel::identity(2);
        let dilation = stinespring_dilate(&channel).unwrap();
        assert_eq!(dilation.env_dim(), 1);
        let rho = pure(&[0.6, 0.8]);
        assert!(linalg::max_abs_diff(&dilation.apply_raw(rho.matrix()), rho.matrix()) < 1e-12);
    }

    #[test]
    fn depolarizing_channel_recovery() {
        let p: f64 = 0.3;
        let sx = CMat::from_row_slice(2, 2, &[0.0.into(), 1.0.into(), 1.0.into(), 0.0.into()]);
        let sz = CMat::from_row_slice(2, 2, &[1.0.into(), 0.0.into(), 0.0.into(), (-1.0).into()]);
        let sy = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let kraus = vec![
            linalg::identity(2).scale((1.0 - 3.0 * p / 4.0).sqrt()),
            sx.scale((p / 4.0).sqrt()),
            sy.scale((p / 4.0).sqrt()),
            sz.scale((p / 4.0).sqrt()),
        ];
        let channel = KrausChannel::new(kraus).unwrap();
        let dilation = stinespring_dilate(&channel).unwrap();
        let mut rng = rng::master(11);
        for _ in 0..100 {
            let rho = crate::qcore::random::random_density(2, &mut rng);
            let direct = channel.apply_raw(rho.matrix());
            let recovered = dilation.apply_raw(rho.matrix());
            assert!(linalg::max_abs_diff(&direct, &recovered) < 1e-10);
        }
    }

    #[test]
    fn epr_outcomes_agree_in_matching_bases() {
        let mut rng = rng::master(3);
        for basis in 0..2 {
            for _ in 0..200 {
                let joint = BellState::PhiPlus.density();
                let (v, post) =
                    measure_qubit_in_basis(&joint, basis, QubitSide::Verifier, 2, &mut rng)
                        .unwrap();
                let (a, _) =
                    measure_qubit_in_basis(&post, basis, QubitSide::Prover, 2, &mut rng).unwrap();
                assert_eq!(v, a);
            }
        }
    }

    #[test]
    fn basis_angle_difference_gives_cos_squared_agreement() {
        // 10⁵-sample frequency check of the Born rule at 3σ.
        let mut rng = rng::master(5);
        let m = 8;
        let (i, j) = (1u32, 4u32);
        let theta = std::f64::consts::PI * f64::from(j - i) / f64::from(m);
        let expect = (theta / 2.0).cos().powi(2);
        let n = 100_000;
        let mut agree = 0u32;
        for _ in 0..n {
            let joint = BellState::PhiPlus.density();
            let (v, post) =
                measure_qubit_in_basis(&joint, i, QubitSide::Verifier, m, &mut rng).unwrap();
            let (a, _) = measure_qubit_in_basis(&post, j, QubitSide::Prover, m, &mut rng).unwrap();
            if v == a {
                agree += 1;
            }
        }
        let freq = f64::from(agree) / f64::from(n);
        let sigma = (expect * (1.0 - expect) / f64::from(n)).sqrt();
        assert!(
            (freq - expect).abs() < 3.0 * sigma,
            "freq {freq} vs expected {expect} (3σ = {})",
            3.0 * sigma
        );
    }

    #[test]
    fn invalid_basis_index_is_rejected() {
        let joint = BellState::PhiPlus.density();
        let mut rng = rng::master(0);
        assert!(measure_qubit_in_basis(&joint, 2, QubitSide::Verifier, 2, &mut rng).is_err());
    }
}
