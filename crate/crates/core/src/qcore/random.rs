//! Random ensembles of states, effects, instruments and channels for the
//! verification suites.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::{self, CMat, CVec};
use super::types::{DensityMatrix, KrausChannel, MeasurementOperator, QuantumInstrument};

fn gaussian_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Hilbert-Schmidt-distributed density matrix `GG†/tr(GG†)`.
pub fn random_density(dim: usize, rng: &mut impl Rng) -> DensityMatrix {
    let g = random_matrix(dim, dim, rng);
    let gram = &g * g.adjoint();
    let tr = linalg::trace_re(&gram);
    DensityMatrix::new(linalg::hermitize(&gram).unscale(tr)).expect("Gram matrix is a valid state")
}

pub fn random_pure(dim: usize, rng: &mut impl Rng) -> DensityMatrix {
    let v = CVec::from_fn(dim, |_, _| gaussian_complex(rng));
    DensityMatrix::from_pure(&v).expect("random vector is nonzero a.s.")
}

/// Random POVM effect with spectrum rescaled to span exactly `[0, 1]`.
pub fn random_effect(dim: usize, rng: &mut impl Rng) -> MeasurementOperator {
    let h = linalg::hermitize(&random_matrix(dim, dim, rng));
    let lo = linalg::min_eigenvalue(&h);
    let hi = linalg::max_eigenvalue(&h);
    let mat = if hi - lo < 1e-9 {
        linalg::identity(dim).scale(0.5)
    } else {
        (h - linalg::identity(dim).scale(lo)).unscale(hi - lo)
    };
    MeasurementOperator::new(mat).expect("rescaled spectrum lies in [0,1]")
}

/// Effect close to the identity: `(1−s)·𝟙 + s·N` for a random effect `N`,
/// so any state is accepted with probability at least `1 − s`.
pub fn random_high_prob_effect(dim: usize, s: f64, rng: &mut impl Rng) -> MeasurementOperator {
    let n = random_effect(dim, rng);
    let mat = linalg::identity(dim).scale(1.0 - s) + n.matrix().scale(s);
    MeasurementOperator::new(mat).expect("convex combination of effects")
}

/// Random instrument: Gaussian Kraus candidates `G_t` normalized by the
/// inverse square root of `S = Σ G†G`, so that `Σ K†K = 𝟙` holds exactly.
pub fn random_instrument(
    dim: usize,
    n_outcomes: usize,
    kraus_per_outcome: usize,
    rng: &mut impl Rng,
) -> QuantumInstrument {
    let candidates: Vec<Vec<CMat>> = (0..n_outcomes)
        .map(|_| {
            (0..kraus_per_outcome)
                .map(|_| random_matrix(dim, dim, rng))
                .collect()
        })
        .collect();
    let s = candidates
        .iter()
        .flatten()
        .fold(CMat::zeros(dim, dim), |acc, g| acc + g.adjoint() * g);
    let s_inv_root = linalg::pinv_sqrt(&linalg::hermitize(&s));
    let kraus_sets: Vec<Vec<CMat>> = candidates
        .into_iter()
        .map(|set| set.into_iter().map(|g| g * &s_inv_root).collect())
        .collect();
    QuantumInstrument::new(kraus_sets).expect("normalized Kraus family")
}

pub fn random_channel(dim: usize, kraus_count: usize, rng: &mut impl Rng) -> KrausChannel {
    let instrument = random_instrument(dim, 1, kraus_count, rng);
    KrausChannel::new(instrument.kraus_set(0).to_vec()).expect("single-outcome instrument is CPTP")
}
