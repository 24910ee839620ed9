//! Dense complex linear algebra helpers for small Hermitian problems.
//!
//! Everything here goes through Hermitian eigendecompositions; eigenvalues
//! below [`EIG_CLAMP`] are treated as zero when inverting or projecting onto
//! supports. Dimensions are expected to stay small (at most 16).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Eigenvalue clamp threshold for pseudo-inverses and support projectors.
pub const EIG_CLAMP: f64 = 1e-12;

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// Hermitian part `(a + a†)/2`, used to strip numerical anti-Hermitian noise.
pub fn hermitize(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

pub fn trace(a: &CMat) -> Complex64 {
    a.diagonal().sum()
}

pub fn trace_re(a: &CMat) -> f64 {
    trace(a).re
}

/// Largest entrywise absolute difference between two matrices.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix (unsorted).
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    hermitize(h)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect()
}

pub fn min_eigenvalue(h: &CMat) -> f64 {
    hermitian_eigenvalues(h)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

pub fn max_eigenvalue(h: &CMat) -> f64 {
    hermitian_eigenvalues(h)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Applies `f` to the eigenvalues of a Hermitian matrix: `V f(Λ) V†`.
pub fn hermitian_map(h: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let eig = hermitize(h).symmetric_eigen();
    let d = CVec::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| Complex64::new(f(l), 0.0)),
    );
    &eig.eigenvectors * CMat::from_diagonal(&d) * eig.eigenvectors.adjoint()
}

/// Positive-semidefinite square root; negative eigenvalues are clamped to 0.
pub fn sqrt_psd(h: &CMat) -> CMat {
    hermitian_map(h, |l| l.max(0.0).sqrt())
}

/// Pseudo-inverse of `√h`: maps eigenvalue `λ` of `h` to `λ^{-1/2}`,
/// treating eigenvalues at or below the clamp threshold as zero.
pub fn pinv_sqrt(h: &CMat) -> CMat {
    hermitian_map(h, |l| if l > EIG_CLAMP { 1.0 / l.sqrt() } else { 0.0 })
}

/// Projector onto the support of a PSD matrix (eigenvalues above the clamp).
pub fn support_projector(h: &CMat) -> CMat {
    hermitian_map(h, |l| if l > EIG_CLAMP { 1.0 } else { 0.0 })
}

/// Trace norm `‖a‖₁`: the sum of singular values.
pub fn trace_norm(a: &CMat) -> f64 {
    a.clone().svd(false, false).singular_values.iter().sum()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Partial trace over the environment of a `(d_sys·d_env)²` matrix, with
/// basis ordering `|s⟩⊗|e⟩ ↦ s·d_env + e`.
pub fn partial_trace_env(m: &CMat, d_sys: usize, d_env: usize) -> CMat {
    debug_assert_eq!(m.nrows(), d_sys * d_env);
    let mut out = CMat::zeros(d_sys, d_sys);
    for s in 0..d_sys {
        for t in 0..d_sys {
            let mut acc = Complex64::default();
            for e in 0..d_env {
                acc += m[(s * d_env + e, t * d_env + e)];
            }
            out[(s, t)] = acc;
        }
    }
    out
}
