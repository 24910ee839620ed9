//! Validated quantum objects: states, effects, instruments, channels.

use num_complex::Complex64;

use super::linalg::{self, CMat, CVec};
use super::QcoreError;

/// Hermiticity tolerance for validated constructors.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Minimum-eigenvalue tolerance for positive-semidefiniteness checks.
pub const PSD_TOL: f64 = 1e-10;
/// Trace tolerance for normalized states and trace-preserving maps.
pub const TRACE_TOL: f64 = 1e-10;

/// A normalized density matrix: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self, QcoreError> {
        if mat.nrows() != mat.ncols() {
            return Err(QcoreError::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let dev = linalg::max_abs_diff(&mat, &mat.adjoint());
        if dev > HERMITICITY_TOL {
            return Err(QcoreError::NotHermitian { deviation: dev });
        }
        let min_eig = linalg::min_eigenvalue(&mat);
        if min_eig < -PSD_TOL {
            return Err(QcoreError::NotPositive {
                min_eigenvalue: min_eig,
            });
        }
        let tr = linalg::trace(&mat);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(QcoreError::TraceNotOne { trace: tr.re });
        }
        Ok(Self { mat })
    }

    /// `|ψ⟩⟨ψ|` for a unit vector (normalized here if slightly off).
    pub fn from_pure(psi: &CVec) -> Result<Self, QcoreError> {
        let norm = psi.norm();
        if norm < 1e-12 {
            return Err(QcoreError::ZeroVector);
        }
        let v = psi.unscale(norm);
        Self::new(&v * v.adjoint())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: linalg::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }
}

/// A POVM effect: Hermitian with spectrum in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOperator {
    mat: CMat,
}

impl MeasurementOperator {
    pub fn new(mat: CMat) -> Result<Self, QcoreError> {
        if mat.nrows() != mat.ncols() {
            return Err(QcoreError::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let dev = linalg::max_abs_diff(&mat, &mat.adjoint());
        if dev > HERMITICITY_TOL {
            return Err(QcoreError::NotHermitian { deviation: dev });
        }
        let min_eig = linalg::min_eigenvalue(&mat);
        let max_eig = linalg::max_eigenvalue(&mat);
        if min_eig < -PSD_TOL || max_eig > 1.0 + PSD_TOL {
            return Err(QcoreError::NotAnEffect {
                min_eigenvalue: min_eig,
                max_eigenvalue: max_eig,
            });
        }
        Ok(Self { mat })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: linalg::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// `tr(Mρ)`, the probability of this effect on `ρ`.
    pub fn probability_on(&self, rho: &DensityMatrix) -> f64 {
        linalg::trace_re(&(&self.mat * rho.matrix()))
    }
}

/// A completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    kraus: Vec<CMat>,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self, QcoreError> {
        let dim = Self::common_dim(&kraus)?;
        let sum = kraus_sum(&kraus, dim);
        let dev = linalg::max_abs_diff(&sum, &linalg::identity(dim));
        if dev > TRACE_TOL {
            return Err(QcoreError::NotTracePreserving { deviation: dev });
        }
        Ok(Self { kraus })
    }

    fn common_dim(kraus: &[CMat]) -> Result<usize, QcoreError> {
        let first = kraus.first().ok_or(QcoreError::EmptyKrausSet)?;
        if first.nrows() != first.ncols() {
            return Err(QcoreError::NotSquare {
                rows: first.nrows(),
                cols: first.ncols(),
            });
        }
        let dim = first.nrows();
        if kraus.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return Err(QcoreError::DimensionMismatch {
                left: dim,
                right: 0,
            });
        }
        Ok(dim)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![linalg::identity(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    /// `Σ K ρ K†` on a raw matrix (accepts sub-normalized inputs).
    pub fn apply_raw(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim(), self.dim());
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix, QcoreError> {
        DensityMatrix::new(linalg::hermitize(&self.apply_raw(rho.matrix())))
    }
}

/// An outcome-indexed family of completely positive maps summing to a
/// trace-preserving map. Outcomes are labeled by their index.
#[derive(Debug, Clone)]
pub struct QuantumInstrument {
    kraus_sets: Vec<Vec<CMat>>,
    dim: usize,
}

impl QuantumInstrument {
    pub fn new(kraus_sets: Vec<Vec<CMat>>) -> Result<Self, QcoreError> {
        let all: Vec<&CMat> = kraus_sets.iter().flatten().collect();
        let first = all.first().ok_or(QcoreError::EmptyKrausSet)?;
        if first.nrows() != first.ncols() {
            return Err(QcoreError::NotSquare {
                rows: first.nrows(),
                cols: first.ncols(),
            });
        }
        let dim = first.nrows();
        if all.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return Err(QcoreError::DimensionMismatch {
                left: dim,
                right: 0,
            });
        }
        let total: CMat = all
            .iter()
            .fold(CMat::zeros(dim, dim), |acc, k| acc + k.adjoint() * *k);
        let dev = linalg::max_abs_diff(&total, &linalg::identity(dim));
        if dev > TRACE_TOL {
            return Err(QcoreError::NotTracePreserving { deviation: dev });
        }
        Ok(Self { kraus_sets, dim })
    }

    pub fn n_outcomes(&self) -> usize {
        self.kraus_sets.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus_set(&self, outcome: usize) -> &[CMat] {
        &self.kraus_sets[outcome]
    }

    /// Sub-normalized output `I_i(ρ)`; its trace is the outcome probability.
    pub fn apply_raw(&self, outcome: usize, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for k in &self.kraus_sets[outcome] {
            out += k * rho * k.adjoint();
        }
        out
    }

    pub fn outcome_probability(&self, outcome: usize, rho: &DensityMatrix) -> f64 {
        linalg::trace_re(&self.apply_raw(outcome, rho.matrix()))
    }

    /// The POVM element `M_i = Σ_j K_j† K_j` associated with an outcome.
    pub fn povm_element(&self, outcome: usize) -> MeasurementOperator {
        let sum = self.kraus_sets[outcome]
            .iter()
            .fold(CMat::zeros(self.dim, self.dim), |acc, k| {
                acc + k.adjoint() * k
            });
        MeasurementOperator {
            mat: linalg::hermitize(&sum),
        }
    }
}

/// The four maximally entangled two-qubit states, with `|ab⟩ ↦ 2a + b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub fn vector(self) -> CVec {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let amp = |re: f64| Complex64::new(re, 0.0);
        match self {
            BellState::PhiPlus => CVec::from_vec(vec![amp(s), amp(0.0), amp(0.0), amp(s)]),
            BellState::PhiMinus => CVec::from_vec(vec![amp(s), amp(0.0), amp(0.0), amp(-s)]),
            BellState::PsiPlus => CVec::from_vec(vec![amp(0.0), amp(s), amp(s), amp(0.0)]),
            BellState::PsiMinus => CVec::from_vec(vec![amp(0.0), amp(s), amp(-s), amp(0.0)]),
        }
    }

    pub fn density(self) -> DensityMatrix {
        DensityMatrix::from_pure(&self.vector()).expect("Bell states are unit vectors")
    }
}

pub(crate) fn kraus_sum(kraus: &[CMat], dim: usize) -> CMat {
    kraus
        .iter()
        .fold(CMat::zeros(dim, dim), |acc, k| acc + k.adjoint() * k)
}
