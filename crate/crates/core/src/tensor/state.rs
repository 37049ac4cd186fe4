use crate::prelude::*;
use crate::tensor::{hermitian_eigen, hermiticity_deviation, max_abs, trace_norm, HilbertFactorization};

/// A pure state on a factorized space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
    space: HilbertFactorization,
}

impl StateVector {
    /// Checks the dimension only; normalization is the caller's business
    /// (unnormalized components appear in state decompositions).
    pub fn new(amplitudes: CVector, space: HilbertFactorization) -> Result<Self> {
        if amplitudes.len() != space.total() {
            return Err(Error::DimensionMismatch { expected: space.total(), found: amplitudes.len() });
        }
        Ok(Self { amplitudes, space })
    }

    pub(crate) fn new_unchecked(amplitudes: CVector, space: HilbertFactorization) -> Self {
        debug_assert_eq!(amplitudes.len(), space.total());
        Self { amplitudes, space }
    }

    /// Unfactorized state from raw amplitudes.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Self {
        let space = HilbertFactorization::flat(amplitudes.len());
        Self { amplitudes: CVector::from_vec(amplitudes), space }
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(space: HilbertFactorization, index: usize) -> Self {
        let mut amplitudes = CVector::zeros(space.total());
        amplitudes[index] = ONE;
        Self { amplitudes, space }
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn space(&self) -> &HilbertFactorization {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.amplitudes.norm_squared() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= crate::ARITHMETIC_TOL {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self { amplitudes: self.amplitudes.unscale(n), space: self.space.clone() })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|self⟩ ⊗ |other⟩`.
    pub fn tensor(&self, other: &Self) -> Self {
        Self { amplitudes: self.amplitudes.kronecker(&other.amplitudes), space: self.space.join(&other.space) }
    }

    /// `|ψ⟩⟨ψ|` (not renormalized).
    pub fn to_density(&self) -> DensityOperator {
        DensityOperator { matrix: &self.amplitudes * self.amplitudes.adjoint(), space: self.space.clone() }
    }
}

/// A mixed state on a factorized space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    space: HilbertFactorization,
}

impl DensityOperator {
    /// Validates shape, Hermiticity and unit trace at the structural
    /// tolerance. Positivity is checked separately by [`Self::validate`]
    /// because it costs an eigendecomposition.
    pub fn new(matrix: CMatrix, space: HilbertFactorization) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != space.total() {
            return Err(Error::DimensionMismatch { expected: space.total(), found: matrix.nrows() });
        }
        let deviation = hermiticity_deviation(&matrix);
        if deviation > crate::STRUCTURAL_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = matrix.trace();
        if (trace - ONE).norm() > crate::STRUCTURAL_TOL {
            return Err(Error::InvalidState(alloc::format!("trace {} differs from 1", trace.re)));
        }
        Ok(Self { matrix, space })
    }

    pub(crate) fn new_unchecked(matrix: CMatrix, space: HilbertFactorization) -> Self {
        Self { matrix, space }
    }

    pub fn pure(psi: &StateVector) -> Self {
        psi.to_density()
    }

    pub fn maximally_mixed(space: HilbertFactorization) -> Self {
        let d = space.total();
        Self { matrix: CMatrix::identity(d, d).unscale(d as f64), space }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn space(&self) -> &HilbertFactorization {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.matrix).0
    }

    /// Full check of the density-operator invariants.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let deviation = hermiticity_deviation(&self.matrix);
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        if (self.trace() - 1.0).abs() > tol {
            return Err(Error::InvalidState(alloc::format!("trace {} differs from 1", self.trace())));
        }
        let min = self.eigenvalues().last().copied().unwrap_or(0.0);
        if min < -1e-10 {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(())
    }

    /// Computational-basis measurement probabilities. Diagonal entries in
    /// `(−1e-10, 0)` are eigensolver noise and clamp to zero.
    pub fn probabilities(&self) -> Result<Vec<f64>> {
        self.matrix
            .diagonal()
            .iter()
            .map(|z| match z.re {
                p if p >= 0.0 => Ok(p),
                p if p > -1e-10 => Ok(0.0),
                p => Err(Error::NotPositive { min_eigenvalue: p }),
            })
            .collect()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self { matrix: self.matrix.kronecker(&other.matrix), space: self.space.join(&other.space) }
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(0.5 * trace_norm(&(&self.matrix - &other.matrix)))
    }

    /// Entrywise distance, cheap enough for hot loops.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }
}

/// Schmidt decomposition `Σ c_j |l_j⟩ ⊗ |r_j⟩`; zero coefficients dropped.
#[derive(Debug, Clone)]
pub struct SchmidtData {
    pub coefficients: Vec<f64>,
    pub left: Vec<StateVector>,
    pub right: Vec<StateVector>,
}

impl SchmidtData {
    /// Rebuilds the state on `left ⊗ right`.
    pub fn reconstruct(&self) -> StateVector {
        let mut acc: Option<StateVector> = None;
        for ((c, l), r) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            let term = l.tensor(r);
            acc = Some(match acc {
                None => StateVector::new_unchecked(term.amplitudes.scale(*c), term.space),
                Some(mut s) => {
                    s.amplitudes.axpy(Complex64::new(*c, 0.0), &term.amplitudes, ONE);
                    s
                }
            });
        }
        acc.unwrap_or_else(|| StateVector::from_amplitudes(vec![ZERO]))
    }

    /// Largest deviation of either vector family from orthonormality.
    pub fn orthonormality_residual(&self) -> f64 {
        let family = |vs: &[StateVector]| {
            if vs.is_empty() {
                return 0.0;
            }
            let cols: Vec<CVector> = vs.iter().map(|v| v.amplitudes.clone()).collect();
            crate::tensor::orthonormality_deviation(&CMatrix::from_columns(&cols))
        };
        family(&self.left).max(family(&self.right))
    }
}
