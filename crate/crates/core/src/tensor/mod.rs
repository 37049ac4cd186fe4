//! Dense complex linear algebra over explicitly factorized Hilbert spaces.
//!
//! Subsystem ordering is fixed everywhere: factor 0 is the slowest-varying
//! index, i.e. the leftmost tensor slot, which is also the ordering produced
//! by the Kronecker product.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

mod ops;
mod random;
mod space;
mod state;

pub(crate) use ops::computational_basis;
pub use ops::{
    apply_local, complete_orthonormal, dagger, fidelity, herm_exp, hermitian_eigen, hermitian_sqrt,
    hermiticity_deviation, kron_all, max_abs, operator_norm, orthonormality_deviation, partial_trace,
    partial_trace_matrix, permute_subsystems, polar_decompose, schmidt, tensor_product, trace_norm,
    unitarity_deviation, Bipartition, PolarDecomposition,
};
pub use random::{
    gaussian_complex, random_density, random_hermitian, random_isometry, random_state, random_unitary, seeded_rng,
};
pub use space::HilbertFactorization;
pub use state::{DensityOperator, SchmidtData, StateVector};

/// Dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = DVector<Complex64>;
