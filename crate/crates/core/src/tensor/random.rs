//! Seeded random states and operators for test panels.

use crate::prelude::*;
use crate::tensor::{DensityOperator, HilbertFactorization, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// The crate's reproducible generator.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex normal sample with unit variance.
pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Haar-random pure state.
pub fn random_state<R: Rng + ?Sized>(space: &HilbertFactorization, rng: &mut R) -> StateVector {
    let v = CVector::from_fn(space.total(), |_, _| gaussian_complex(rng));
    let n = v.norm();
    StateVector::new_unchecked(v.unscale(n), space.clone())
}

/// Full-rank random density operator `GG†/Tr(GG†)`.
pub fn random_density<R: Rng + ?Sized>(space: &HilbertFactorization, rng: &mut R) -> DensityOperator {
    let d = space.total();
    let g = ginibre(d, d, rng);
    let m = &g * g.adjoint();
    let t = m.trace().re;
    let mut m = m.unscale(t);
    // Exact Hermiticity keeps downstream checks tight.
    m = (&m + m.adjoint()).scale(0.5);
    DensityOperator::new_unchecked(m, space.clone())
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Random isometry with `cols` orthonormal columns in `rows` dimensions.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(cols <= rows, "an isometry needs cols <= rows");
    random_unitary(rows, rng).columns(0, cols).into_owned()
}

/// Random Hermitian matrix (GUE-like scale).
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(dim, dim, rng);
    (&g + g.adjoint()).scale(0.5)
}
