//! Zero-error coding for finite-memory quantum channels and a dual-rail
//! spin-chain link simulator.
//!
//! The crate is `no_std` and needs only `alloc`. Everything is dense complex
//! linear algebra over explicitly factorized Hilbert spaces:
//!
//! * [`tensor`]: tensor products, partial traces, Hermitian exponentials,
//!   polar and Schmidt decompositions, fidelity.
//! * [`channel`]: Kraus channels, unitary dilations, composition, Choi
//!   distances and multi-use channel families.
//! * [`code`]: greedy zero-error classical codes, Radon-partition quantum
//!   codes and the block decoder.
//! * [`link`]: the dual-rail spin-chain mediator restricted to a fixed
//!   excitation sector.
//! * [`mixing`]: spectral analysis of the receiver-side map on the mediator.
//! * [`protocol`]: the full transfer protocol, its state decomposition, the
//!   parity check and resource accounting.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channel;
pub mod code;
mod error;
pub mod link;
pub mod mixing;
pub mod protocol;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{CMatrix, CVector, DensityOperator, HilbertFactorization, StateVector};

/// Default tolerance for structural checks (unitarity, orthonormality).
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Default tolerance for arithmetic identities (trace, Hermiticity).
pub const ARITHMETIC_TOL: f64 = 1e-12;

pub(crate) mod prelude {
    pub(crate) use alloc::vec;
    pub(crate) use alloc::vec::Vec;
    pub(crate) use num_complex::Complex64;
    // Float math comes from libm in no_std builds; the std test harness
    // shadows it with the inherent methods.
    #[allow(unused_imports)]
    pub(crate) use num_traits::Float as _;

    pub(crate) use crate::tensor::{CMatrix, CVector};
    pub(crate) use crate::{Error, Result};

    pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
    pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
}
